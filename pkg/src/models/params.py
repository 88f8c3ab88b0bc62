"""Physical and network parameters of the star network."""

from pydantic import BaseModel, ConfigDict, Field, model_validator

# frame_t = n_chips * tau_c is recomputed from floats in fixed-frame sweeps
TIMING_RTOL = 1e-9


class SystemParams(BaseModel):
    """All physical and network parameters; defaults are the nominal operating point.

    Units: time in ns, rates in counts/ns, bandwidth in GHz.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    mu: float = Field(default=0.48, gt=0)
    gamma_dc: float = Field(default=1e-7, ge=0)
    gamma_xtalk: float = Field(default=8e-8, ge=0)
    b_opt: float = Field(default=1.0, ge=0)
    eta_d: float = Field(default=0.3, ge=0, le=1)
    path_loss_db: float = Field(default=6.0, ge=0)
    n_star: int = Field(default=16, ge=2)
    n_chips: int = Field(default=16, ge=1)
    tau_p: float = Field(default=1.0, gt=0)
    tau_d: float = Field(default=1.0, gt=0)
    tau_c: float = Field(default=1.0, gt=0)
    frame_t: float = Field(default=16.0, gt=0)
    dead_time: float = Field(default=0.0, ge=0)
    f_ec: float = Field(default=1.22, ge=1)
    e_d: float = Field(default=0.033, ge=0, le=0.5)
    e0: float = Field(default=0.5, ge=0, le=1)

    @model_validator(mode="after")
    def check_timing(self) -> "SystemParams":
        if self.tau_p > self.tau_c:
            raise ValueError(f"tau_p ({self.tau_p}) must not exceed tau_c ({self.tau_c})")
        if self.tau_d > self.tau_c:
            raise ValueError(f"tau_d ({self.tau_d}) must not exceed tau_c ({self.tau_c})")
        slots = self.n_chips * self.tau_c
        if self.frame_t < slots * (1 - TIMING_RTOL):
            raise ValueError(
                f"frame_t ({self.frame_t}) must be at least n_chips * tau_c "
                f"({self.n_chips} * {self.tau_c})"
            )
        if self.frame_t < self.dead_time:
            raise ValueError(f"frame_t ({self.frame_t}) must be at least dead_time ({self.dead_time})")
        return self


class WdmParams(BaseModel):
    """Wavelength layer on top of the star subnetworks."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_channels: int = Field(default=1, ge=1)
    alpha_xt: float = Field(default=0.0, ge=0, le=1)
