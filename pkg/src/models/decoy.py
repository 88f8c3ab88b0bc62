from pydantic import BaseModel, ConfigDict, Field


class DecoyInputs(BaseModel):
    """Inputs of the decoy-state key-rate bound for one link."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    mu: float = Field(gt=0)
    eta: float = Field(ge=0, le=1)
    y0: float = Field(ge=0, le=1)
    e_d: float = Field(ge=0, le=0.5)
    e0: float = Field(default=0.5, ge=0, le=1)
    f_ec: float = Field(default=1.22, ge=1)


class DecoyBreakdown(BaseModel):
    """Intermediate quantities of the bound; p_y0 is unclamped."""

    model_config = ConfigDict(frozen=True)

    q_mu: float
    e_mu: float
    q1: float
    e1: float
    y1: float
    p_y0: float
