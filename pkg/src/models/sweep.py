from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .params import SystemParams
from .rates import SchemeSpec

# Fields a sweep may vary besides the SystemParams ones
SCHEME_VARIABLES = ("weight", "listen_periods", "n_channels", "alpha_xt", "n_active")
SWEEP_VARIABLES = tuple(SystemParams.model_fields) + SCHEME_VARIABLES

TimingMode = Literal["none", "fixed_chip", "fixed_frame"]


class ValueRange(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    start: float
    stop: float
    step: float = Field(gt=0)

    def expand(self) -> list[float]:
        count = int((self.stop - self.start) / self.step + 1e-9) + 1
        return [self.start + i * self.step for i in range(max(count, 0))]


class SweepSpec(BaseModel):
    """One parameter sweep: a variable, its values, and the schemes evaluated at each value."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "sweep"
    variable: str
    values: Union[tuple[float, ...], ValueRange]
    schemes: tuple[SchemeSpec, ...] = Field(min_length=1)
    n_active: Union[int, Literal["full"]] = "full"
    output: Optional[str] = None
    format: Literal["csv", "keyvalue"] = "csv"
    timing: TimingMode = "none"

    @field_validator("variable")
    @classmethod
    def check_variable(cls, value: str) -> str:
        if value not in SWEEP_VARIABLES:
            raise ValueError(f"unknown sweep variable {value!r}; expected one of {', '.join(SWEEP_VARIABLES)}")
        return value

    @field_validator("n_active")
    @classmethod
    def check_n_active(cls, value: Union[int, str]) -> Union[int, str]:
        if isinstance(value, int) and value < 1:
            raise ValueError("n_active must be at least 1 or 'full'")
        return value

    @model_validator(mode="after")
    def check_values(self) -> "SweepSpec":
        if not self.points():
            raise ValueError(f"sweep {self.name!r} has no values")
        return self

    def points(self) -> list[float]:
        if isinstance(self.values, ValueRange):
            return self.values.expand()
        return list(self.values)


class SweepRow(BaseModel):
    """One scheme evaluated at one sweep point."""

    model_config = ConfigDict(frozen=True)

    scheme: str
    value: float
    per_user_rate: float
    total_rate: float
    per_user_bits_per_frame: float
    total_bits_per_frame: float
    y0: float
    q_mu: float
    e_mu: float
