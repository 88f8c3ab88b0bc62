from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .params import SystemParams
from .rates import SchemeSpec

McMode = Literal["bernoulli-model", "code-level"]


class McConfig(BaseModel):
    """One Monte Carlo run: which scheme, how many frames, which seed."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    trials: int = Field(default=100_000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    mode: McMode = "bernoulli-model"
    scheme: SchemeSpec = SchemeSpec(kind="cdma", weight=1)
    params: SystemParams = SystemParams()
    n_active: int = Field(default=16, ge=1)
    ignore_capacity: bool = False


class McResult(BaseModel):
    """Interferer histogram of the tagged receiver and the rate it implies."""

    model_config = ConfigDict(frozen=True)

    trials: int
    interferer_histogram: tuple[int, ...]
    empirical_rate: float
    empirical_rate_stderr: float
    collision_freq: float
    collision_ci: tuple[float, float]

    @model_validator(mode="after")
    def check_counts(self) -> "McResult":
        if sum(self.interferer_histogram) != self.trials:
            raise ValueError(f"histogram holds {sum(self.interferer_histogram)} counts for {self.trials} trials")
        return self

    def frequencies(self) -> list[float]:
        return [count / self.trials for count in self.interferer_histogram]
