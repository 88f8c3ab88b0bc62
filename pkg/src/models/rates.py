"""Multiple-access scheme choice and the rate report produced for it."""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .decoy import DecoyBreakdown
from .params import WdmParams

SchemeKind = Literal["tdma", "cdma", "lbs"]


class SchemeSpec(BaseModel):
    """TDMA, CDMA with code weight w, or LBS with k listening periods, optionally over WDM.

    Text form: ``tdma``, ``cdma:<w>``, ``lbs:<k>``, ``wdm:<W>:<alpha_xt>:<inner>``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SchemeKind = "tdma"
    weight: int = Field(default=1, ge=1)
    listen_periods: int = Field(default=0, ge=0)
    wdm: Optional[WdmParams] = None

    @classmethod
    def parse(cls, text: str) -> "SchemeSpec":
        parts = [part.strip() for part in text.strip().lower().split(":")]
        head = parts[0]
        if head == "wdm":
            if len(parts) < 4:
                raise ValueError(f"scheme {text!r}: expected wdm:<W>:<alpha_xt>:<inner>")
            inner = cls.parse(":".join(parts[3:]))
            if inner.wdm is not None:
                raise ValueError(f"scheme {text!r}: nested wdm is not allowed")
            wdm = WdmParams(n_channels=int(parts[1]), alpha_xt=float(parts[2]))
            return inner.model_copy(update={"wdm": wdm})
        if head == "tdma" and len(parts) == 1:
            return cls(kind="tdma")
        if head == "cdma" and len(parts) == 2:
            return cls(kind="cdma", weight=int(parts[1]))
        if head == "lbs" and len(parts) == 2:
            return cls(kind="lbs", listen_periods=int(parts[1]))
        raise ValueError(f"unknown scheme {text!r}; use tdma, cdma:<w>, lbs:<k> or wdm:<W>:<alpha_xt>:<inner>")

    @property
    def label(self) -> str:
        if self.kind == "cdma":
            base = f"cdma-w{self.weight}"
        elif self.kind == "lbs":
            base = f"lbs-k{self.listen_periods}"
        else:
            base = "tdma"
        if self.wdm is None:
            return base
        return f"wdm{self.wdm.n_channels}-xt{self.wdm.alpha_xt:g}/{base}"


class RateTerm(BaseModel):
    """One summand of an interference average: m interferers, its probability, its rate."""

    model_config = ConfigDict(frozen=True)

    m: int
    weight: float
    rate: float


class RateReport(BaseModel):
    """Per-user and network rates (bits/s) with the quantities they came from."""

    model_config = ConfigDict(frozen=True)

    scheme: str
    n_active: int
    frame_t: float
    per_user_rate: float
    total_rate: float
    y0_used: float
    breakdown: DecoyBreakdown
    terms: tuple[RateTerm, ...]
    collision_probability: Optional[float] = None
    approx_rate: Optional[float] = None

    @property
    def per_user_bits_per_frame(self) -> float:
        return self.per_user_rate * self.frame_t * 1e-9

    @property
    def total_bits_per_frame(self) -> float:
        return self.total_rate * self.frame_t * 1e-9
