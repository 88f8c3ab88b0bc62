"""Optical orthogonal codes: zero-one sequences described by their pulse positions."""

from itertools import combinations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


def cyclic_overlaps(a: tuple[int, ...], b: tuple[int, ...], length: int) -> np.ndarray:
    """Overlap count for every cyclic shift s: |{i in a : (i + s) mod length in b}|."""
    target = np.zeros(length, dtype=np.int64)
    target[list(b)] = 1
    landed = (np.arange(length)[:, None] + np.asarray(a)[None, :]) % length
    return target[landed].sum(axis=1)


def cardinality_bound(length: int, w: int) -> int:
    """Johnson-type bound on the number of codes of weight w >= 2."""
    return (length - 1) // (w * (w - 1))


class OocCode(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    length: int = Field(ge=1)
    positions: tuple[int, ...] = Field(min_length=1)

    @property
    def weight(self) -> int:
        return len(self.positions)

    @model_validator(mode="after")
    def check_positions(self) -> "OocCode":
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError(f"positions {self.positions} must be strictly increasing")
        if self.positions[0] < 0 or self.positions[-1] >= self.length:
            raise ValueError(f"positions {self.positions} must lie in [0, {self.length})")
        sidelobes = cyclic_overlaps(self.positions, self.positions, self.length)[1:]
        if sidelobes.size and sidelobes.max() > 1:
            raise ValueError(f"code {self.positions} has cyclic autocorrelation sidelobe above 1")
        return self

    def __str__(self) -> str:
        return ",".join(str(i) for i in self.positions)


class OocFamily(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    length: int = Field(ge=1)
    weight: int = Field(ge=1)
    codes: tuple[OocCode, ...] = ()

    @model_validator(mode="after")
    def check_family(self) -> "OocFamily":
        for code in self.codes:
            if code.length != self.length or code.weight != self.weight:
                raise ValueError(
                    f"code {code} has length {code.length} and weight {code.weight}, "
                    f"family expects {self.length} and {self.weight}"
                )
        for a, b in combinations(self.codes, 2):
            if cyclic_overlaps(a.positions, b.positions, self.length).max() > 1:
                raise ValueError(f"codes {a} and {b} cross-correlate above 1")
        if self.weight >= 2:
            bound = cardinality_bound(self.length, self.weight)
            if len(self.codes) > bound:
                raise ValueError(f"{len(self.codes)} codes exceed the cardinality bound {bound}")
        return self

    def __len__(self) -> int:
        return len(self.codes)
