"""Optical orthogonal code families: correlation checks, cardinality and construction."""

import logging
from typing import Iterator

import numpy as np

from ..core.config import settings
from ..core.errors import CapacityError, InternalError, ModelDomainError
from ..models.ooc import OocCode, OocFamily, cardinality_bound, cyclic_overlaps

logger = logging.getLogger(__name__)


def shift_overlaps(a: OocCode, b: OocCode) -> np.ndarray:
    """Overlap count for every cyclic shift s: |{i in a : (i + s) mod N_c in b}|."""
    if a.length != b.length:
        raise ModelDomainError(f"codes have different lengths ({a.length} and {b.length})")
    return cyclic_overlaps(a.positions, b.positions, a.length)


def max_cross_correlation(a: OocCode, b: OocCode) -> int:
    """Largest overlap over all cyclic shifts; for a == b the zero shift is the peak and is skipped."""
    overlaps = shift_overlaps(a, b)
    if a.positions == b.positions:
        overlaps = overlaps[1:]
    return int(overlaps.max()) if overlaps.size else 0


def capacity_bound(n_chips: int, w: int) -> int:
    """Johnson-type bound on the number of codes of length N_c and weight w >= 2."""
    if w < 2:
        raise ModelDomainError(f"cardinality bound needs w >= 2, got w={w}; see code_capacity for w = 1")
    if n_chips < 1:
        raise ModelDomainError(f"code length must be positive, got {n_chips}")
    return cardinality_bound(n_chips, w)


def code_capacity(n_chips: int, w: int) -> int:
    """capacity_bound, extended with N_c codes (one per chip) for w = 1."""
    if w == 1:
        return n_chips
    return capacity_bound(n_chips, w)


def collision_probability(n_chips: int, w: int) -> float:
    """Chip-synchronous probability that a random interferer overlaps the tagged code."""
    if w < 1 or w * w > n_chips:
        raise ModelDomainError(f"collision probability w^2/N_c needs 1 <= w^2 <= N_c, got w={w}, N_c={n_chips}")
    return w * w / n_chips


def collision_frequency(family: OocFamily, tagged: int = 0) -> float:
    """Exact fraction of (interferer, shift) pairs that overlap the tagged code.

    Every other code of the family is shifted through all N_c positions.
    """
    target = family.codes[tagged]
    others = [code for index, code in enumerate(family.codes) if index != tagged]
    if not others:
        return 0.0
    hits = sum(int((shift_overlaps(code, target) > 0).sum()) for code in others)
    return hits / (len(others) * family.length)


def _differences(positions: tuple[int, ...], n_chips: int) -> list[int]:
    return [(b - a) % n_chips for a in positions for b in positions if a != b]


class _FamilySearch:
    """Depth-first search for codes with pairwise-disjoint difference sets.

    Codes are normalised to start at chip 0 and tried in lexicographic order.
    Cross-correlation <= 1 between two codes is equivalent to their difference
    sets being disjoint, and autocorrelation <= 1 to a code's own differences
    being distinct.
    """

    def __init__(self, n_chips: int, w: int, count: int):
        self.n_chips = n_chips
        self.w = w
        self.count = count
        self.used: set[int] = set()
        self.family: list[tuple[int, ...]] = []
        self.nodes = 0
        # the difference N_c/2 pairs with itself, so no code can contain it
        self.usable = n_chips - 1 - (1 if n_chips % 2 == 0 else 0)

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes > settings.OOC_SEARCH_LIMIT:
            raise InternalError(
                f"OOC search for {self.count} codes (N_c={self.n_chips}, w={self.w}) "
                f"exceeded {settings.OOC_SEARCH_LIMIT} nodes"
            )

    def _candidates(self, prefix: list[int], own: set[int]) -> Iterator[tuple[int, ...]]:
        if len(prefix) == self.w:
            yield tuple(prefix)
            return
        for chip in range(prefix[-1] + 1, self.n_chips - (self.w - len(prefix) - 1)):
            self._tick()
            new = {(chip - i) % self.n_chips for i in prefix} | {(i - chip) % self.n_chips for i in prefix}
            if len(new) != 2 * len(prefix) or new & own or new & self.used:
                continue
            yield from self._candidates(prefix + [chip], own | new)

    def _extend(self, after: tuple[int, ...]) -> bool:
        if len(self.family) == self.count:
            return True
        remaining = self.count - len(self.family)
        if len(self.used) + remaining * self.w * (self.w - 1) > self.usable:
            return False
        for candidate in self._candidates([0], set()):
            if candidate <= after:
                continue
            diffs = set(_differences(candidate, self.n_chips))
            self.family.append(candidate)
            self.used |= diffs
            if self._extend(candidate):
                return True
            self.family.pop()
            self.used -= diffs
        return False

    def run(self) -> list[tuple[int, ...]]:
        if not self._extend(()):
            raise InternalError(
                f"no family of {self.count} codes found for N_c={self.n_chips}, w={self.w} "
                f"although the cardinality bound allows it"
            )
        logger.debug(f"OOC search found {self.count} codes in {self.nodes} nodes")
        return self.family


def generate_family(n_chips: int, w: int, count: int) -> OocFamily:
    """Deterministic family of ``count`` codes; singletons {0}..{count-1} for w = 1."""
    if w < 1 or count < 0:
        raise ModelDomainError(f"need w >= 1 and count >= 0, got w={w}, count={count}")
    capacity = code_capacity(n_chips, w)
    if count > capacity:
        raise CapacityError(f"{count} codes requested but at most {capacity} exist for N_c={n_chips}, w={w}")
    if w == 1:
        codes = [(i,) for i in range(count)]
    elif count == 0:
        codes = []
    else:
        codes = _FamilySearch(n_chips, w, count).run()
    return OocFamily(
        length=n_chips,
        weight=w,
        codes=tuple(OocCode(length=n_chips, positions=positions) for positions in codes),
    )
