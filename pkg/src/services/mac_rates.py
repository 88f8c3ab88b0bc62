"""Effective secret-key rates for TDMA, OOC-CDMA, listen-before-send and WDM hybrids.

Rates are returned in bits/s: P(Y0) is in bits per frame and frame_t in ns.
"""

import logging
import math
from functools import lru_cache

from scipy.special import gammaln, xlog1py, xlogy

from ..core.config import settings
from ..core.errors import CapacityError, ModelDomainError
from ..models.params import SystemParams, WdmParams
from ..models.rates import RateReport, RateTerm, SchemeSpec
from . import network_model, ooc_codes
from .decoy_rate import decoy_breakdown

logger = logging.getLogger(__name__)

NS_PER_S = 1e9


def _bits_per_second(bits_per_frame: float, p: SystemParams) -> float:
    return max(bits_per_frame, 0.0) / p.frame_t * NS_PER_S


def _check_active(p: SystemParams, n_active: int) -> None:
    if not 1 <= n_active <= p.n_star:
        raise ModelDomainError(f"n_active must be in [1, {p.n_star}], got {n_active}")


def _floor(p: SystemParams, background: float | None) -> float:
    return network_model.y_tdma(p) if background is None else background


@lru_cache(maxsize=4096)
def _conditional(p: SystemParams, m: int, w: int, background: float | None) -> tuple[float, float]:
    # (rate in bits/s, yield) for m interferers; cached because sweeps and MC hit the same points
    eta = network_model.link_transmissivity(p)
    y0 = network_model.y_cdma(p, eta, m, w, background=background)
    bits = decoy_breakdown(network_model.decoy_inputs(p, y0)).p_y0
    return _bits_per_second(bits, p), y0


def rate_tdma(p: SystemParams, n_active: int, background: float | None = None) -> RateReport:
    """Interference-free rate: one dedicated chip per receiver."""
    _check_active(p, n_active)
    y0 = _floor(p, background)
    breakdown = decoy_breakdown(network_model.decoy_inputs(p, y0))
    per_user = _bits_per_second(breakdown.p_y0, p)
    return RateReport(
        scheme="tdma",
        n_active=n_active,
        frame_t=p.frame_t,
        per_user_rate=per_user,
        total_rate=n_active * per_user,
        y0_used=y0,
        breakdown=breakdown,
        terms=(RateTerm(m=0, weight=1.0, rate=per_user),),
        approx_rate=per_user,
    )


def rate_cdma_conditional(p: SystemParams, m: int, w: int, background: float | None = None) -> float:
    """Per-user rate in bits/s when exactly m interferers overlap the tagged code."""
    if m < 0:
        raise ModelDomainError(f"interferer count must be non-negative, got {m}")
    return _conditional(p, m, w, background)[0]


def binomial_weight(m: int, n: int, prob: float) -> float:
    """Binomial probability of m successes in n trials, evaluated in log space."""
    if not 0 <= m <= n or not 0.0 <= prob <= 1.0:
        raise ModelDomainError(f"binomial weight needs 0 <= m <= n and 0 <= p <= 1, got m={m}, n={n}, p={prob}")
    log_weight = (
        gammaln(n + 1) - gammaln(m + 1) - gammaln(n - m + 1)
        + xlogy(m, prob) + xlog1py(n - m, -prob)
    )
    return float(math.exp(log_weight))


def _averaged(
    p: SystemParams,
    n_active: int,
    w: int,
    prob: float,
    scheme: str,
    background: float | None,
) -> RateReport:
    n_int = n_active - 1
    y0 = _floor(p, background)
    tdma = rate_tdma(p, n_active, background=background)
    terms = tuple(
        RateTerm(m=m, weight=binomial_weight(m, n_int, prob), rate=rate_cdma_conditional(p, m, w, background))
        for m in range(n_int + 1)
    )
    per_user = math.fsum(term.weight * term.rate for term in terms)
    approx = (1.0 - prob) ** n_int * tdma.per_user_rate
    logger.debug(f"{scheme}: n_active={n_active} p={prob:.6g} exact={per_user:.6g} approx={approx:.6g}")
    return RateReport(
        scheme=scheme,
        n_active=n_active,
        frame_t=p.frame_t,
        per_user_rate=per_user,
        total_rate=n_active * per_user,
        y0_used=y0,
        breakdown=tdma.breakdown,
        terms=terms,
        collision_probability=prob,
        approx_rate=approx,
    )


def _check_codes(p: SystemParams, n_active: int, w: int) -> None:
    # builds the family so an infeasible assignment fails here rather than silently
    ooc_codes.generate_family(p.n_chips, w, n_active)


def rate_cdma(
    p: SystemParams,
    n_active: int,
    w: int,
    exact: bool = True,
    ignore_capacity: bool = False,
    background: float | None = None,
) -> RateReport:
    """Binomially averaged CDMA rate; ``exact=False`` reports the closed form as the rate.

    Both forms are always computed: the sum sits in ``terms``, the closed form in
    ``approx_rate``.
    """
    _check_active(p, n_active)
    prob = ooc_codes.collision_probability(p.n_chips, w)
    if not ignore_capacity:
        _check_codes(p, n_active, w)
    report = _averaged(p, n_active, w, prob, f"cdma-w{w}", background)
    if exact:
        return report
    return report.model_copy(
        update={"per_user_rate": report.approx_rate, "total_rate": n_active * report.approx_rate}
    )


def rate_cdma_worst_case(p: SystemParams, n_active: int, w: int, background: float | None = None) -> float:
    """Per-user rate when every other active pair overlaps the tagged code."""
    _check_active(p, n_active)
    return rate_cdma_conditional(p, n_active - 1, w, background)


def min_interference_weight(p: SystemParams, w_max: int = 1000) -> int:
    """Smallest code weight at which one overlapping interferer still leaves a positive rate.

    Returns 0 when no weight up to ``w_max`` does.
    """
    for w in range(1, w_max + 1):
        if rate_cdma_conditional(p, 1, w) > 0.0:
            return w
    return 0


def lbs_collision_probability(
    p: SystemParams,
    k: int,
    w1_yield: float | None = None,
    background: float | None = None,
) -> float:
    """Chance another pair settles on an occupied chip after k silent listening periods."""
    if k < 0:
        raise ModelDomainError(f"listening periods must be non-negative, got {k}")
    if w1_yield is None:
        w1_yield = network_model.y_cdma(p, network_model.link_transmissivity(p), 1, 1, background=background)
    return (1.0 - w1_yield) ** k / p.n_chips


def rate_lbs(p: SystemParams, n_active: int, k: int, background: float | None = None) -> RateReport:
    """Listen-before-send: weight-1 CDMA with the collision probability cut by sensing."""
    _check_active(p, n_active)
    prob = lbs_collision_probability(p, k, background=background)
    return _averaged(p, n_active, 1, prob, f"lbs-k{k}", background)


def lbs_overhead(p: SystemParams, k: int) -> float:
    """Listening time k * T in ns spent before a pair starts exchanging key."""
    if k < 0:
        raise ModelDomainError(f"listening periods must be non-negative, got {k}")
    return k * p.frame_t


def time_to_key(report: RateReport, bits: float) -> float:
    """Seconds a pair needs to accumulate ``bits`` of secret key at the per-user rate."""
    if report.per_user_rate <= 0.0:
        return math.inf
    return bits / report.per_user_rate


def _evaluate_inner(
    p: SystemParams,
    scheme: SchemeSpec,
    n_active: int,
    ignore_capacity: bool,
    background: float | None,
) -> RateReport:
    if scheme.kind == "cdma":
        return rate_cdma(p, n_active, scheme.weight, ignore_capacity=ignore_capacity, background=background)
    if scheme.kind == "lbs":
        return rate_lbs(p, n_active, scheme.listen_periods, background=background)
    return rate_tdma(p, n_active, background=background)


def rate_wdm(
    p: SystemParams,
    wdm: WdmParams,
    inner: SchemeSpec,
    n_active: int,
    ignore_capacity: bool = False,
) -> RateReport:
    """Inner-scheme rate per PON with the crosstalk-raised background of W wavelengths."""
    background = network_model.y_wdm(p, network_model.link_transmissivity(p), wdm)
    report = _evaluate_inner(p, inner.model_copy(update={"wdm": None}), n_active, ignore_capacity, background)
    return report.model_copy(update={"scheme": inner.model_copy(update={"wdm": wdm}).label})


def evaluate(p: SystemParams, scheme: SchemeSpec, n_active: int, ignore_capacity: bool = False) -> RateReport:
    """Rate report for any SchemeSpec."""
    if scheme.wdm is not None:
        return rate_wdm(p, scheme.wdm, scheme, n_active, ignore_capacity=ignore_capacity)
    return _evaluate_inner(p, scheme, n_active, ignore_capacity, None)


def max_wdm_channels(
    p: SystemParams,
    alpha_xt: float,
    inner: SchemeSpec,
    w_max: int | None = None,
    ignore_capacity: bool = False,
) -> int:
    """Largest wavelength count with a positive per-user rate at full capacity (0 if none)."""
    w_max = settings.WDM_SCAN_LIMIT if w_max is None else w_max
    if w_max < 1:
        raise ModelDomainError(f"channel scan bound must be at least 1, got {w_max}")
    best = 0
    for n_channels in range(1, w_max + 1):
        try:
            report = rate_wdm(p, WdmParams(n_channels=n_channels, alpha_xt=alpha_xt), inner, p.n_star, ignore_capacity)
        except CapacityError:
            raise
        except ModelDomainError:
            # background yield left [0, 1]: every larger W is out of range too
            break
        if report.per_user_rate <= 0.0:
            break
        best = n_channels
    logger.debug(f"alpha_xt={alpha_xt:g} supports {best} channels of {inner.label}")
    return best
