"""Decoy-state BB84 secret-key bound per pulse, in the infinite-key limit."""

import logging
import math

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import entr

from ..core.config import settings
from ..core.errors import DegenerateLinkError, ModelDomainError
from ..models.decoy import DecoyBreakdown, DecoyInputs

logger = logging.getLogger(__name__)

MU_UPPER_LIMIT = 2.0
ERROR_RATE_SLACK = 1e-12


def binary_entropy(p: float) -> float:
    """H(p) in bits; exactly 0 at p = 0 and p = 1."""
    if not 0.0 <= p <= 1.0:
        raise ModelDomainError(f"binary entropy needs a probability, got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return float((entr(p) + entr(1.0 - p)) / math.log(2.0))


def decoy_breakdown(inputs: DecoyInputs) -> DecoyBreakdown:
    """Gain, QBER, single-photon gain/error and the unclamped bound P(Y0)."""
    mu, eta, y0 = inputs.mu, inputs.eta, inputs.y0
    # 1 - exp(-eta*mu) without cancellation at small eta*mu
    detected = -math.expm1(-eta * mu)
    q_mu = detected + y0 * (1.0 - detected)
    if q_mu <= 0.0:
        raise DegenerateLinkError(f"overall gain is zero (y0={y0}, eta*mu={eta * mu})")
    y1 = y0 + eta * (1.0 - y0)
    if y1 <= 0.0:
        raise DegenerateLinkError(f"single-photon yield is zero (y0={y0}, eta={eta})")

    e_mu = (inputs.e0 * y0 + inputs.e_d * detected) / q_mu
    q1 = y1 * mu * math.exp(-mu)
    e1 = (y0 / 2.0 + inputs.e_d * eta) / y1

    for name, rate in (("e_mu", e_mu), ("e1", e1)):
        if rate > 1.0 + ERROR_RATE_SLACK:
            raise ModelDomainError(
                f"{name} = {rate:.6g} exceeds 1 for e0={inputs.e0}, e_d={inputs.e_d}, y0={y0}; "
                f"the gain decomposition has no valid error rate"
            )
    # only rounding is absorbed here
    e_mu, e1 = min(e_mu, 1.0), min(e1, 1.0)
    p_y0 = 0.5 * (-inputs.f_ec * q_mu * binary_entropy(e_mu) + q1 * (1.0 - binary_entropy(e1)))
    return DecoyBreakdown(q_mu=q_mu, e_mu=e_mu, q1=q1, e1=e1, y1=y1, p_y0=p_y0)


def key_bits_per_pulse(inputs: DecoyInputs) -> float:
    """P(Y0) of the decoy bound; negative values are kept for the caller to clamp."""
    return decoy_breakdown(inputs).p_y0


def optimize_mu(inputs: DecoyInputs, lower: float = 0.01, upper: float = MU_UPPER_LIMIT) -> float:
    """Mean photon number in [lower, upper] that maximises key_bits_per_pulse.

    A dense grid locates the best cell, then a bounded scalar search refines
    inside the two neighbouring cells. Everything but ``inputs.mu`` is held fixed.
    """
    if not 0.0 < lower < upper <= MU_UPPER_LIMIT:
        raise ModelDomainError(f"mu search range ({lower}, {upper}) must satisfy 0 < lower < upper <= {MU_UPPER_LIMIT}")

    def rate_at(mu: float) -> float:
        return key_bits_per_pulse(inputs.model_copy(update={"mu": float(mu)}))

    step = settings.MU_GRID_STEP
    grid = np.linspace(lower, upper, max(int(math.ceil((upper - lower) / step)) + 1, 3))
    values = np.array([rate_at(mu) for mu in grid])
    best = int(np.argmax(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]

    refined = minimize_scalar(lambda mu: -rate_at(mu), bounds=(lo, hi), method="bounded", options={"xatol": 1e-5})
    mu_star = float(refined.x) if refined.success and -refined.fun >= values[best] else float(grid[best])
    logger.debug(f"mu grid optimum {grid[best]:.4f}, refined {mu_star:.5f}")
    return mu_star
