"""Star-network physics: link transmissivity, frame timing and background yields."""

import math

from ..core.errors import ModelDomainError
from ..models.decoy import DecoyInputs
from ..models.params import SystemParams, WdmParams


def nominal_params() -> SystemParams:
    """Nominal parameter set (mu = 0.48, 6 dB, N = N_c = 16, 1 ns chips)."""
    return SystemParams()


def _checked_yield(value: float, what: str) -> float:
    if not 0.0 <= value <= 1.0:
        raise ModelDomainError(f"{what} yield {value:.6g} is not a probability; check rates and gate width")
    return value


def link_transmissivity(p: SystemParams) -> float:
    """Detector efficiency times path loss times 1/N star-coupler splitting."""
    return p.eta_d * 10.0 ** (-p.path_loss_db / 10.0) / p.n_star


def y_tdma(p: SystemParams) -> float:
    """Dark counts plus classical crosstalk collected during one detector gate."""
    return _checked_yield((p.gamma_dc + p.eta_d * p.gamma_xtalk * p.b_opt) * p.tau_d, "TDMA")


def y_cdma(p: SystemParams, eta: float, m: int, w: int, background: float | None = None) -> float:
    """Background yield with m chip-synchronous interferers of code weight w.

    ``background`` replaces Y_TDMA as the noise floor (the WDM-modified yield).
    """
    if m < 0 or w < 1:
        raise ModelDomainError(f"need m >= 0 and w >= 1, got m={m}, w={w}")
    floor = y_tdma(p) if background is None else background
    return _checked_yield(floor + m * eta * p.mu / w, "CDMA")


def y_wdm(p: SystemParams, eta: float, wdm: WdmParams) -> float:
    """TDMA background plus leakage from the other W - 1 wavelength channels."""
    return _checked_yield(y_tdma(p) + (wdm.n_channels - 1) * eta * p.mu * wdm.alpha_xt, "WDM")


def prescribe_timing(tau_detector: float, dead_time: float, n_star: int) -> dict[str, float | int]:
    """Pulse, chip and gate equal to the detector resolution; the frame covers dead time and N chips."""
    if tau_detector <= 0:
        raise ModelDomainError(f"detector time resolution must be positive, got {tau_detector}")
    frame_t = max(dead_time, n_star * tau_detector)
    return {
        "tau_p": tau_detector,
        "tau_c": tau_detector,
        "tau_d": tau_detector,
        "b_opt": 1.0 / tau_detector,
        "frame_t": frame_t,
        "n_chips": math.ceil(frame_t / tau_detector - 1e-9),
    }


def prescribed_params(tau_detector: float, dead_time: float = 0.0, **overrides) -> SystemParams:
    """Nominal parameters re-timed with prescribe_timing."""
    n_star = overrides.get("n_star", SystemParams().n_star)
    timing = prescribe_timing(tau_detector, dead_time, n_star)
    # ceil may lengthen the frame by part of a chip
    timing["frame_t"] = max(timing["frame_t"], timing["n_chips"] * tau_detector)
    return SystemParams(**{**timing, "dead_time": dead_time, **overrides})


def apply_timing(p: SystemParams | dict, mode: str) -> SystemParams:
    """Re-derive timing after n_chips changed.

    fixed_chip keeps tau_c and stretches the frame to n_chips chips;
    fixed_frame keeps frame_t and shrinks pulse, gate and chip to frame_t / n_chips
    with the matched optical bandwidth.
    """
    values = p.model_dump() if isinstance(p, SystemParams) else dict(p)
    if mode == "fixed_chip":
        values["frame_t"] = max(values["n_chips"] * values["tau_c"], values["dead_time"])
    elif mode == "fixed_frame":
        chip = values["frame_t"] / values["n_chips"]
        values.update(tau_c=chip, tau_p=chip, tau_d=chip, b_opt=1.0 / chip)
    elif mode != "none":
        raise ModelDomainError(f"unknown timing mode {mode!r}")
    return SystemParams.model_validate(values)


def decoy_inputs(p: SystemParams, y0: float, mu: float | None = None) -> DecoyInputs:
    """Decoy-bound inputs for a user pair seeing background yield y0."""
    return DecoyInputs(
        mu=p.mu if mu is None else mu,
        eta=link_transmissivity(p),
        y0=y0,
        e_d=p.e_d,
        e0=p.e0,
        f_ec=p.f_ec,
    )
