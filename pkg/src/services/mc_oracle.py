"""Monte Carlo check of the binomial interference model and the LBS approximation.

Randomness contract: trials are cut into fixed batches of TRIALS_PER_BATCH and
batch b draws from ``SeedSequence(seed, spawn_key=(b,))``. Results therefore
depend only on (seed, config), never on how many workers ran the batches.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable

import numpy as np

from ..core.config import settings
from ..core.errors import CapacityError, ModelDomainError
from ..models.mc import McConfig, McResult
from ..models.ooc import OocCode
from ..models.params import SystemParams
from . import mac_rates, network_model, ooc_codes

logger = logging.getLogger(__name__)

TRIALS_PER_BATCH = 4096
Z_95 = 1.959963984540054


def _batch_rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(batch,)))


def _batches(trials: int) -> list[tuple[int, int, int]]:
    # (batch index, first trial index, batch size)
    count = math.ceil(trials / TRIALS_PER_BATCH)
    return [
        (b, b * TRIALS_PER_BATCH, min(TRIALS_PER_BATCH, trials - b * TRIALS_PER_BATCH))
        for b in range(count)
    ]


def _run_batches(worker: Callable[..., tuple], tasks: list[tuple], parallel: int) -> list[tuple]:
    if parallel > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as executor:
            return list(executor.map(worker, *zip(*tasks)))
    return [worker(*task) for task in tasks]


def _bernoulli_batch(seed: int, batch: int, size: int, n_int: int, prob: float) -> tuple[np.ndarray, int]:
    rng = _batch_rng(seed, batch)
    collided = rng.random((size, n_int)) < prob
    m = collided.sum(axis=1)
    return np.bincount(m, minlength=n_int + 1), int(m.sum())


def _code_batch(seed: int, batch: int, size: int, hits: np.ndarray) -> tuple[np.ndarray, int]:
    # hits[i, s]: interferer i shifted by s lands a pulse on a tagged-code pulse
    rng = _batch_rng(seed, batch)
    n_int, n_chips = hits.shape
    shifts = rng.integers(0, n_chips, size=(size, n_int))
    m = hits[np.arange(n_int)[None, :], shifts].sum(axis=1)
    return np.bincount(m, minlength=n_int + 1), int(m.sum())


def _lbs_batch(
    seed: int,
    batch: int,
    size: int,
    first_trial: int,
    n_active: int,
    n_chips: int,
    k: int,
    detect_yield: float,
    max_attempts: int,
) -> tuple[np.ndarray, int, int]:
    rng = _batch_rng(seed, batch)
    rows = np.arange(size)
    occupancy = np.zeros((size, n_chips), dtype=np.int64)
    chips = np.zeros((size, n_active), dtype=np.int64)
    capped = 0
    for pair in range(n_active):
        chosen = np.zeros(size, dtype=np.int64)
        pending = np.ones(size, dtype=bool)
        for _ in range(max_attempts):
            idx = np.flatnonzero(pending)
            if idx.size == 0:
                break
            draw = rng.integers(0, n_chips, size=idx.size)
            per_period = 1.0 - (1.0 - detect_yield) ** occupancy[idx, draw]
            detected = rng.random(idx.size) < 1.0 - (1.0 - per_period) ** k
            chosen[idx] = draw
            pending[idx[~detected]] = False
        capped += int(pending.sum())
        occupancy[rows, chosen] += 1
        chips[:, pair] = chosen
    tagged = (first_trial + rows) % n_active
    m = occupancy[rows, chips[rows, tagged]] - 1
    return np.bincount(m, minlength=n_active), int(m.sum()), capped


def _background(cfg: McConfig) -> float | None:
    if cfg.scheme.wdm is None:
        return None
    return network_model.y_wdm(cfg.params, network_model.link_transmissivity(cfg.params), cfg.scheme.wdm)


def _summarize(
    histogram: np.ndarray,
    collisions: int,
    cfg: McConfig,
    weight: int,
    background: float | None,
) -> McResult:
    trials = int(histogram.sum())
    n_int = cfg.n_active - 1
    freqs = histogram / trials
    rates = np.array([
        mac_rates.rate_cdma_conditional(cfg.params, m, weight, background) for m in range(len(histogram))
    ])
    mean = float(np.dot(freqs, rates))
    variance = max(float(np.dot(freqs, rates**2)) - mean**2, 0.0)
    stderr = math.sqrt(variance / trials)

    draws = trials * n_int
    freq = collisions / draws if draws else 0.0
    half = Z_95 * math.sqrt(freq * (1.0 - freq) / draws) if draws else 0.0
    return McResult(
        trials=trials,
        interferer_histogram=tuple(int(count) for count in histogram),
        empirical_rate=mean,
        empirical_rate_stderr=stderr,
        collision_freq=freq,
        collision_ci=(max(freq - half, 0.0), min(freq + half, 1.0)),
    )


def model_collision_probability(cfg: McConfig) -> float:
    """Per-interferer collision probability the analytical model assumes for cfg."""
    scheme = cfg.scheme
    if scheme.kind == "cdma":
        return ooc_codes.collision_probability(cfg.params.n_chips, scheme.weight)
    if scheme.kind == "lbs":
        return mac_rates.lbs_collision_probability(cfg.params, scheme.listen_periods, background=_background(cfg))
    return 0.0


def _check_capacity(cfg: McConfig, weight: int) -> None:
    capacity = ooc_codes.code_capacity(cfg.params.n_chips, weight)
    if cfg.n_active > capacity:
        raise CapacityError(
            f"{cfg.n_active} pairs need codes but at most {capacity} exist for "
            f"N_c={cfg.params.n_chips}, w={weight}; set ignore_capacity to reuse codes"
        )


def _assign_codes(cfg: McConfig, weight: int) -> list[OocCode]:
    """One code per active pair, pair 0 being the tagged receiver.

    With ignore_capacity and too few codes, the largest feasible family is
    handed out in turn, so pairs beyond the family size share codes.
    """
    n_chips = cfg.params.n_chips
    capacity = ooc_codes.code_capacity(n_chips, weight)
    if cfg.n_active <= capacity:
        return list(ooc_codes.generate_family(n_chips, weight, cfg.n_active).codes)
    if capacity == 0:
        raise CapacityError(f"no code of weight {weight} fits N_c={n_chips}")
    family = ooc_codes.generate_family(n_chips, weight, capacity)
    logger.warning(f"{cfg.n_active} pairs share {capacity} codes of weight {weight}; codes are reused in turn")
    return [family.codes[pair % capacity] for pair in range(cfg.n_active)]


def simulate_interferers(cfg: McConfig, parallel: int | None = None) -> McResult:
    """Count interferers on a tagged receiver frame by frame.

    bernoulli-model: each other pair collides independently with the model
    probability (w^2/N_c, or p' for LBS). code-level: each other pair gets its
    own code from a generated family and a uniform cyclic shift; with
    ignore_capacity the codes are shared in turn once the family runs out.
    """
    parallel = parallel or settings.PARALLEL
    n_int = cfg.n_active - 1
    weight = cfg.scheme.weight if cfg.scheme.kind == "cdma" else 1
    if cfg.scheme.kind == "cdma" and not cfg.ignore_capacity:
        _check_capacity(cfg, weight)
    background = _background(cfg)
    tasks = _batches(cfg.trials)
    logger.info(f"MC {cfg.mode} {cfg.scheme.label}: {cfg.trials} trials in {len(tasks)} batches, seed={cfg.seed}")

    if cfg.mode == "bernoulli-model":
        prob = model_collision_probability(cfg)
        results = _run_batches(
            _bernoulli_batch, [(cfg.seed, b, size, n_int, prob) for b, _, size in tasks], parallel
        )
    else:
        if cfg.scheme.kind == "lbs":
            raise ModelDomainError("code-level mode has no sensing; use simulate_lbs_sensing for LBS")
        codes = _assign_codes(cfg, weight)
        hits = np.array(
            [ooc_codes.shift_overlaps(code, codes[0]) > 0 for code in codes[1:]], dtype=np.int64
        ).reshape(n_int, cfg.params.n_chips)
        results = _run_batches(_code_batch, [(cfg.seed, b, size, hits) for b, _, size in tasks], parallel)

    histogram = np.sum([counts for counts, _ in results], axis=0)
    collisions = sum(hit for _, hit in results)
    return _summarize(histogram, collisions, cfg, weight, background)


def simulate_lbs_sensing(
    cfg: McConfig,
    k: int | None = None,
    parallel: int | None = None,
    detect_yield: float | None = None,
) -> McResult:
    """Sequential listen-before-send activation, pair by pair in index order.

    A pair draws a uniform chip and listens k periods; each pair already on that
    chip is detected per period with the one-interferer yield, and a detection
    sends the pair back to draw again. Accepted chips are never revisited.
    """
    if cfg.scheme.kind != "lbs":
        raise ModelDomainError(f"LBS sensing needs an lbs scheme, got {cfg.scheme.label}")
    parallel = parallel or settings.PARALLEL
    k = cfg.scheme.listen_periods if k is None else k
    if k < 0:
        raise ModelDomainError(f"listening periods must be non-negative, got {k}")
    p: SystemParams = cfg.params
    background = _background(cfg)
    if detect_yield is None:
        detect_yield = network_model.y_cdma(p, network_model.link_transmissivity(p), 1, 1, background=background)

    tasks = [
        (cfg.seed, b, size, first, cfg.n_active, p.n_chips, k, detect_yield, settings.LBS_MAX_ATTEMPTS)
        for b, first, size in _batches(cfg.trials)
    ]
    logger.info(f"LBS sensing k={k}: {cfg.trials} trials, n_active={cfg.n_active}, seed={cfg.seed}")
    results = _run_batches(_lbs_batch, tasks, parallel)

    histogram = np.sum([counts for counts, _, _ in results], axis=0)
    collisions = sum(hit for _, hit, _ in results)
    capped = sum(cap for _, _, cap in results)
    if capped:
        logger.warning(f"{capped} pairs hit the redraw cap of {settings.LBS_MAX_ATTEMPTS} and kept an occupied chip")
    return _summarize(histogram, collisions, cfg, 1, background)


def model_comparison(cfg: McConfig, result: McResult) -> dict[str, Any]:
    """Analytical counterparts of an MC result, z-score and total-variation distance."""
    n_int = cfg.n_active - 1
    prob = model_collision_probability(cfg)
    report = mac_rates.evaluate(cfg.params, cfg.scheme, cfg.n_active, ignore_capacity=cfg.ignore_capacity)
    expected = [mac_rates.binomial_weight(m, n_int, prob) for m in range(n_int + 1)]
    freqs = result.frequencies()
    tv_distance = 0.5 * sum(abs(f - e) for f, e in zip(freqs, expected))
    gap = result.empirical_rate - report.per_user_rate
    if result.empirical_rate_stderr > 0:
        z_score = gap / result.empirical_rate_stderr
    else:
        z_score = 0.0 if gap == 0 else math.copysign(math.inf, gap)
    relative_gap = gap / report.per_user_rate if report.per_user_rate > 0 else 0.0
    model_gap = abs(relative_gap) > settings.MODEL_GAP_THRESHOLD
    if model_gap:
        logger.warning(
            f"model gap for {cfg.scheme.label}: empirical {result.empirical_rate:.6g} b/s vs "
            f"analytical {report.per_user_rate:.6g} b/s ({relative_gap:+.2%})"
        )
    return {
        "analytical_rate": report.per_user_rate,
        "analytical_collision_probability": prob,
        "analytical_freq_m0": expected[0],
        "z_score": z_score,
        "relative_gap": relative_gap,
        "model_gap": model_gap,
        "tv_distance": tv_distance,
        "tv_gate": 5.0 * math.sqrt(cfg.params.n_chips / result.trials),
    }
