"""Scenario files, figure presets and parameter sweeps over the rate engines."""

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Iterable

from dotenv.parser import parse_stream
from pydantic import BaseModel, ConfigDict, ValidationError

from ..core.config import settings
from ..core.errors import ConfigError, ModelDomainError
from ..models.mc import McConfig, McResult
from ..models.params import SystemParams, WdmParams
from ..models.rates import SchemeSpec
from ..models.sweep import SweepRow, SweepSpec, ValueRange
from . import mac_rates, mc_oracle, network_model

logger = logging.getLogger(__name__)

SWEEP_KEYS = ("variable", "values", "range", "schemes", "n_active", "output", "format", "timing")
TIMING_KEYS = ("tau_p", "tau_c", "tau_d", "b_opt", "frame_t", "n_chips")
SIGNIFICANT = "{:.6g}"


def describe_validation(exc: ValidationError) -> str:
    """Flatten pydantic errors into ``field: message`` pairs."""
    parts = []
    for error in exc.errors():
        where = ".".join(str(part) for part in error["loc"]) or "params"
        parts.append(f"{where}: {error['msg']}")
    return "; ".join(parts)


# --- configuration files -------------------------------------------------


def _sweep_fields(name: str, raw: dict[str, str]) -> dict[str, Any]:
    fields: dict[str, Any] = {"name": name}
    for key, value in raw.items():
        if key == "values":
            fields["values"] = tuple(float(item) for item in value.split(",") if item.strip())
        elif key == "range":
            start, stop, step = (float(item) for item in value.split(":"))
            fields["values"] = ValueRange(start=start, stop=stop, step=step)
        elif key == "schemes":
            fields["schemes"] = tuple(SchemeSpec.parse(item) for item in value.split(",") if item.strip())
        elif key == "n_active":
            fields["n_active"] = value if value == "full" else int(value)
        else:
            fields[key] = value
    return fields


def _prescribed(system: dict[str, str], path: Path) -> SystemParams:
    # tau_detector replaces the timing keys with prescribed_params
    clash = [key for key in TIMING_KEYS if key in system]
    if clash:
        raise ConfigError(f"{path}: tau_detector prescribes timing; remove {', '.join(clash)}")
    values: dict[str, Any] = dict(system)
    for key, kind in (("tau_detector", float), ("dead_time", float), ("n_star", int)):
        if key not in values:
            continue
        try:
            values[key] = kind(values[key])
        except ValueError as exc:
            raise ConfigError(f"{path}: {key} must be a number, got {values[key]!r}") from exc
    tau = values.pop("tau_detector")
    try:
        return network_model.prescribed_params(tau, values.pop("dead_time", 0.0), **values)
    except ModelDomainError as exc:
        raise ConfigError(f"{path}: tau_detector: {exc}") from exc


def load_config(path: str | Path) -> tuple[SystemParams, list[SweepSpec]]:
    """Parse a flat ``key = value`` scenario file into validated records.

    Bare keys are SystemParams fields (plus ``tau_detector``, which applies the
    pulse = chip = gate timing prescription); ``sweep.<name>.<field>`` keys
    describe sweeps. Unknown keys and unparsable lines are errors.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")

    system: dict[str, str] = {}
    sweeps: dict[str, dict[str, str]] = {}
    with path.open(encoding="utf-8") as stream:
        for binding in parse_stream(stream):
            if binding.error:
                raise ConfigError(f"{path}:{binding.original.line}: cannot parse {binding.original.string.strip()!r}")
            key, value = binding.key, binding.value
            if key is None:
                continue
            where = f"{path}:{binding.original.line}"
            if value is None:
                raise ConfigError(f"{where}: key {key!r} has no value")
            if key.startswith("sweep."):
                parts = key.split(".")
                if len(parts) != 3 or parts[2] not in SWEEP_KEYS:
                    raise ConfigError(f"{where}: unknown sweep key {key!r}; fields are {', '.join(SWEEP_KEYS)}")
                sweeps.setdefault(parts[1], {})[parts[2]] = value.strip()
            elif key in SystemParams.model_fields or key == "tau_detector":
                system[key] = value.strip()
            else:
                raise ConfigError(f"{where}: unknown key {key!r}")

    try:
        params = _prescribed(system, path) if "tau_detector" in system else SystemParams.model_validate(system)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {describe_validation(exc)}") from exc

    specs = []
    for name, raw in sweeps.items():
        try:
            specs.append(SweepSpec.model_validate(_sweep_fields(name, raw)))
        except ValidationError as exc:
            raise ConfigError(f"{path}: sweep {name!r}: {describe_validation(exc)}") from exc
        except ValueError as exc:
            raise ConfigError(f"{path}: sweep {name!r}: {exc}") from exc
    logger.info(f"loaded {path} with {len(specs)} sweeps")
    return params, specs


# --- sweeps --------------------------------------------------------------


def _point(
    base: SystemParams,
    spec: SweepSpec,
    scheme: SchemeSpec,
    value: float,
) -> tuple[SystemParams, SchemeSpec, int | None]:
    n_active = None if spec.n_active == "full" else spec.n_active
    variable = spec.variable
    if variable in SystemParams.model_fields:
        values = base.model_dump()
        values[variable] = int(round(value)) if SystemParams.model_fields[variable].annotation is int else value
        try:
            params = network_model.apply_timing(values, spec.timing)
        except ValidationError as exc:
            raise ConfigError(f"sweep {spec.name!r} at {variable}={value:g}: {describe_validation(exc)}") from exc
        return params, scheme, n_active
    if variable == "n_active":
        return base, scheme, int(round(value))
    if variable == "weight":
        return base, scheme.model_copy(update={"weight": int(round(value))}), n_active
    if variable == "listen_periods":
        return base, scheme.model_copy(update={"listen_periods": int(round(value))}), n_active
    wdm = scheme.wdm or WdmParams()
    update = {"n_channels": int(round(value))} if variable == "n_channels" else {"alpha_xt": value}
    return base, scheme.model_copy(update={"wdm": WdmParams(**{**wdm.model_dump(), **update})}), n_active


def _evaluate_point(
    params: SystemParams,
    scheme: SchemeSpec,
    n_active: int | None,
    value: float,
    ignore_capacity: bool,
    label: str,
) -> SweepRow:
    active = params.n_star if n_active is None else n_active
    report = mac_rates.evaluate(params, scheme, active, ignore_capacity=ignore_capacity)
    return SweepRow(
        scheme=label,
        value=value,
        per_user_rate=report.per_user_rate,
        total_rate=report.total_rate,
        per_user_bits_per_frame=report.per_user_bits_per_frame,
        total_bits_per_frame=report.total_bits_per_frame,
        y0=report.y0_used,
        q_mu=report.breakdown.q_mu,
        e_mu=report.breakdown.e_mu,
    )


def run_sweep(
    base: SystemParams,
    spec: SweepSpec,
    ignore_capacity: bool = False,
    parallel: int | None = None,
    label_suffix: str = "",
    column_scale: float = 1.0,
) -> list[SweepRow]:
    """Evaluate every scheme at every sweep point; rows come back sorted by sweep value."""
    parallel = parallel or settings.PARALLEL
    tasks = []
    for value in spec.points():
        for scheme in spec.schemes:
            params, point_scheme, n_active = _point(base, spec, scheme, value)
            tasks.append((params, point_scheme, n_active, value * column_scale, ignore_capacity, point_scheme.label + label_suffix))
    logger.info(f"sweep {spec.name!r}: {len(tasks)} points over {spec.variable}")
    if parallel > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as executor:
            rows = list(executor.map(_evaluate_point, *zip(*tasks)))
    else:
        rows = [_evaluate_point(*task) for task in tasks]
    return sorted(rows, key=lambda row: row.value)


# --- figure presets ------------------------------------------------------


class Scenario(BaseModel):
    """A named figure reproduction: one sweep, possibly over several parameter variants."""

    model_config = ConfigDict(frozen=True)

    name: str
    description: str
    sweep: SweepSpec
    column: str
    variants: tuple[tuple[str, dict[str, float]], ...] = (("", {}),)
    base: dict[str, float] = {}
    ignore_capacity: bool = False
    column_scale: float = 1.0


CODE_LENGTHS = (16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0)
COMPARED = ("tdma", "cdma:1", "lbs:500")


def _schemes(*texts: str) -> tuple[SchemeSpec, ...]:
    return tuple(SchemeSpec.parse(text) for text in texts)


SCENARIOS: dict[str, Scenario] = {
    scenario.name: scenario
    for scenario in (
        Scenario(
            name="fig5a",
            description="rate per user vs active pairs, TDMA and CDMA w = 1, 2, 3 (codes assumed for all users)",
            sweep=SweepSpec(name="fig5a", variable="n_active", values=ValueRange(start=1, stop=16, step=1),
                            schemes=_schemes("tdma", "cdma:1", "cdma:2", "cdma:3")),
            column="n_active",
            ignore_capacity=True,
        ),
        Scenario(
            name="fig5b",
            description="rate per user vs active pairs, LBS with k = 0, 100, 500, 1000 listening periods",
            sweep=SweepSpec(name="fig5b", variable="n_active", values=ValueRange(start=1, stop=16, step=1),
                            schemes=_schemes("lbs:0", "lbs:100", "lbs:500", "lbs:1000", "tdma")),
            column="n_active",
        ),
        Scenario(
            name="fig6a",
            description="rate per user vs code length with 1 ns chips and T = N_c * T_c",
            sweep=SweepSpec(name="fig6a", variable="n_chips", values=CODE_LENGTHS,
                            schemes=_schemes(*COMPARED), n_active=16, timing="fixed_chip"),
            column="n_chips",
        ),
        Scenario(
            name="fig6b",
            description="rate per user vs code length with T = 16 ns and T_c = T / N_c, B_opt = 1 / T_c",
            sweep=SweepSpec(name="fig6b", variable="n_chips", values=CODE_LENGTHS,
                            schemes=_schemes(*COMPARED), n_active=16, timing="fixed_frame"),
            column="n_chips",
        ),
        Scenario(
            name="fig7",
            description="rate vs star coupler size at N_A = N and code length 128",
            sweep=SweepSpec(name="fig7", variable="n_star", values=(4.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0),
                            schemes=_schemes(*COMPARED)),
            column="n_star",
            base={"n_chips": 128, "frame_t": 128.0},
        ),
        Scenario(
            name="fig8",
            description="rate per user vs path loss (splitting excluded) at nominal and 1000x crosstalk",
            sweep=SweepSpec(name="fig8", variable="path_loss_db", values=ValueRange(start=0, stop=40, step=2),
                            schemes=_schemes(*COMPARED)),
            column="path_loss_db",
            variants=(("", {}), ("[xtalk*1000]", {"gamma_xtalk": 8e-5})),
        ),
        Scenario(
            name="fig10",
            description="WDM-TDMA rate per user vs total users M = 16 W at 30 dB and 20 dB isolation",
            sweep=SweepSpec(name="fig10", variable="n_channels", values=ValueRange(start=1, stop=64, step=1),
                            schemes=_schemes("wdm:1:1e-3:tdma", "wdm:1:1e-2:tdma")),
            column="total_users",
            column_scale=16.0,
        ),
    )
}


def run_scenario(name: str, parallel: int | None = None) -> tuple[str, list[SweepRow]]:
    """Rows of a named figure preset and the name of its sweep column."""
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    scenario = SCENARIOS[name]
    rows: list[SweepRow] = []
    for suffix, overrides in scenario.variants:
        base = SystemParams.model_validate({**network_model.nominal_params().model_dump(), **scenario.base, **overrides})
        rows.extend(run_sweep(
            base,
            scenario.sweep,
            ignore_capacity=scenario.ignore_capacity,
            parallel=parallel,
            label_suffix=suffix,
            column_scale=scenario.column_scale,
        ))
    logger.info(f"scenario {name}: {len(rows)} rows")
    return scenario.column, sorted(rows, key=lambda row: row.value)


# --- output --------------------------------------------------------------


def _fmt(value: float) -> str:
    return SIGNIFICANT.format(value)


def _columns(column: str, per_frame: bool) -> list[str]:
    rates = ["per_user_bits_per_frame", "total_bits_per_frame"] if per_frame else ["per_user_rate_bps", "total_rate_bps"]
    return ["scheme", column, *rates, "y0", "q_mu", "e_mu"]


def _cells(row: SweepRow, per_frame: bool) -> list[str]:
    rates = (row.per_user_bits_per_frame, row.total_bits_per_frame) if per_frame else (row.per_user_rate, row.total_rate)
    return [row.scheme, _fmt(row.value), *(_fmt(rate) for rate in rates), _fmt(row.y0), _fmt(row.q_mu), _fmt(row.e_mu)]


def format_rows(rows: Iterable[SweepRow], column: str, fmt: str = "csv", per_frame: bool = False) -> str:
    """CSV (header, LF endings) or blank-line separated ``key: value`` blocks, 6 significant digits."""
    header = _columns(column, per_frame)
    buffer = io.StringIO()
    if fmt == "csv":
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(_cells(row, per_frame))
        return buffer.getvalue()
    if fmt != "keyvalue":
        raise ConfigError(f"unknown output format {fmt!r}; use csv or keyvalue")
    blocks = ["\n".join(f"{key}: {cell}" for key, cell in zip(header, _cells(row, per_frame))) for row in rows]
    return "\n\n".join(blocks) + "\n"


def run_mc(cfg: McConfig, sensing: bool = False, parallel: int | None = None) -> tuple[McResult, dict[str, Any]]:
    """Run the oracle for cfg and put it next to the analytical model."""
    if sensing:
        result = mc_oracle.simulate_lbs_sensing(cfg, parallel=parallel)
    else:
        result = mc_oracle.simulate_interferers(cfg, parallel=parallel)
    return result, mc_oracle.model_comparison(cfg, result)


def format_mc(cfg: McConfig, result: McResult, comparison: dict[str, Any], sensing: bool = False) -> str:
    """McResult and its analytical counterparts as ``key: value`` lines."""
    values: dict[str, Any] = {
        "scheme": cfg.scheme.label,
        "mode": "lbs-sensing" if sensing else cfg.mode,
        "trials": result.trials,
        "seed": cfg.seed,
        "n_active": cfg.n_active,
        "empirical_rate_bps": result.empirical_rate,
        "empirical_rate_stderr_bps": result.empirical_rate_stderr,
        "collision_freq": result.collision_freq,
        "collision_ci_low": result.collision_ci[0],
        "collision_ci_high": result.collision_ci[1],
        "freq_m0": result.frequencies()[0],
        **comparison,
        "histogram": ",".join(str(count) for count in result.interferer_histogram),
    }
    lines = []
    for key, value in values.items():
        if isinstance(value, float):
            value = _fmt(value)
        elif isinstance(value, bool):
            value = str(value).lower()
        lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def format_histogram(result: McResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["m", "count", "frequency"])
    for m, (count, freq) in enumerate(zip(result.interferer_histogram, result.frequencies())):
        writer.writerow([m, count, _fmt(freq)])
    return buffer.getvalue()
