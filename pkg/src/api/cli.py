"""Command-line surface: figure presets, config-driven sweeps, Monte Carlo, codes and WDM capacity."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from pydantic import ValidationError

from ..core.config import settings
from ..core.errors import ConfigError, QkdNetError
from ..core.log import configure_logging
from ..models.mc import McConfig
from ..models.params import SystemParams
from ..models.rates import SchemeSpec
from ..services import decoy_rate, mac_rates, network_model, ooc_codes, sweeps

logger = logging.getLogger(__name__)

GLOBAL_DEFAULTS = {
    "output": None,
    "format": None,
    "seed": None,
    "trials": None,
    "parallel": None,
    "per_frame": False,
    "log_level": None,
}


def _global_options() -> argparse.ArgumentParser:
    # SUPPRESS lets the same flags appear before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", default=argparse.SUPPRESS, help="Write results to this file instead of stdout")
    common.add_argument("--format", choices=("csv", "keyvalue"), default=argparse.SUPPRESS, help="Table format")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="Monte Carlo seed")
    common.add_argument("--trials", type=int, default=argparse.SUPPRESS, help="Monte Carlo frames")
    common.add_argument("--parallel", type=int, default=argparse.SUPPRESS, help="Worker processes")
    common.add_argument("--per-frame", action="store_true", default=argparse.SUPPRESS,
                        help="Report rates in bits/frame instead of bits/s")
    common.add_argument("--log-level", default=argparse.SUPPRESS, help="DEBUG, INFO, WARNING or ERROR")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(
        prog="qkdnet",
        description="Secret-key rates of decoy-state QKD star networks under TDMA, CDMA, LBS and WDM.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("scenario", parents=[common], help="Reproduce a figure as CSV.")
    s.add_argument("name", choices=sorted(sweeps.SCENARIOS))

    w = sub.add_parser("sweep", parents=[common], help="Run the sweeps of a scenario file.")
    w.add_argument("config", type=Path)
    w.add_argument("--only", default=None, help="Run only the sweep with this name")
    w.add_argument("--ignore-capacity", action="store_true", help="Skip OOC family feasibility checks")

    m = sub.add_parser("mc", parents=[common], help="Monte Carlo check of the interference model.")
    m.add_argument("--scheme", default="cdma", help="tdma, cdma[:w], lbs[:k] or wdm:<W>:<alpha_xt>:<inner>")
    m.add_argument("--w", type=int, default=1, help="Code weight when --scheme is a bare cdma")
    m.add_argument("--k", type=int, default=0, help="Listening periods when --scheme is a bare lbs")
    m.add_argument("--mode", choices=("bernoulli-model", "code-level"), default="bernoulli-model")
    m.add_argument("--sensing", action="store_true", help="Simulate LBS sensing pair by pair")
    m.add_argument("--n-active", type=int, default=None, help="Active pairs (default: star size)")
    m.add_argument("--config", type=Path, default=None, help="Scenario file with SystemParams")
    m.add_argument("--ignore-capacity", action="store_true", help="Let CDMA pairs share codes beyond the family size")
    m.add_argument("--histogram", type=Path, default=None, help="Also write the histogram as CSV")

    c = sub.add_parser("codes", parents=[common], help="Generate an OOC family.")
    c.add_argument("n_chips", type=int)
    c.add_argument("w", type=int)
    c.add_argument("count", type=int)

    x = sub.add_parser("maxw", parents=[common], help="Largest WDM channel count with positive rate.")
    x.add_argument("alpha_xt_db", type=float, help="Channel isolation in dB (20 means alpha_xt = 1e-2)")
    x.add_argument("--scheme", default="tdma", help="Inner scheme of each PON")
    x.add_argument("--w-max", type=int, default=None)
    x.add_argument("--config", type=Path, default=None)

    u = sub.add_parser("mu", parents=[common], help="Mean photon number maximising the key rate.")
    u.add_argument("--config", type=Path, default=None)
    u.add_argument("--lower", type=float, default=0.01)
    u.add_argument("--upper", type=float, default=decoy_rate.MU_UPPER_LIMIT)
    return parser


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    return args


def _emit(text: str, output: str | Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    Path(output).write_text(text, encoding="utf-8", newline="\n")
    logger.info(f"wrote {output}")


def _params(config: Path | None) -> SystemParams:
    if config is None:
        return network_model.nominal_params()
    params, _ = sweeps.load_config(config)
    return params


def _scheme(text: str, w: int = 1, k: int = 0) -> SchemeSpec:
    bare = text.strip().lower()
    if bare == "cdma":
        text = f"cdma:{w}"
    elif bare == "lbs":
        text = f"lbs:{k}"
    try:
        return SchemeSpec.parse(text)
    except (ValueError, ValidationError) as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_scenario(args: argparse.Namespace) -> None:
    column, rows = sweeps.run_scenario(args.name, parallel=args.parallel)
    _emit(sweeps.format_rows(rows, column, args.format or "csv", args.per_frame), args.output)


def _sweep_output(output: Path | None, own: str | None, name: str, count: int) -> Path | str | None:
    # several sweeps into one --output get one file each: out.csv -> out.<name>.csv
    if output is None:
        return own
    output = Path(output)
    if count == 1:
        return output
    return output.with_name(f"{output.stem}.{name}{output.suffix}")


def _cmd_sweep(args: argparse.Namespace) -> None:
    params, specs = sweeps.load_config(args.config)
    if args.only is not None:
        specs = [spec for spec in specs if spec.name == args.only]
        if not specs:
            raise ConfigError(f"no sweep named {args.only!r} in {args.config}")
    if not specs:
        raise ConfigError(f"{args.config} defines no sweeps")
    for spec in specs:
        rows = sweeps.run_sweep(params, spec, ignore_capacity=args.ignore_capacity, parallel=args.parallel)
        text = sweeps.format_rows(rows, spec.variable, args.format or spec.format, args.per_frame)
        _emit(text, _sweep_output(args.output, spec.output, spec.name, len(specs)))


def _cmd_mc(args: argparse.Namespace) -> None:
    params = _params(args.config)
    try:
        cfg = McConfig(
            trials=args.trials or settings.DEFAULT_TRIALS,
            seed=settings.DEFAULT_SEED if args.seed is None else args.seed,
            mode=args.mode,
            scheme=_scheme(args.scheme, args.w, args.k),
            params=params,
            n_active=args.n_active or params.n_star,
            ignore_capacity=args.ignore_capacity,
        )
    except ValidationError as exc:
        raise ConfigError(sweeps.describe_validation(exc)) from exc
    result, comparison = sweeps.run_mc(cfg, sensing=args.sensing, parallel=args.parallel)
    _emit(sweeps.format_mc(cfg, result, comparison, sensing=args.sensing), args.output)
    if args.histogram is not None:
        _emit(sweeps.format_histogram(result), args.histogram)


def _cmd_codes(args: argparse.Namespace) -> None:
    family = ooc_codes.generate_family(args.n_chips, args.w, args.count)
    _emit("".join(f"{code}\n" for code in family.codes), args.output)


def _cmd_maxw(args: argparse.Namespace) -> None:
    params = _params(args.config)
    alpha_xt = 10.0 ** (-args.alpha_xt_db / 10.0)
    inner = _scheme(args.scheme)
    channels = mac_rates.max_wdm_channels(params, alpha_xt, inner, args.w_max)
    lines = [
        f"alpha_xt: {alpha_xt:.6g}",
        f"inner: {inner.label}",
        f"max_channels: {channels}",
        f"total_users: {channels * params.n_star}",
    ]
    _emit("\n".join(lines) + "\n", args.output)


def _cmd_mu(args: argparse.Namespace) -> None:
    params = _params(args.config)
    inputs = network_model.decoy_inputs(params, network_model.y_tdma(params))
    mu_star = decoy_rate.optimize_mu(inputs, args.lower, args.upper)
    best = decoy_rate.key_bits_per_pulse(inputs.model_copy(update={"mu": mu_star}))
    _emit(f"mu: {mu_star:.6g}\nbits_per_frame: {best:.6g}\n", args.output)


COMMANDS = {
    "scenario": _cmd_scenario,
    "sweep": _cmd_sweep,
    "mc": _cmd_mc,
    "codes": _cmd_codes,
    "maxw": _cmd_maxw,
    "mu": _cmd_mu,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand; returns 0, 2 (config), 3 (model domain) or 4 (internal)."""
    args = parse_args(argv)
    configure_logging(args.log_level)
    try:
        COMMANDS[args.cmd](args)
    except QkdNetError as exc:
        logger.error(str(exc))
        return exc.exit_code
    except ValidationError as exc:
        logger.error(sweeps.describe_validation(exc))
        return ConfigError.exit_code
    except Exception as exc:
        logger.exception(f"unexpected failure: {exc}")
        return 4
    return 0
