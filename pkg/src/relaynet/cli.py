"""Command-line front end.

Subcommands ``estimate``, ``sweep``, ``optimize-nc`` and ``validate-dt``.
Every configuration field is available as ``--field-name``; a key = value file
given with ``--config`` supplies values that explicit flags override.
Results are written as CSV next to a JSON manifest (``<out>.manifest.json``).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analytic import DtParams, dt_outage_closed_form
from .config import ConfigError, SimulationConfig
from .engine import AXES, DegeneracyBudgetExceeded, OutageEstimate, chunks, estimate_op, optimize_nc, sweep

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_DEGENERATE, EXIT_DT_MISMATCH = 0, 1, 2, 3, 4

HEADER = (
    "protocol",
    "axis",
    "value",
    "n_r",
    "power_ratio_db",
    "epsilon",
    "nc",
    "trials",
    "outages",
    "op",
    "ci_halfwidth",
    "degenerate",
)

log = logging.getLogger("relaynet")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _num(x) -> str:
    # repr gives the shortest round-trip form and never depends on locale
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x)) if isinstance(x, float) else str(x)


def format_row(e: OutageEstimate) -> list[str]:
    return [
        e.protocol,
        e.axis,
        _num(e.value),
        str(e.n_r),
        _num(float(e.power_ratio_db)),
        _num(float(e.epsilon)),
        _num(e.nc),
        str(e.trials),
        str(e.outages),
        _num(e.op),
        _num(e.ci_halfwidth),
        str(e.degenerate),
    ]


def render_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for e in rows:
        writer.writerow(format_row(e))
    return buf.getvalue()


def load_config_file(path) -> dict:
    """Read ``key = value`` lines; ``#`` and ``;`` start comments."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    parser.read_string("[config]\n" + text)
    return dict(parser["config"])


def parse_config(file=None, overrides=None) -> SimulationConfig:
    """Defaults, then values from ``file``, then ``overrides``."""
    values = load_config_file(file) if file else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return SimulationConfig.from_mapping(values)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="key = value configuration file")
    for f in dataclasses.fields(SimulationConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name in ("trials", "base_seed"):
            continue
        g.add_argument(flag, dest=f.name, default=None, metavar=f.name.upper())
    g.add_argument("--trials", dest="trials", default=None)
    g.add_argument("--seed", "--base-seed", dest="base_seed", default=None, help="base seed; trial k uses seed+k")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relaynet", description="Outage probability of relay protocols in Poisson networks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_config_flags(sub.add_parser("estimate", help="outage probability of each protocol"))
    p = sub.add_parser("sweep", help="outage probability along one parameter axis")
    _add_config_flags(p)
    p.add_argument("--axis", required=True, choices=AXES + ("power_ratio_dB",))
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p = sub.add_parser("optimize-nc", help="outage against the compression variance grid")
    _add_config_flags(p)
    p.add_argument("--grid", help="comma-separated n_c values (default: the configured log grid)")
    _add_config_flags(sub.add_parser("validate-dt", help="direct transmission against its closed form"))
    return parser


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


def _write(args, text: str, config: SimulationConfig, started: str, extra=None) -> None:
    if not args.out:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    manifest = {
        "artifact": "relaynet",
        "version": __version__,
        "command": args.command,
        "config": config.as_dict(),
        "seed_plan": {
            "scheme": "trial k draws from numpy default_rng(base_seed + k)",
            "base_seed": config.base_seed,
            "trials": config.trials,
            "chunks": len(chunks(config)),
            "batch_size": config.batch_size,
        },
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": [str(out)],
        **(extra or {}),
    }
    Path(str(out) + ".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _validate_dt(config: SimulationConfig) -> tuple[str, bool]:
    config = config.replace(protocols=("DT",))
    (e,) = estimate_op(config)
    exact = dt_outage_closed_form(DtParams(config.lambda_s, config.R, config.alpha, config.D))
    ok = e.contains(exact, 3.0)
    report = (
        f"analytic  {exact:.6f}\n"
        f"empirical {e.op:.6f} +/- {e.ci_halfwidth:.6f} (95% Wilson, {e.trials} trials)\n"
        f"3-sigma Wilson band {'contains' if ok else 'MISSES'} the analytic value\n"
    )
    return report, ok


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    names = [f.name for f in dataclasses.fields(SimulationConfig)]
    overrides = {n: getattr(args, n) for n in names}
    try:
        config = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, configparser.Error) as exc:
        print(f"cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    started = datetime.now(timezone.utc).isoformat()
    try:
        if args.command == "estimate":
            _write(args, render_csv(estimate_op(config)), config, started)
        elif args.command == "sweep":
            values = _floats(args.values)
            if not values:
                raise UsageError("--values is empty")
            rows = sweep(config, args.axis, values)
            _write(args, render_csv(rows), config, started, {"axis": args.axis, "values": values})
        elif args.command == "optimize-nc":
            grid = _floats(args.grid) if args.grid else None
            best, estimates, trace = optimize_nc(config, grid)
            chosen = [dataclasses.replace(e, axis="nc_opt", value=e.nc) for e in estimates]
            _write(args, render_csv(trace + chosen), config, started, {"best_nc": best})
            log.info("best n_c = %r", best)
        else:
            report, ok = _validate_dt(config)
            print(report, end="")
            if not ok:
                return EXIT_DT_MISMATCH
    except UsageError as exc:
        print(f"relaynet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DegeneracyBudgetExceeded as exc:
        print(f"numerical degeneracy budget exceeded: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
