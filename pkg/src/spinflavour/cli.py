"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure or
unwritable output.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace

from .core import DegenerateAngleError, eigenfrequencies
from .scenario import (
    ConfigError,
    InvariantViolation,
    figure_datasets,
    load_config,
    paper_config,
    run,
    write_timeseries,
)
from .validation import FAULTS, run_all

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _error(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _load(path):
    return paper_config() if path is None else load_config(path)


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.format:
        cfg = replace(cfg, output_format=args.format)
    result = run(cfg)
    write_timeseries(result.reports, args.out, cfg.output_format)
    return EXIT_OK


def _cmd_figures(args) -> int:
    result = run(_load(args.config))
    for path in figure_datasets(result.reports, args.outdir):
        print(path)
    return EXIT_OK


def _cmd_validate(args) -> int:
    results = run_all(quick=args.quick, fault=args.inject_fault)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


def _cmd_print_params(args) -> int:
    cfg = _load(args.config)
    p = cfg.params()
    out = {"config": cfg.to_json(), "dimensionless": asdict(p)}
    out["dimensionless"]["omega_n_bar"] = p.omega_n_bar
    try:
        ef = eigenfrequencies(p)
        out["levels"] = ef.levels.tolist()
    except (ValueError, DegenerateAngleError):
        pass
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinflavour",
        description="Spin-flavour neutrino entropies under a fluctuating magnetic field.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario and write the entropy time series")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("figures", help="write fig1..fig7 datasets")
    p.add_argument("--config", metavar="PATH", help="defaults to the built-in reference scenario")
    p.add_argument("--outdir", required=True, metavar="PATH")
    p.set_defaults(func=_cmd_figures)

    p = sub.add_parser("validate", help="run the acceptance checks")
    p.add_argument("--quick", action="store_true", help="skip the RK4 oracle sweep")
    p.add_argument("--inject-fault", choices=FAULTS, help=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("print-params", help="show the resolved dimensionless parameters")
    p.add_argument("--config", metavar="PATH")
    p.set_defaults(func=_cmd_print_params)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _error(str(exc), EXIT_CONFIG)
    except InvariantViolation as exc:
        return _error(str(exc), EXIT_NUMERIC)
    except OSError as exc:
        return _error(f"cannot write output: {exc}", EXIT_NUMERIC)
    except (ValueError, ArithmeticError, DegenerateAngleError) as exc:
        return _error(str(exc), EXIT_NUMERIC)


if __name__ == "__main__":
    sys.exit(main())
