"""Command line interface.

Subcommands run one job each (`greens`, `ldt`, `dk`, `paving`, `localize`,
`orbit`), `sweep --config <path>` runs the configured job set, and `budget`
prints the admissible-coupling record.  Flags mirror config keys and
override them.  Exit codes: 0 pass, 1 assertion failure, 2 usage/config
error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict

from .config import JOBS, ConfigError, _parse_lines, make_config
from .model import epsilon_budget
from .sweep import run_sweep

_FLAG_KEYS = ("omega", "A", "rho", "eps", "E_list", "N_list", "M_rule",
              "grid", "C0", "seed", "threads", "out_dir")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    for key in _FLAG_KEYS:
        p.add_argument(f"--{key}", default=None, help=f"override config key {key}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="marylab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for job in JOBS:
        p = sub.add_parser(job, help=f"run the {job} job")
        _add_config_flags(p)
    p = sub.add_parser("sweep", help="run the configured job set")
    p.add_argument("--config", default=None, help="path to a key=value config file")
    p.add_argument("--jobs", default=None, help="comma-separated job subset")
    _add_config_flags(p)
    p = sub.add_parser("budget", help="print the admissible-coupling record")
    _add_config_flags(p)
    return parser


def _collect(args: argparse.Namespace) -> dict[str, str]:
    overrides: dict[str, str] = {}
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path) as fh:
            overrides.update(_parse_lines(fh.read()))
    for key in _FLAG_KEYS + ("jobs",):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    return overrides


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = _collect(args)
        if args.command in JOBS:
            overrides["jobs"] = args.command
        cfg = make_config(overrides)
    except (ConfigError, OSError) as exc:
        print(f"marylab: {exc}", file=sys.stderr)
        return 2

    if args.command == "budget":
        budget = epsilon_budget(cfg.rho, cfg.symbol())
        for key, value in asdict(budget).items():
            print(f"{key} = {value}")
        return 0
    return run_sweep(cfg)


if __name__ == "__main__":
    sys.exit(main())
