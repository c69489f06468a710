"""Command-line runner.

``bsframes run`` runs one configuration, ``bsframes table`` the 8-cell
summary grid.  Settings come from defaults, then an optional INI file
(``[experiment]`` section), then command-line flags.  The output directory
falls back to ``$BSFRAMES_OUT`` and then ``./bsframes-out``.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import os
import sys
from pathlib import Path

from .experiment import (
    OUT_ENV,
    ConfigError,
    ExperimentConfig,
    default_summary_configs,
    emit_summary_table,
    run_experiment,
)

log = logging.getLogger("bsframes")

DEFAULT_OUT = "bsframes-out"

_INI_TYPES = {
    "target": str, "k": float, "order": int, "a": float, "b": float, "L": float, "P": int,
    "method": str, "blocksize": int, "budgets": str, "extend": bool, "tolerance": float,
    "out": str, "seed": int,
}


def _parse_budgets(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"budgets must be integers, got {text!r}") from None


def _parse_fraction(text: str) -> float:
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def read_config_file(path: str | os.PathLike, section: str = "experiment") -> dict:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep L and P upper case
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path}")
    if section not in parser:
        raise ConfigError(f"config file {path} has no [{section}] section")
    values = {}
    for key, raw in parser[section].items():
        kind = _INI_TYPES.get(key)
        if kind is None:
            raise ConfigError(f"unknown config key {key!r}")
        if key == "budgets":
            values[key] = _parse_budgets(raw)
        elif kind is bool:
            values[key] = parser[section].getboolean(key)
        elif key == "b":
            values[key] = _parse_fraction(raw)
        else:
            try:
                values[key] = kind(raw)
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with an [experiment] section")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    common.add_argument("--figures", action="store_true", help="also render PNGs (needs matplotlib)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="bsframes", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run one configuration")
    run.add_argument("--target", choices=["cylinder", "point-source"])
    run.add_argument("--k", type=float, help="wavenumber")
    run.add_argument("--method",
                     choices=["dual1", "dual2", "canonical", "least-squares", "omp", "omp-functional"])
    run.add_argument("--blocksize", type=int)
    run.add_argument("--budgets", help="comma-separated coefficient budgets, e.g. 60,120,240")
    run.add_argument("--order", type=int, help="B-spline order")
    run.add_argument("--a", type=float, help="shift step")
    run.add_argument("--b", type=_parse_fraction, help="modulation step, e.g. 1/3")
    run.add_argument("--no-extend", dest="extend", action="store_const", const=False,
                     help="zero-pad the target instead of extending the interval")

    table = sub.add_parser("table", parents=[common], help="run the 8-cell summary grid")
    table.add_argument("--cells", action="store_true", help="also write per-cell CSVs")
    return p


def _resolve_out(args, file_values: dict) -> Path:
    out = args.out or file_values.get("out") or os.environ.get(OUT_ENV) or DEFAULT_OUT
    return Path(out)


def _config_from(args) -> tuple[ExperimentConfig, Path]:
    values = read_config_file(args.config) if args.config else {}
    out = _resolve_out(args, values)
    values.pop("out", None)
    for key in ("target", "k", "method", "blocksize", "order", "a", "b", "extend"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if args.budgets is not None:
        values["budgets"] = _parse_budgets(args.budgets)
    return ExperimentConfig(**values), out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            config, out = _config_from(args)
            art = run_experiment(config, out)
            for n in config.budgets:
                r = art.reports[n]
                print(f"{config.label},{n},{r.coefficients},{r.average:.6e},{r.maximum:.6e}")
            if args.figures:
                from .plotting import render_run

                render_run(out, config.label, config.budgets)
        else:
            overrides = read_config_file(args.config) if args.config else {}
            out = _resolve_out(args, overrides)
            for key in ("out", "target", "k", "method", "budgets"):
                overrides.pop(key, None)
            path, _ = emit_summary_table(default_summary_configs(**overrides), out,
                                         write_cells=args.cells)
            print(path.read_text(), end="")
            if args.figures:
                from .plotting import render_summary

                render_summary(path)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
