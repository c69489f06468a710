"""Experiment orchestration: configuration, per-budget runs and CSV output.

One :class:`ExperimentConfig` describes a target, a coefficient method and a
list of coefficient budgets.  :func:`run_experiment` computes coefficients
once (dual, canonical, least squares) or once per budget (OMP), keeps the
largest ``N`` and reports the reconstruction error on the interest grid.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import ErrorReport, IntervalSetup, build_setup, reconstruct, relative_error
from .bspline import make_bspline
from .gabor import (
    GaborSystem,
    canonical_dual,
    check_dual_parameters,
    check_frame_parameters,
    covering_shifts,
    dual_window,
    modulation_range,
    sample_frame,
)
from .sparse import (
    CoefficientVector,
    analyze_with_dual,
    least_squares,
    omp,
    omp_functional,
    truncate_top_n,
)
from .targets import CylinderScatteringField, PointSourceField, TargetField

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunArtifacts",
    "run_experiment",
    "emit_summary_table",
    "emit_table1",
    "default_summary_configs",
    "OUT_ENV",
]

log = logging.getLogger(__name__)

TARGETS = ("cylinder", "point-source")
METHODS = ("dual1", "dual2", "canonical", "least-squares", "omp", "omp-functional")
OUT_ENV = "BSFRAMES_OUT"
SUMMARY_BUDGETS = (60, 120, 240)


class ConfigError(ValueError):
    """An experiment configuration that cannot be run."""


@dataclass(frozen=True)
class ExperimentConfig:
    target: str = "cylinder"
    k: float = 5.0
    order: int = 2
    a: float = 1.0
    b: float = 1.0 / 3.0
    L: float = 3.0
    P: int = 601
    method: str = "dual2"
    blocksize: int = 20
    budgets: tuple[int, ...] = SUMMARY_BUDGETS
    extend: bool = True
    tolerance: float = 0.0
    out: str | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "budgets", tuple(int(n) for n in self.budgets))
        self.validate()

    def validate(self) -> None:
        if self.target not in TARGETS:
            raise ConfigError(f"unknown target {self.target!r}; choose from {', '.join(TARGETS)}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.order < 1:
            raise ConfigError("window order must be >= 1")
        if self.k <= 0 or self.L <= 0:
            raise ConfigError("wavenumber and interval length must be positive")
        if self.P < 2:
            raise ConfigError("need at least two samples")
        if self.blocksize < 1:
            raise ConfigError("blocksize must be >= 1")
        if not self.budgets or min(self.budgets) < 1:
            raise ConfigError("budgets must be positive integers")
        if self.tolerance < 0:
            raise ConfigError("tolerance must be nonnegative")
        if not check_frame_parameters(self.order, self.a, self.b):
            raise ConfigError(
                f"frame bound violated: N_{self.order} needs 0 < a <= {self.order} and "
                f"0 < b <= 1/{self.order}, got a = {self.a:g}, b = {self.b:g}"
            )
        if self.method in ("dual1", "dual2") and not check_dual_parameters(self.order, self.b):
            raise ConfigError(
                f"dual window bound violated: {self.method} for N_{self.order} needs "
                f"0 < b <= 1/{2 * self.order - 1}, got b = {self.b:g}"
            )

    @property
    def label(self) -> str:
        method = self.method
        if method.startswith("omp"):
            method = f"{method}{self.blocksize}"
        ext = "" if self.extend else "_noext"
        return f"{self.target}_k{self.k:g}_{method}{ext}"


@dataclass(eq=False)
class RunArtifacts:
    config: ExperimentConfig
    reports: dict[int, ErrorReport]
    coefficients: CoefficientVector
    setup: IntervalSetup
    files: list[Path] = field(default_factory=list)

    def averages(self) -> list[float]:
        return [self.reports[n].average for n in self.config.budgets]


def make_target(config: ExperimentConfig) -> TargetField:
    if config.target == "cylinder":
        fld = CylinderScatteringField(config.k)
    else:
        fld = PointSourceField(config.k)
    return TargetField(fld, config.L)


def make_system(config: ExperimentConfig) -> GaborSystem:
    window = make_bspline(config.order)
    dx = config.L / (config.P - 1)
    shifts = covering_shifts(window.support, config.a, 0.0, config.L)
    return GaborSystem(window, config.a, config.b, shifts, modulation_range(config.b, dx))


def _dual_coefficients(config, system, target):
    h = dual_window(config.method, config.order, config.b)
    setup = build_setup(config.L, config.P, h, system)
    f = target(setup.grid)
    if not config.extend:
        # the target is only known on [0, L]; pad with zeros elsewhere
        f = np.where(setup.mask, f, 0.0)
    dual = sample_frame(system.with_window(h), setup.grid)
    return setup, analyze_with_dual(f, dual)


def _global_coefficients(config, system, target):
    # grid covering every sampled atom, so the frame operator sees whole atoms
    setup = build_setup(config.L, config.P, system.window, system, extend=config.extend)
    frame = sample_frame(system, setup.grid)
    f = target(setup.grid)
    if config.method == "canonical":
        return setup, analyze_with_dual(f, canonical_dual(frame))
    return setup, least_squares(frame, f)


def run_experiment(config: ExperimentConfig, out: str | os.PathLike | None = None) -> RunArtifacts:
    """Compute coefficients, truncate to each budget and measure the error on ``[0, L]``.

    Output files are written when ``out`` (or ``config.out``) is set.
    """
    config.validate()
    system = make_system(config)
    target = make_target(config)

    if config.method in ("dual1", "dual2"):
        setup, full = _dual_coefficients(config, system, target)
    elif config.method in ("canonical", "least-squares"):
        setup, full = _global_coefficients(config, system, target)
    else:
        setup, full = build_setup(config.L, config.P), None

    frame = sample_frame(system, setup.grid)
    f_ref = target(setup.interest_grid)
    reports: dict[int, ErrorReport] = {}
    kept: dict[int, CoefficientVector] = {}
    for n in config.budgets:
        if full is None:
            iterations = math.ceil(n / config.blocksize)
            if config.method == "omp":
                c = omp(frame, f_ref, config.blocksize, iterations, config.tolerance)
            else:
                c = omp_functional(system, target, config.blocksize, iterations, config.tolerance)
        else:
            c = full
        c = truncate_top_n(c, min(n, len(c)))
        kept[n] = c
        approx = reconstruct(frame, c, setup.interest)
        reports[n] = relative_error(f_ref, approx, c.nonzero, config.label)

    coefficients = full if full is not None else kept[max(config.budgets)]
    artifacts = RunArtifacts(config, reports, coefficients, setup)
    target_dir = out if out is not None else config.out
    if target_dir is not None:
        artifacts.files = write_run_files(artifacts, Path(target_dir), f_ref, kept, frame)
    return artifacts


def _fmt(v: float) -> str:
    return repr(float(v))


def write_run_files(art: RunArtifacts, out: Path, f_ref, kept, frame) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    cfg, setup = art.config, art.setup
    x = setup.interest_grid
    files = []
    for n, c in kept.items():
        approx = reconstruct(frame, c, setup.interest)
        err = art.reports[n].pointwise
        path = out / f"{cfg.label}_N{n}_errors.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "re_ref", "im_ref", "re_approx", "im_approx", "rel_err"])
            for row in zip(x, f_ref.real, f_ref.imag, approx.real, approx.imag, err):
                w.writerow([_fmt(v) for v in row])
        files.append(path)

    mags, order = art.coefficients.sorted_magnitudes()
    path = out / f"{cfg.label}_coefficients.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "m", "n", "abs_coeff"])
        for rank, (i, mag) in enumerate(zip(order, mags), start=1):
            if mag == 0:
                break
            w.writerow([rank, int(art.coefficients.m[i]), int(art.coefficients.n[i]), _fmt(mag)])
    files.append(path)

    path = out / f"{cfg.label}_summary.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["budget", "coefficients", "average", "maximum", "l2_ratio"])
        for n in cfg.budgets:
            r = art.reports[n]
            w.writerow([n, r.coefficients, _fmt(r.average), _fmt(r.maximum), _fmt(r.l2_ratio)])
    files.append(path)

    files.append(write_plot_script(out, cfg.label, cfg.budgets))
    return files


_PLOT_SCRIPT = '''"""Plot the CSV output of run {label!r}.  Usage: python {name}"""
import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
label = {label!r}
budgets = {budgets!r}


def read(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {{key: [float(r[key]) for r in rows] for key in rows[0]}}


fig, ax = plt.subplots(figsize=(6, 4))
for n in budgets:
    d = read(here / f"{{label}}_N{{n}}_errors.csv")
    ax.semilogy(d["x"], d["rel_err"], label=f"{{n}} coefficients")
ax.set_xlabel("x")
ax.set_ylabel("relative error")
ax.legend()
fig.tight_layout()
fig.savefig(here / f"{{label}}_errors.png", dpi=150)

d = read(here / f"{{label}}_coefficients.csv")
fig, ax = plt.subplots(figsize=(6, 4))
ax.semilogy(d["rank"], d["abs_coeff"], ".", ms=3)
ax.set_xlabel("rank")
ax.set_ylabel("|coefficient|")
fig.tight_layout()
fig.savefig(here / f"{{label}}_coefficients.png", dpi=150)
'''


def write_plot_script(out: Path, label: str, budgets) -> Path:
    """A standalone matplotlib script that turns the run's CSVs into PNGs."""
    name = f"plot_{label}.py".replace("-", "_")
    path = Path(out) / name
    path.write_text(_PLOT_SCRIPT.format(label=label, name=name, budgets=tuple(budgets)))
    return path


def default_summary_configs(**overrides) -> list[ExperimentConfig]:
    """The 8 cells of the summary grid: targets x wavenumbers {5, 15} x {dual2, omp(20)}."""
    configs = []
    for k in (5.0, 15.0):
        for method in ("dual2", "omp"):
            for target in TARGETS:
                base = dict(target=target, k=k, method=method, blocksize=20,
                            budgets=SUMMARY_BUDGETS)
                base.update(overrides)
                configs.append(ExperimentConfig(**base))
    return configs


def _method_label(cfg: ExperimentConfig) -> str:
    return f"{cfg.method.upper()}({cfg.blocksize})" if cfg.method.startswith("omp") else cfg.method.capitalize()


def emit_summary_table(configs=None, out: str | os.PathLike | None = None,
                       write_cells: bool = False) -> tuple[Path | None, dict]:
    """Run every config and write ``summary_table.csv``.

    Rows are ``(k, method)``; columns hold the average relative error for
    each target and budget.  A failing cell is logged and recorded as NaN.
    Returns the CSV path (``None`` without ``out``) and
    ``{(target, k, method_label): averages}``.
    """
    configs = default_summary_configs() if configs is None else list(configs)
    results: dict[tuple[str, float, str], list[float]] = {}
    for cfg in configs:
        key = (cfg.target, cfg.k, _method_label(cfg))
        try:
            art = run_experiment(cfg, out if write_cells else None)
            results[key] = art.averages()
        except Exception as exc:  # noqa: BLE001 - one bad cell must not stop the grid
            log.error("cell %s failed: %s", cfg.label, exc)
            results[key] = [math.nan] * len(cfg.budgets)
        log.info("%s: %s", cfg.label, " ".join(f"{v:.2e}" for v in results[key]))

    if out is None:
        return None, results
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    targets = list(dict.fromkeys(t for t, _, _ in results))
    rows = list(dict.fromkeys((k, m) for _, k, m in results))
    budgets = configs[0].budgets if configs else SUMMARY_BUDGETS
    path = out / "summary_table.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "method"] + [f"{t}_{n}" for t in targets for n in budgets])
        for k, m in rows:
            cells = []
            for t in targets:
                vals = results.get((t, k, m), [math.nan] * len(budgets))
                cells.extend(f"{v:.6e}" for v in vals)
            w.writerow([f"{k:g}", m] + cells)
    return path, results


# name used by the public interface contract
emit_table1 = emit_summary_table

