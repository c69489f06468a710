"""Render run CSVs to PNG files.  Needs matplotlib, which is imported lazily."""

from __future__ import annotations

import csv
from pathlib import Path

__all__ = ["render_run", "render_summary"]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _read(path: Path) -> dict[str, list[str]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {key: [r[key] for r in rows] for key in (rows[0] if rows else {})}


def render_run(out: Path, label: str, budgets) -> list[Path]:
    """Pointwise errors per budget and sorted coefficient magnitudes for one run."""
    plt = _pyplot()
    out = Path(out)
    written = []

    fig, ax = plt.subplots(figsize=(6, 4))
    for n in budgets:
        d = _read(out / f"{label}_N{n}_errors.csv")
        ax.semilogy([float(v) for v in d["x"]], [float(v) for v in d["rel_err"]],
                    label=f"{n} coefficients")
    ax.set_xlabel("x")
    ax.set_ylabel("relative error")
    ax.set_title(label)
    ax.legend()
    fig.tight_layout()
    path = out / f"{label}_errors.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    d = _read(out / f"{label}_coefficients.csv")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy([int(v) for v in d["rank"]], [float(v) for v in d["abs_coeff"]], ".", ms=3)
    ax.set_xlabel("rank")
    ax.set_ylabel("|coefficient|")
    ax.set_title(label)
    fig.tight_layout()
    path = out / f"{label}_coefficients.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written


def render_summary(csv_path: Path) -> Path:
    """Average error against budget, one line per (target, k, method)."""
    plt = _pyplot()
    csv_path = Path(csv_path)
    with csv_path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    columns = header[2:]
    targets = list(dict.fromkeys(c.rsplit("_", 1)[0] for c in columns))
    fig, axes = plt.subplots(1, len(targets), figsize=(5 * len(targets), 4), squeeze=False)
    for ax, t in zip(axes[0], targets):
        idx = [i for i, c in enumerate(columns) if c.rsplit("_", 1)[0] == t]
        budgets = [int(columns[i].rsplit("_", 1)[1]) for i in idx]
        for row in rows:
            vals = [float(row[2 + i]) for i in idx]
            ax.semilogy(budgets, vals, "o-", label=f"k={row[0]} {row[1]}")
        ax.set_title(t)
        ax.set_xlabel("coefficients")
        ax.set_ylabel("average relative error")
        ax.legend(fontsize=8)
    fig.tight_layout()
    path = csv_path.with_suffix(".png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
