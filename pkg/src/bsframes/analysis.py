"""Grids, interval extension, reconstruction and error metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gabor import GaborSystem, SampledFrame
from .sparse import CoefficientVector

__all__ = [
    "IntervalSetup",
    "ErrorReport",
    "extended_interval",
    "build_setup",
    "reconstruct",
    "relative_error",
]

# Pointwise relative errors are taken against max(|f_ref|, FLOOR * max|f_ref|).
ERROR_FLOOR = 1e-8


def extended_interval(lo: float, hi: float, dual_support: tuple[float, float],
                      system: GaborSystem) -> tuple[float, float]:
    """Hull of ``[lo, hi]`` and the supports of the dual atoms of every shift in ``system``.

    Those are the dual atoms needed for the coefficients of the frame atoms
    that live on the interval; ``f`` must be known wherever they are nonzero.
    """
    s0, s1 = dual_support
    n0, n1 = system.shifts
    return min(lo, s0 + n0 * system.a), max(hi, s1 + n1 * system.a)


@dataclass(frozen=True, eq=False)
class IntervalSetup:
    """Interest interval ``[0, L]`` with ``P`` samples, embedded in an extended grid.

    Both grids share the spacing ``dx = L / (P - 1)`` and are built from
    integer multiples of it, so ``grid[interest]`` reproduces the interest
    grid point for point.
    """

    L: float
    P: int
    extended: tuple[float, float]
    grid: np.ndarray
    interest: slice

    @property
    def dx(self) -> float:
        return self.L / (self.P - 1)

    @property
    def interest_grid(self) -> np.ndarray:
        return self.grid[self.interest]

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.grid.size, dtype=bool)
        m[self.interest] = True
        return m


def build_setup(L: float, P: int, dual=None, system: GaborSystem | None = None,
                extend: bool = True) -> IntervalSetup:
    """Sample ``[0, L]`` with ``P`` points and extend to cover the dual atoms.

    ``dual`` is anything with a ``support`` (a :class:`DualWindow`, a window);
    without it, or with ``extend=False``, the grid is the interest grid alone.
    """
    if P < 2:
        raise ValueError("need at least two samples")
    lo, hi = 0.0, float(L)
    if extend and dual is not None and system is not None:
        lo, hi = extended_interval(lo, hi, dual.support, system)
    dx = L / (P - 1)
    i_lo = math.floor(lo / dx + 1e-9)
    i_hi = math.ceil(hi / dx - 1e-9)
    idx = np.arange(i_lo, i_hi + 1)
    grid = L * idx / (P - 1)
    interest = slice(-i_lo, -i_lo + P)
    return IntervalSetup(float(L), int(P), (float(grid[0]), float(grid[-1])), grid, interest)


def reconstruct(frame: SampledFrame, c: CoefficientVector, interest=None) -> np.ndarray:
    """Synthesis ``G c``, optionally restricted to the rows in ``interest``."""
    if not (np.array_equal(frame.m, c.m) and np.array_equal(frame.n, c.n)):
        raise ValueError("coefficient vector and frame index atoms differently")
    G = frame.matrix if interest is None else frame.matrix[interest]
    nz = np.flatnonzero(c.values)
    return G[:, nz] @ c.values[nz]


@dataclass(frozen=True, eq=False)
class ErrorReport:
    pointwise: np.ndarray
    average: float
    maximum: float
    l2_ratio: float
    coefficients: int
    method: str = ""


def relative_error(f_ref, f_approx, coefficients: int = 0, method: str = "",
                   floor: float = ERROR_FLOOR) -> ErrorReport:
    """Pointwise ``|ref - approx| / max(|ref|, floor * max|ref|)`` and its summaries."""
    ref = np.asarray(f_ref, dtype=complex)
    approx = np.asarray(f_approx, dtype=complex)
    if ref.shape != approx.shape:
        raise ValueError("reference and approximation differ in length")
    mag = np.abs(ref)
    denom = np.maximum(mag, floor * mag.max()) if mag.max() > 0 else np.ones_like(mag)
    diff = np.abs(ref - approx)
    err = diff / denom
    ref_norm = np.linalg.norm(ref)
    l2 = float(np.linalg.norm(ref - approx) / ref_norm) if ref_norm > 0 else float(np.linalg.norm(diff))
    return ErrorReport(err, float(err.mean()), float(err.max()), l2, coefficients, method)
