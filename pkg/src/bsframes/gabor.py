"""Gabor systems generated by B-splines, their dual windows and sampled frames.

Atoms are ``g(x - n a) exp(2 pi i m b x)``.  Columns of a sampled frame are
ordered shift-major: all modulations of the first shift, then the next shift,
and so on.  Ties in downstream greedy selections are broken towards the lower
column index, so this order is part of the contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bspline import BSplineWindow, PiecewisePolynomial, make_bspline

__all__ = [
    "GaborSystem",
    "DualWindow",
    "SampledFrame",
    "FrameBounds",
    "check_frame_parameters",
    "check_dual_parameters",
    "dual_window_weighted",
    "dual_window_uniform",
    "dual_window_theorem2",
    "dual_window_theorem3",
    "dual_window",
    "covering_shifts",
    "modulation_range",
    "sample_frame",
    "canonical_dual",
    "estimate_frame_bounds",
]

# Relative singular-value cutoff for the pseudoinverse.
PINV_RCOND = 1e-12


def check_frame_parameters(order: int, a: float, b: float) -> bool:
    """True iff ``N_order`` generates a Gabor frame for lattice ``(a, b)``,
    i.e. ``0 < a <= order`` and ``0 < b <= 1/order``."""
    if order < 1:
        raise ValueError("order must be >= 1")
    return 0 < a <= order and 0 < b <= 1.0 / order


@dataclass(frozen=True, eq=False)
class DualWindow:
    """A dual window for ``N_order`` at modulation step ``b``.

    ``kind`` is ``"dual1"``, ``"dual2"`` or ``"canonical"``.  The first two
    carry an exact piecewise polynomial; a canonical dual only exists as a
    sampled frame (``sampled``) tied to one grid and atom set.
    """

    kind: str
    order: int
    b: float
    poly: PiecewisePolynomial | None = None
    sampled: "SampledFrame | None" = None
    support_hint: tuple[float, float] | None = None

    def __call__(self, x):
        if self.poly is None:
            raise TypeError("a canonical dual has no closed form; use .sampled")
        return self.poly(x)

    @property
    def support(self) -> tuple[float, float]:
        if self.poly is not None:
            return self.poly.support
        if self.support_hint is not None:
            return self.support_hint
        return (0.0, float(self.order))


def _bspline_combination(order: int, weights: dict[int, float]) -> PiecewisePolynomial:
    """``sum_k w_k N(x + k)`` as one piecewise polynomial."""
    base = make_bspline(order).poly
    total = None
    for k, w in sorted(weights.items()):
        term = base.shift(-k).scale(w)
        total = term if total is None else total + term
    return total


def check_dual_parameters(order: int, b: float) -> bool:
    """True iff the closed-form duals exist for ``N_order``: ``0 < b <= 1/(2 order - 1)``."""
    if order < 1:
        raise ValueError("order must be >= 1")
    return 0 < b <= (1 + 1e-12) / (2 * order - 1)


def _check_dual_b(order: int, b: float) -> None:
    limit = 1.0 / (2 * order - 1)
    if not check_dual_parameters(order, b):
        raise ValueError(
            f"b = {b} outside the admissible interval (0, {limit:.6g}] "
            f"for dual windows of order {order}"
        )


def dual_window_weighted(order: int, b: float) -> DualWindow:
    """``h = b N(x) + 2b sum_{k=1}^{order-1} N(x + k)``, support ``[1 - order, order]``.

    Running the sum up to ``order`` would add a term whose support breaks the
    duality conditions for the neighbouring shifts.
    """
    _check_dual_b(order, b)
    weights = {0: b}
    weights.update({k: 2.0 * b for k in range(1, order)})
    return DualWindow("dual1", order, b, poly=_bspline_combination(order, weights))


def dual_window_uniform(order: int, b: float) -> DualWindow:
    """``h = b sum_{k=-order+1}^{order-1} N(x + k)``, support ``[1 - order, 2 order - 1]``."""
    _check_dual_b(order, b)
    weights = {k: b for k in range(-order + 1, order)}
    return DualWindow("dual2", order, b, poly=_bspline_combination(order, weights))


# names used by the public interface contract
dual_window_theorem2 = dual_window_weighted
dual_window_theorem3 = dual_window_uniform


def dual_window(kind: str, order: int, b: float) -> DualWindow:
    builders: dict[str, Callable[[int, float], DualWindow]] = {
        "dual1": dual_window_weighted,
        "dual2": dual_window_uniform,
    }
    try:
        return builders[kind](order, b)
    except KeyError:
        raise ValueError(f"unknown closed-form dual {kind!r}") from None


@dataclass(frozen=True, eq=False)
class GaborSystem:
    """Finite Gabor system: shifts ``n_min..n_max`` times modulations ``m_min..m_max``."""

    window: BSplineWindow | DualWindow | PiecewisePolynomial
    a: float
    b: float
    shifts: tuple[int, int]
    modulations: tuple[int, int]
    n: np.ndarray = field(init=False, repr=False)
    m: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.a <= 0 or self.b <= 0:
            raise ValueError("lattice parameters a and b must be positive")
        (n0, n1), (m0, m1) = self.shifts, self.modulations
        if n1 < n0 or m1 < m0:
            raise ValueError("empty shift or modulation range")
        n, m = np.meshgrid(np.arange(n0, n1 + 1), np.arange(m0, m1 + 1), indexing="ij")
        object.__setattr__(self, "n", n.ravel())
        object.__setattr__(self, "m", m.ravel())

    @property
    def count(self) -> int:
        return self.n.size

    @property
    def num_shifts(self) -> int:
        return self.shifts[1] - self.shifts[0] + 1

    @property
    def num_modulations(self) -> int:
        return self.modulations[1] - self.modulations[0] + 1

    @property
    def window_support(self) -> tuple[float, float]:
        return self.window.support

    def with_window(self, window) -> "GaborSystem":
        """Same lattice and index ranges, different generating window."""
        return GaborSystem(window, self.a, self.b, self.shifts, self.modulations)

    def index_of(self, m: int, n: int) -> int:
        (n0, _), (m0, _) = self.shifts, self.modulations
        return (n - n0) * self.num_modulations + (m - m0)

    def atoms(self, x) -> np.ndarray:
        """Matrix of all atoms at the points ``x``; shape ``(len(x), count)``."""
        x = np.asarray(x, dtype=float)
        shifts = np.arange(self.shifts[0], self.shifts[1] + 1)
        mods = np.arange(self.modulations[0], self.modulations[1] + 1)
        win = self.window(x[:, None] - shifts[None, :] * self.a)
        phase = np.exp(2j * np.pi * self.b * np.outer(x, mods))
        return (win[:, :, None] * phase[:, None, :]).reshape(x.size, self.count)


def covering_shifts(support: tuple[float, float], a: float, lo: float, hi: float) -> tuple[int, int]:
    """All ``n`` whose shifted support ``support + n a`` meets the open interval ``(lo, hi)``."""
    s0, s1 = support
    n_min = math.floor((lo - s1) / a) + 1
    n_max = math.ceil((hi - s0) / a) - 1
    return n_min, n_max


def modulation_range(b: float, dx: float, max_cycles: float | None = None) -> tuple[int, int]:
    """Modulation indices for atoms sampled with spacing ``dx``.

    Capped at the grid Nyquist frequency ``1/(2 dx)``.  When the cap lands
    exactly on Nyquist the most negative index is dropped, since ``-M b`` and
    ``M b`` alias to the same grid vector.  ``max_cycles`` (cycles per unit)
    lowers the range to ``|m b| <= max_cycles``.
    """
    nyq = 1.0 / (2.0 * dx * b)
    M = math.floor(nyq + 1e-9)
    if max_cycles is not None and math.ceil(max_cycles / b - 1e-9) < M:
        M = math.ceil(max_cycles / b - 1e-9)
        return -M, M
    lo = -M + 1 if abs(nyq - M) < 1e-9 else -M
    return lo, M


@dataclass(frozen=True, eq=False)
class SampledFrame:
    """Atoms of a Gabor system sampled on an equispaced grid (one column each)."""

    grid: np.ndarray
    matrix: np.ndarray
    m: np.ndarray
    n: np.ndarray
    label: str = "frame"

    @property
    def dx(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def column(self, m: int, n: int) -> np.ndarray:
        hit = np.flatnonzero((self.m == m) & (self.n == n))
        if hit.size != 1:
            raise KeyError((m, n))
        return self.matrix[:, hit[0]]

    def restrict(self, mask) -> "SampledFrame":
        """Rows selected by ``mask`` (a boolean array or index slice)."""
        return SampledFrame(self.grid[mask], self.matrix[mask], self.m, self.n, self.label)

    def same_atoms(self, other: "SampledFrame") -> bool:
        return np.array_equal(self.m, other.m) and np.array_equal(self.n, other.n)


def _check_grid(grid: np.ndarray) -> None:
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid needs at least two points")
    steps = np.diff(grid)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ValueError("grid must be strictly increasing and equispaced")


def sample_frame(system: GaborSystem, grid) -> SampledFrame:
    """Evaluate every atom of ``system`` on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    _check_grid(grid)
    label = getattr(system.window, "kind", "frame")
    return SampledFrame(grid, system.atoms(grid), system.m, system.n, label)


def canonical_dual(frame: SampledFrame, rcond: float = PINV_RCOND) -> SampledFrame:
    """Sampled canonical dual: conjugated rows of ``pinv(G)``, divided by ``dx``.

    With this scaling ``dx * sum_j f_j conj(dual_ij)`` is exactly ``(pinv(G) f)_i``.
    Grid points where every atom vanishes are dropped before the SVD; they
    contribute zero rows to ``G`` and zero columns to ``pinv(G)`` anyway.
    """
    G = frame.matrix
    live = np.any(G != 0, axis=1)
    pinv = np.zeros((G.shape[1], G.shape[0]), dtype=complex)
    if np.any(live):
        pinv[:, live] = np.linalg.pinv(G[live], rcond=rcond)
    dual = pinv.conj().T / frame.dx
    return SampledFrame(frame.grid, dual, frame.m, frame.n, "canonical")


@dataclass(frozen=True)
class FrameBounds:
    A: float
    B: float

    @property
    def ratio(self) -> float:
        return self.B / self.A if self.A > 0 else math.inf


def estimate_frame_bounds(frame: SampledFrame, weight: float | None = None) -> FrameBounds:
    """Discrete frame bounds from the singular values of ``sqrt(dx) G^H``.

    ``A`` is the smallest of the ``min(P, Q)`` squared singular values, so it
    bounds the frame from below on the span of the sampled atoms.
    """
    if frame.matrix.size == 0:
        raise ValueError("empty frame")
    w = frame.dx if weight is None else weight
    s = np.linalg.svd(frame.matrix, compute_uv=False)
    return FrameBounds(A=float(w * s[-1] ** 2), B=float(w * s[0] ** 2))
