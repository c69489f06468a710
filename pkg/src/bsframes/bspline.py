"""Cardinal B-splines as exact piecewise polynomials.

``N_1`` is the indicator of ``[0, 1)`` and ``N_{l+1} = N_l * N_1``.  The
convolution is carried out on the polynomial pieces themselves (difference of
antiderivatives), in exact rational arithmetic, so every window returned by
:func:`make_bspline` is exact up to the final conversion to floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import numpy as np

__all__ = [
    "PiecewisePolynomial",
    "BSplineWindow",
    "make_bspline",
    "evaluate",
    "product_integral",
]

# Below |omega * h| < max(1, degree) the integration-by-parts recursion loses
# digits to cancellation; the power series is used there instead.
_SERIES_TERMS = 64


def _recenter(coeffs: np.ndarray, delta: float) -> np.ndarray:
    """Coefficients of ``p(s + delta)`` given those of ``p(t)`` (ascending)."""
    if delta == 0.0:
        return coeffs.copy()
    n = coeffs.shape[-1]
    out = np.zeros_like(coeffs)
    for j in range(n):
        for k in range(j, n):
            out[..., j] += coeffs[..., k] * comb(k, j) * delta ** (k - j)
    return out


@dataclass(frozen=True, eq=False)
class PiecewisePolynomial:
    """Polynomial pieces on ``[breaks[i], breaks[i+1])``, zero elsewhere.

    ``coeffs[i]`` holds ascending monomial coefficients in the local variable
    ``x - breaks[i]``.
    """

    breaks: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        breaks = np.asarray(self.breaks, dtype=float)
        coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if breaks.ndim != 1 or breaks.size < 2:
            raise ValueError("need at least two breakpoints")
        if np.any(np.diff(breaks) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if coeffs.shape[0] != breaks.size - 1:
            raise ValueError(
                f"{breaks.size - 1} pieces but {coeffs.shape[0]} coefficient rows"
            )
        breaks.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def support(self) -> tuple[float, float]:
        return float(self.breaks[0]), float(self.breaks[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breaks, x, side="right") - 1
        inside = (idx >= 0) & (idx < self.coeffs.shape[0])
        idx = np.clip(idx, 0, self.coeffs.shape[0] - 1)
        t = x - self.breaks[idx]
        c = self.coeffs[idx]
        val = np.zeros_like(t)
        for k in range(self.degree, -1, -1):
            val = val * t + c[..., k]
        return np.where(inside, val, 0.0)

    def shift(self, s: float) -> "PiecewisePolynomial":
        """The function ``x -> p(x - s)``."""
        return PiecewisePolynomial(self.breaks + s, self.coeffs)

    def scale(self, factor: float) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self.breaks, self.coeffs * factor)

    def refine(self, breaks) -> "PiecewisePolynomial":
        """Re-express on ``breaks``, which must contain the current breakpoints
        that lie inside the new range."""
        breaks = np.asarray(breaks, dtype=float)
        lefts = breaks[:-1]
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        idx = np.searchsorted(self.breaks, mids, side="right") - 1
        inside = (idx >= 0) & (idx < self.coeffs.shape[0])
        out = np.zeros((lefts.size, self.degree + 1))
        for i in np.flatnonzero(inside):
            out[i] = _recenter(self.coeffs[idx[i]], lefts[i] - self.breaks[idx[i]])
        return PiecewisePolynomial(breaks, out)

    def _aligned(self, other: "PiecewisePolynomial", hull: bool):
        if hull:
            lo = min(self.breaks[0], other.breaks[0])
            hi = max(self.breaks[-1], other.breaks[-1])
        else:
            lo = max(self.breaks[0], other.breaks[0])
            hi = min(self.breaks[-1], other.breaks[-1])
        merged = np.union1d(self.breaks, other.breaks)
        merged = merged[(merged >= lo) & (merged <= hi)]
        return merged

    def __add__(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        merged = self._aligned(other, hull=True)
        p, q = self.refine(merged), other.refine(merged)
        deg = max(p.degree, q.degree)
        c = np.zeros((merged.size - 1, deg + 1))
        c[:, : p.degree + 1] += p.coeffs
        c[:, : q.degree + 1] += q.coeffs
        return PiecewisePolynomial(merged, c)

    def __mul__(self, other):
        if np.isscalar(other):
            return self.scale(float(other))
        merged = self._aligned(other, hull=False)
        if merged.size < 2:
            # disjoint supports
            return PiecewisePolynomial([0.0, 1.0], [[0.0]])
        p, q = self.refine(merged), other.refine(merged)
        c = np.array(
            [np.polynomial.polynomial.polymul(a, b) for a, b in zip(p.coeffs, q.coeffs)]
        )
        return PiecewisePolynomial(merged, c)

    __rmul__ = __mul__

    def derivative(self) -> "PiecewisePolynomial":
        if self.degree == 0:
            return PiecewisePolynomial(self.breaks, np.zeros_like(self.coeffs))
        k = np.arange(1, self.degree + 1)
        return PiecewisePolynomial(self.breaks, self.coeffs[:, 1:] * k)

    def _clipped_pieces(self, lo: float, hi: float):
        """Yield (left, length, coeffs) for each piece intersected with [lo, hi]."""
        for i, c in enumerate(self.coeffs):
            a = max(self.breaks[i], lo)
            b = min(self.breaks[i + 1], hi)
            if b <= a:
                continue
            yield a, b - a, _recenter(c, a - self.breaks[i])

    def integral(self, lo: float = -np.inf, hi: float = np.inf) -> float:
        total = 0.0
        for _, h, c in self._clipped_pieces(lo, hi):
            k = np.arange(c.size)
            total += float(np.sum(c * h ** (k + 1) / (k + 1)))
        return total

    def fourier_integral(self, freq, lo: float = -np.inf, hi: float = np.inf):
        """``int_lo^hi p(x) exp(2 pi i freq x) dx``, analytic, vectorised in freq.

        Low frequencies are integrated piece by piece; high ones by repeated
        integration by parts, collecting the boundary terms knot by knot so that
        the exactly continuous derivatives drop out instead of cancelling in
        floating point.
        """
        freq = np.asarray(freq, dtype=float)
        omega = 2.0 * np.pi * np.atleast_1d(freq)
        pieces = list(self._clipped_pieces(lo, hi))
        total = np.zeros(omega.shape, dtype=complex)
        if not pieces:
            return total.reshape(freq.shape)
        span = pieces[-1][0] + pieces[-1][1] - pieces[0][0]
        high = np.abs(omega) * span >= 4.0 * max(1, self.degree)
        if np.any(~high):
            w = omega[~high]
            part = np.zeros(w.shape, dtype=complex)
            for a, h, c in pieces:
                deg = c.size - 1
                near = np.abs(w * h) < max(1.0, float(deg))
                if np.any(near):
                    # series about the midpoint: terms grow like (w h / 2)^j / j!
                    cm = _recenter(c, 0.5 * h)
                    moments = _centered_moments(w[near], h, deg)
                    part[near] += np.exp(1j * w[near] * (a + 0.5 * h)) * np.tensordot(cm, moments, axes=(0, 0))
                if np.any(~near):
                    moments = _oscillatory_moments(w[~near], h, deg)
                    part[~near] += np.exp(1j * w[~near] * a) * np.tensordot(c, moments, axes=(0, 0))
            total[~high] = part
        if np.any(high):
            total[high] = _boundary_terms(pieces, omega[high])
        return total.reshape(freq.shape)


def _boundary_terms(pieces, omega: np.ndarray) -> np.ndarray:
    """Sum of ``exp(i w x) sum_k (-1)^k q^(k)(x) / (i w)^(k+1)`` jumps over knots."""
    degree = pieces[0][2].size - 1
    fact = np.array([factorial(k) for k in range(degree + 1)], dtype=float)
    # derivative values at both ends of every piece, shape (npieces, degree+1)
    left_vals = np.array([c * fact for _, _, c in pieces])
    right_vals = np.array(
        [
            [
                np.polynomial.polynomial.polyval(
                    h, np.polynomial.polynomial.polyder(c, k) if k else c
                )
                for k in range(degree + 1)
            ]
            for _, h, c in pieces
        ]
    )
    knots = [pieces[0][0]]
    jumps = [-left_vals[0]]
    for i in range(1, len(pieces)):
        a_i = pieces[i][0]
        end_prev = pieces[i - 1][0] + pieces[i - 1][1]
        if np.isclose(a_i, end_prev, rtol=0.0, atol=1e-14 * max(1.0, abs(a_i))):
            knots.append(a_i)
            jumps.append(right_vals[i - 1] - left_vals[i])
        else:
            knots += [end_prev, a_i]
            jumps += [right_vals[i - 1], -left_vals[i]]
    knots.append(pieces[-1][0] + pieces[-1][1])
    jumps.append(right_vals[-1])
    jumps = np.array(jumps)
    knots = np.array(knots)
    # continuity that holds exactly in exact arithmetic shows up as rounding noise
    scale = np.max(np.abs(np.concatenate([left_vals, right_vals])), axis=0)
    jumps[np.abs(jumps) <= 64 * np.finfo(float).eps * scale] = 0.0
    iw = 1j * omega
    signs = (-1.0) ** np.arange(degree + 1)
    inv_pow = signs[:, None] / iw[None, :] ** (np.arange(degree + 1)[:, None] + 1)
    per_knot = jumps @ inv_pow  # (nknots, nomega)
    return np.sum(np.exp(1j * np.outer(knots, omega)) * per_knot, axis=0)


def _centered_moments(omega: np.ndarray, h: float, degree: int) -> np.ndarray:
    """``int_{-h/2}^{h/2} s^k exp(i omega s) ds`` for k = 0..degree by power series.

    Meant for ``|omega h| < max(1, degree)``; shape (degree+1, *omega.shape).
    """
    r = 0.5 * h
    z = 1j * omega * r
    j = np.arange(_SERIES_TERMS)
    powers = z[..., None] ** j / np.array([factorial(int(i)) for i in j], dtype=float)
    out = np.empty((degree + 1,) + omega.shape, dtype=complex)
    for k in range(degree + 1):
        # only even k + j survive the symmetric interval
        weight = np.where((k + j) % 2 == 0, 2.0 / (k + j + 1), 0.0)
        out[k] = r ** (k + 1) * np.sum(powers * weight, axis=-1)
    return out


def _oscillatory_moments(omega: np.ndarray, h: float, degree: int) -> np.ndarray:
    """``M_k = int_0^h t^k exp(i omega t) dt`` for k = 0..degree by integration by parts.

    Stable for ``|omega h| >= max(1, degree)``; shape (degree+1, *omega.shape).
    """
    iw = 1j * omega
    e = np.exp(iw * h)
    out = np.empty((degree + 1,) + omega.shape, dtype=complex)
    m = (e - 1.0) / iw
    out[0] = m
    for k in range(1, degree + 1):
        m = (h**k * e - k * m) / iw
        out[k] = m
    return out


@dataclass(frozen=True, eq=False)
class BSplineWindow:
    """The cardinal B-spline ``N_order`` supported on ``[0, order]``."""

    order: int
    poly: PiecewisePolynomial

    def __call__(self, x):
        return self.poly(x)

    @property
    def support(self) -> tuple[float, float]:
        return self.poly.support


def _bspline_pieces(order: int) -> list[list[Fraction]]:
    pieces = [[Fraction(1)]]
    for _ in range(order - 1):
        # antiderivatives F_j(t) on each unit piece, t = x - j
        antider = []
        acc = Fraction(0)
        for c in pieces:
            F = [acc] + [ck / (k + 1) for k, ck in enumerate(c)]
            antider.append(F)
            acc += sum(F[1:])
        width = len(antider[0])
        zero = [Fraction(0)] * width
        one = [Fraction(1)] + [Fraction(0)] * (width - 1)
        padded = [zero] + antider + [one]
        pieces = [
            [hi - lo for hi, lo in zip(padded[j + 1], padded[j])]
            for j in range(len(antider) + 1)
        ]
    return pieces


def make_bspline(order: int) -> BSplineWindow:
    """Build ``N_order`` by repeated symbolic convolution with ``N_1``.

    >>> float(make_bspline(2)(0.5))
    0.5
    """
    if int(order) != order or order < 1:
        raise ValueError(f"B-spline order must be a positive integer, got {order!r}")
    order = int(order)
    pieces = _bspline_pieces(order)
    coeffs = np.array([[float(c) for c in p] for p in pieces])
    breaks = np.arange(order + 1, dtype=float)
    return BSplineWindow(order, PiecewisePolynomial(breaks, coeffs))


def evaluate(window, x):
    """Evaluate a window (or any piecewise polynomial); zero off the support."""
    return window(x)


def product_integral(window, shift1: float, shift2: float, freq, lo=-np.inf, hi=np.inf):
    """``int N(x - shift1) N(x - shift2) exp(2 pi i freq x) dx`` over ``[lo, hi]``.

    The product of the two shifted windows is formed exactly as a piecewise
    polynomial and each piece is integrated against the exponential in closed
    form.  ``freq`` may be an array.
    """
    poly = window.poly if isinstance(window, BSplineWindow) else window
    prod = poly.shift(shift1) * poly.shift(shift2)
    out = prod.fourier_integral(freq, lo, hi)
    return out if np.ndim(out) else complex(out)
