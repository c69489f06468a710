"""Benchmark fields on the unit circle and the Bessel functions they need.

Two targets are provided:

* :class:`CylinderScatteringField` -- plane wave scattered by a sound-hard
  cylinder, evaluated on its boundary as a cosine series in the angle.
* :class:`PointSourceField` -- the 2D free-space Green's function
  ``H0(k |x - x_src|)`` evaluated on a circle.

:class:`TargetField` maps either of them onto a parameter interval ``[0, L]``.

Bessel functions of the first kind come from Miller's backward recurrence,
normalised with ``J0 + 2 sum J_2k = 1``; ``Y0``/``Y1`` follow from the Neumann
series in the even/odd ``J_k`` and higher orders from forward recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "bessel_jy",
    "bessel_jy_table",
    "hankel1",
    "hankel1_derivative",
    "CylinderScatteringField",
    "PointSourceField",
    "TargetField",
    "cylinder_field",
    "point_source_field",
]

_EULER_GAMMA = 0.57721566490153286060651209
_RESCALE = 1e250


def _miller_start(nmax: int, zmax: float, tol: float = 1e-20) -> int:
    """Even start order for the backward recurrence.

    At least ``nmax + 15`` and far enough past ``z`` that the Debye-type
    estimate ``J_n(z) ~ (e z / 2n)^n / sqrt(2 pi n)`` has dropped below ``tol``.
    """
    n = max(nmax + 15, math.ceil(zmax) + 15)
    log_tol = math.log(tol)
    while n * math.log(math.e * zmax / (2 * n)) - 0.5 * math.log(2 * math.pi * n) > log_tol:
        n += 1
    return n + (n % 2)


def bessel_jy_table(nmax: int, z):
    """Return ``(J, Y)`` with ``J[n] = J_n(z)``, ``Y[n] = Y_n(z)`` for n = 0..nmax.

    ``z`` may be a scalar or an array of positive reals; the trailing axes of
    the result follow its shape.
    """
    if nmax < 0:
        raise ValueError("nmax must be nonnegative")
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise ValueError("Bessel functions of the second kind need z > 0")
    shape = z.shape
    z = z.reshape(-1)

    start = _miller_start(nmax, float(z.max()))
    top = max(start, nmax + 1)
    J = np.zeros((top + 2, z.size))
    J[start] = 1e-30
    for n in range(start, 0, -1):
        J[n - 1] = (2.0 * n / z) * J[n] - J[n + 1]
        big = np.abs(J[n - 1]) > _RESCALE
        if np.any(big):
            J[:, big] /= _RESCALE
    norm = J[0] + 2.0 * np.sum(J[2 : start + 1 : 2], axis=0)
    J /= norm

    k = np.arange(1, start // 2 + 1)[:, None]
    sign = (-1.0) ** k
    log_term = np.log(z / 2.0) + _EULER_GAMMA
    y0 = (2.0 / np.pi) * log_term * J[0] - (4.0 / np.pi) * np.sum(
        sign * J[2 : 2 * k.size + 1 : 2] / k, axis=0
    )
    odd_diff = J[1 : 2 * k.size : 2] - J[3 : 2 * k.size + 2 : 2]
    y1 = (2.0 / np.pi) * (log_term * J[1] - J[0] / z) + (2.0 / np.pi) * np.sum(
        sign * odd_diff / k, axis=0
    )

    Y = np.empty((nmax + 1, z.size))
    Y[0] = y0
    if nmax >= 1:
        Y[1] = y1
    for n in range(1, nmax):
        Y[n + 1] = (2.0 * n / z) * Y[n] - Y[n - 1]

    J = J[: nmax + 1]
    return J.reshape((nmax + 1,) + shape), Y.reshape((nmax + 1,) + shape)


def bessel_jy(order: int, z):
    """``(J_order(z), Y_order(z))`` for integer ``order >= 0`` and ``z > 0``."""
    if order < 0 or int(order) != order:
        raise ValueError("order must be a nonnegative integer")
    J, Y = bessel_jy_table(int(order), z)
    return J[order][()], Y[order][()]


def hankel1(order: int, z):
    """Hankel function of the first kind, ``J_n + i Y_n``."""
    J, Y = bessel_jy(order, z)
    return J + 1j * Y


def hankel1_derivative(order: int, z):
    """``H_n'(z) = H_{n-1}(z) - (n/z) H_n(z)``, with ``H_{-1} = -H_1``."""
    if order == 0:
        return -hankel1(1, z)
    J, Y = bessel_jy_table(order, z)
    H = J + 1j * Y
    return (H[order - 1] - (order / np.asarray(z, dtype=float)) * H[order])[()]


@dataclass(frozen=True)
class CylinderScatteringField:
    """Total field on a sound-hard cylinder of radius ``radius`` hit by a plane wave.

    The cosine-series coefficients are computed once, at construction.  The
    series is cut at ``n_max`` terms (default ``ceil(k r) + 40``) or as soon as
    the newest summand stays below ``tail_tol`` on a 720-point probe of the
    circle.
    """

    k: float
    radius: float = 1.0
    n_max: int | None = None
    tail_tol: float = 1e-14
    coefficients: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.k <= 0 or self.radius <= 0:
            raise ValueError("wavenumber and radius must be positive")
        kr = self.k * self.radius
        n_max = self.n_max if self.n_max is not None else math.ceil(kr) + 40
        object.__setattr__(self, "n_max", n_max)

        J, Y = bessel_jy_table(n_max + 1, kr)
        H = J + 1j * Y
        n = np.arange(n_max + 1)
        dH = np.empty(n_max + 1, dtype=complex)
        dH[0] = -H[1]
        dH[1:] = H[:-1][: n_max] - (n[1:] / kr) * H[1 : n_max + 1]
        eps = np.where(n == 0, 1.0, 2.0)
        coef = (2.0 / (np.pi * kr)) * eps * (-1j) ** ((n - 1) % 4) / dH

        probe = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
        kept = n_max + 1
        for m in range(1, n_max + 1):
            if np.max(np.abs(coef[m] * np.cos(m * probe))) < self.tail_tol:
                kept = m
                break
        coef = coef[:kept].copy()
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)

    @property
    def terms(self) -> int:
        return self.coefficients.size

    def __call__(self, phi):
        return cylinder_field(self, phi)


def cylinder_field(fld: CylinderScatteringField, phi):
    """Evaluate the truncated cosine series at angle(s) ``phi``."""
    phi = np.asarray(phi, dtype=float)
    n = np.arange(fld.terms)
    vals = np.cos(np.multiply.outer(phi, n)) @ fld.coefficients
    return vals[()] if vals.ndim == 0 else vals


@dataclass(frozen=True)
class PointSourceField:
    """``H0(k |x - source|)`` for ``x`` on the circle ``center + radius e^{i phi}``.

    Angles are measured counterclockwise from the positive x-axis, so the
    default source at (0, 1.5) faces the circle point ``phi = pi/2``.
    """

    k: float
    source: tuple[float, float] = (0.0, 1.5)
    radius: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.k <= 0 or self.radius <= 0:
            raise ValueError("wavenumber and radius must be positive")

    @property
    def source_angle(self) -> float:
        return math.atan2(self.source[1] - self.center[1], self.source[0] - self.center[0])

    def distance(self, phi):
        """Distance from the circle point at ``phi`` to the source."""
        s = math.hypot(self.source[0] - self.center[0], self.source[1] - self.center[1])
        r = self.radius
        half = 0.5 * (np.asarray(phi, dtype=float) - self.source_angle)
        # law of cosines, rearranged to avoid cancellation near the closest point
        return np.sqrt((r - s) ** 2 + 4.0 * r * s * np.sin(half) ** 2)

    def __call__(self, phi):
        return point_source_field(self, phi)


def point_source_field(fld: PointSourceField, phi):
    d = fld.distance(phi)
    if np.any(d <= 0):
        raise ValueError("evaluation point coincides with the source")
    return hankel1(0, fld.k * d)


@dataclass(frozen=True)
class TargetField:
    """A circle field pulled back to the parameter interval ``[0, period]``.

    ``x`` maps to the angle ``2 pi x / period``; the field is evaluated there
    directly, so values outside ``[0, period]`` are the analytic continuation
    rather than copies.
    """

    field: CylinderScatteringField | PointSourceField
    period: float = 3.0

    def __call__(self, x):
        return self.field(2.0 * np.pi * np.asarray(x, dtype=float) / self.period)

    @property
    def k(self) -> float:
        return self.field.k

    @property
    def cycles_per_unit(self) -> float:
        """Upper bound on the local oscillation rate in cycles per parameter unit."""
        return self.field.k * self.field.radius / self.period
