import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bsframes.targets import (
    CylinderScatteringField,
    PointSourceField,
    TargetField,
    bessel_jy,
    bessel_jy_table,
    cylinder_field,
    hankel1,
    hankel1_derivative,
    point_source_field,
)


def j_series(n, z, dps=None):
    """Power series for J_n, summed in extended precision.

    The terms grow to about exp(z) before they decay, so the working
    precision grows with z.
    """
    dps = dps or 30 + int(0.5 * z)
    with mp.workdps(dps):
        z = mp.mpf(z)
        half = z / 2
        total, k = mp.mpf(0), 0
        while True:
            term = (-1) ** k * half ** (2 * k + n) / (mp.factorial(k) * mp.factorial(k + n))
            total += term
            if k > z and abs(term) < mp.mpf(10) ** (-dps):
                return float(total)
            k += 1


def h0_series(z, dps=40):
    """H0 = J0 + i Y0 with Y0 from its logarithmic series, in extended precision."""
    with mp.workdps(dps):
        z = mp.mpf(z)
        q = -(z / 2) ** 2
        j0, y_sum, term, harmonic = mp.mpf(0), mp.mpf(0), mp.mpf(1), mp.mpf(0)
        for k in range(200):
            if k:
                term *= q / (k * k)
                harmonic += mp.mpf(1) / k
            j0 += term
            y_sum += term * harmonic
        y0 = (2 / mp.pi) * ((mp.log(z / 2) + mp.euler) * j0 - y_sum)
        return complex(j0, y0)


def cylinder_oracle(k, phi, terms=200, dps=40):
    with mp.workdps(dps):
        kr = mp.mpf(k)
        total = mp.mpc(0)
        for n in range(terms):
            dh = mp.besselj(n, kr, derivative=1) + 1j * mp.bessely(n, kr, derivative=1)
            eps = 1 if n == 0 else 2
            total += 2 / (mp.pi * kr) * eps * (-1j) ** ((n - 1) % 4) / dh * mp.cos(n * phi)
        return complex(total)


# ---- Bessel functions -----------------------------------------------------------


def test_j0_small_argument():
    j0, _ = bessel_jy(0, 1e-8)
    assert j0 == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("z", [1.0, 5.0, 15.0, 40.0])
def test_wronskian(z):
    J, Y = bessel_jy_table(51, z)
    n = np.arange(51)
    resid = J[n + 1] * Y[n] - J[n] * Y[n + 1] - 2.0 / (np.pi * z)
    assert np.max(np.abs(resid)) <= 1e-10


def test_j0_at_one_against_series():
    assert bessel_jy(0, 1.0)[0] == pytest.approx(j_series(0, 1.0), rel=1e-14)


@pytest.mark.parametrize("n", [0, 1, 2, 7, 20, 45])
@pytest.mark.parametrize("z", [0.3, 2.0, 5.0, 15.0, 40.0, 100.0])
def test_against_mpmath(n, z):
    j, y = bessel_jy(n, z)
    with mp.workdps(30):
        jr, yr = float(mp.besselj(n, z)), float(mp.bessely(n, z))
    assert j == pytest.approx(jr, rel=1e-10, abs=1e-14 * max(1.0, abs(jr)))
    assert y == pytest.approx(yr, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(z=st.floats(0.05, 100.0), n=st.integers(0, 60))
def test_j_series_oracle_property(z, n):
    # only orders where J_n is not vanishingly small are meaningful in relative terms
    jr = j_series(n, z)
    if abs(jr) < 1e-200:
        return
    j, _ = bessel_jy(n, z)
    assert abs(j - jr) <= 1e-10 * abs(jr) + 1e-15


def test_vectorised_table_matches_scalar():
    z = np.array([0.5, 3.0, 25.0])
    J, Y = bessel_jy_table(10, z)
    for i, zi in enumerate(z):
        j, y = bessel_jy(10, zi)
        assert J[10, i] == pytest.approx(j, rel=1e-13)
        assert Y[10, i] == pytest.approx(y, rel=1e-13)


@pytest.mark.parametrize("z", [0.0, -1.0])
def test_rejects_nonpositive_argument(z):
    with pytest.raises(ValueError):
        bessel_jy(0, z)


def test_rejects_negative_order():
    with pytest.raises(ValueError):
        bessel_jy(-1, 1.0)


@pytest.mark.parametrize("z", [0.5, 5.0, 37.0])
def test_h0_derivative_is_minus_h1(z):
    assert hankel1_derivative(0, z) == -hankel1(1, z)


def test_h0_large_argument_magnitude():
    assert abs(hankel1(0, 80.0)) == pytest.approx(math.sqrt(2 / (math.pi * 80.0)), rel=0.02)


def test_h1_finite_difference():
    z, h = 5.0, 1e-6
    fd = (hankel1(0, z + h) - hankel1(0, z - h)) / (2 * h)
    assert abs(-fd - hankel1(1, 5.0)) <= 1e-5


@pytest.mark.parametrize("n", [1, 3, 10])
def test_hankel_derivative_recurrence(n):
    z = 4.2
    with mp.workdps(30):
        ref = complex(mp.besselj(n, z, derivative=1) + 1j * mp.bessely(n, z, derivative=1))
    assert hankel1_derivative(n, z) == pytest.approx(ref, rel=1e-12)


# ---- cylinder field ---------------------------------------------------------------


def test_cylinder_even_and_periodic(rng):
    fld = CylinderScatteringField(5.0)
    phi = rng.uniform(-10, 10, 200)
    np.testing.assert_array_equal(fld(phi), fld(-phi))
    np.testing.assert_allclose(fld(phi + 2 * np.pi), fld(phi), rtol=0, atol=1e-12)


@pytest.mark.parametrize("k, lo, hi", [(5.0, 20, 30), (15.0, 30, 50)])
def test_cylinder_truncation(k, lo, hi):
    assert lo <= CylinderScatteringField(k).terms <= hi


def test_cylinder_against_long_sum():
    fld = CylinderScatteringField(5.0)
    assert cylinder_field(fld, 0.0) == pytest.approx(cylinder_oracle(5.0, 0.0), abs=1e-12)


@pytest.mark.parametrize("k", [5.0, 15.0])
def test_cylinder_partial_sums_converge(k):
    fld = CylinderScatteringField(k, n_max=int(k) + 60, tail_tol=0.0)
    phi = np.linspace(0, 2 * np.pi, 720, endpoint=False)
    terms = np.abs(fld.coefficients[:, None] * np.cos(np.outer(np.arange(fld.terms), phi))).max(axis=1)
    tail = terms[int(k) + 5:]
    assert np.all(np.diff(tail) < 0)
    assert tail[-1] < 1e-12


def test_cylinder_rejects_bad_parameters():
    with pytest.raises(ValueError):
        CylinderScatteringField(0.0)


# ---- point source --------------------------------------------------------------------


def test_point_source_geometry():
    fld = PointSourceField(5.0)
    phi = np.linspace(0, 2 * np.pi, 10_001)
    d = fld.distance(phi)
    assert d.min() == pytest.approx(0.5, abs=1e-12)
    assert d.max() == pytest.approx(2.5, abs=1e-6)
    assert fld.source_angle == pytest.approx(np.pi / 2)


@settings(max_examples=50, deadline=None)
@given(delta=st.floats(0.0, np.pi))
def test_point_source_symmetry(delta):
    fld = PointSourceField(5.0)
    phi0 = fld.source_angle
    assert point_source_field(fld, phi0 + delta) == pytest.approx(point_source_field(fld, phi0 - delta),
                                                                 rel=1e-13)


@pytest.mark.parametrize("phi, dist", [(np.pi / 2, 0.5), (-np.pi / 2, 2.5)])
def test_point_source_values(phi, dist):
    fld = PointSourceField(5.0)
    assert point_source_field(fld, phi) == pytest.approx(h0_series(5.0 * dist), rel=1e-12)


def test_point_source_coincident():
    with pytest.raises(ValueError):
        point_source_field(PointSourceField(5.0, source=(0.0, 1.0)), np.pi / 2)


# ---- parameterisation ---------------------------------------------------------------------


@pytest.mark.parametrize("field", [CylinderScatteringField(5.0), PointSourceField(15.0)])
def test_target_periodic_extension(field, rng):
    t = TargetField(field, 3.0)
    x = rng.uniform(0, 3, 500)
    scale = np.abs(t(x)).max()
    h = 1e-6
    slope = np.abs(t(x + h) - t(x - h)) / (2 * h)
    for shift in (-3.0, 3.0):
        # rounding x + shift already moves the argument by up to half an ulp
        input_error = slope * np.spacing(np.abs(x + shift))
        assert np.all(np.abs(t(x + shift) - t(x)) <= 1e-14 * scale + 2 * input_error)


def zero_crossings(v):
    return int(np.count_nonzero(np.signbit(v[:-1]) != np.signbit(v[1:])))


@pytest.mark.parametrize("make", [CylinderScatteringField, PointSourceField])
def test_oscillation_scales_with_wavenumber(make):
    x = np.linspace(0, 3, 6001)
    c5 = zero_crossings(TargetField(make(5.0))(x).real)
    c15 = zero_crossings(TargetField(make(15.0))(x).real)
    assert 2.5 <= c15 / c5 <= 3.5
