"""Sparse approximation of oscillatory functions with B-spline Gabor frames."""

from .analysis import ErrorReport, IntervalSetup, build_setup, reconstruct, relative_error
from .bspline import BSplineWindow, PiecewisePolynomial, evaluate, make_bspline, product_integral
from .gabor import (
    DualWindow,
    FrameBounds,
    GaborSystem,
    SampledFrame,
    canonical_dual,
    check_dual_parameters,
    check_frame_parameters,
    covering_shifts,
    dual_window,
    dual_window_uniform,
    dual_window_weighted,
    estimate_frame_bounds,
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
from .targets import (
    CylinderScatteringField,
    PointSourceField,
    TargetField,
    bessel_jy,
    hankel1,
    hankel1_derivative,
)

__version__ = "0.1.0"
