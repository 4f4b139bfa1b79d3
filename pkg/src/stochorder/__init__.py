"""Optimization over probability measures ordered by cones of test functions, on finite grids."""

from .cones import (
    CONCAVE,
    CONVEX,
    INCREASING_CONCAVE,
    NONDECREASING,
    NONINCREASING,
    ConeKind,
    ConeSpec,
)
from .coupling import lsd_exposed_construct, mps_exposed_construct, orbit_extreme_test, strassen_coupling
from .envelope import c_envelope, concavification, monotone_envelope
from .errors import *  # noqa: F401,F403
from .measure import Grid, Kernel, Measure, dirac, line_grid, simplex_grid, uniform, uniform_line_grid
from .optimize import solve_primal, value, value_affinity_check

__version__ = "0.1.0"
