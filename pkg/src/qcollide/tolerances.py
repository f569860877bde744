"""Numerical tolerances used across the package, kept in one place."""

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
UNITARY_TOL = 1e-10

# eigenvalues below this are treated as exact zeros inside 0 ln 0
ENTROPY_CLAMP = 1e-14
# support test for relative entropy: sigma eigenvalue below SUPPORT_TOL paired
# with rho weight above SUPPORT_WEIGHT means D = +inf
SUPPORT_TOL = 1e-12
SUPPORT_WEIGHT = 1e-10

STEADY_RESIDUAL = 1e-10
DEGENERACY_TOL = 1e-8
POWER_MAX_ITER = 1_000_000

MODE_EPS = 1e-12
HULL_TOL = 1e-9
