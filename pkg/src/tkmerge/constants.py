"""Numerical tolerances and defaults used across the package."""

SYMMETRY_TOL = 1e-10
PSD_TOL = -1e-12
WEIGHT_SUM_TOL = 1e-12

# relative slack for objective monotonicity between concentration steps
MONOTONE_RTOL = 1e-10
# relative slack for the eigenvalue-ratio constraint
RATIO_RTOL = 1e-8

DEFAULT_N_STARTS = 20
DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-8
DEFAULT_N_MC = 10_000

# restriction factors: TC-merge monitoring vs. standalone TCLUST comparisons
DEFAULT_R_TCMERGE = 64.0
DEFAULT_R_TCLUST = 1000.0

SN_CONSTANT = 1.1926
