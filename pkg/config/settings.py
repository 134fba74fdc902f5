"""
Application settings and numerical defaults
"""

import os

# Application settings
APP_NAME = "Volterra Lab"
APP_VERSION = "1.0.0"
LOGGER_NAMESPACE = "volterra_lab"

# Quadrature settings
QUAD_EPSREL = 1e-12
QUAD_EPSABS = 1e-14
QUAD_LIMIT = 500
QUAD_ACCEPT_FACTOR = 1e3  # reported abserr may exceed the request by this much

# Boundary function g(k) = b^(eps + ik)
BOUNDARY_EPS = 1e-8
BOUNDARY_EPS_CHECK = 1e-9
BOUNDARY_REL_TOL = 1e-4

# Kernel assumption checks
FD_RELATIVE_STEP = 1e-5  # central differences for b^ derivatives
MONOTONE_TOLERANCE = 1e-12
MONOTONE_MAX_ORDER = 4
SECTOR_RADII = (1e-6, 1e6)
SECTOR_SAMPLES = 400
REGULARITY_REFINEMENT_TOL = 0.05
GROWTH_RATIO_BOUND = 50.0
GROWTH_DRIFT_TOL = 0.01
GROWTH_TRUNCATION = 1e-12
GROWTH_MU_GRID = (1e3, 1e7, 9)  # log-spaced (start, stop, count)
LP_EXPONENTS = (1, 2, 4, 8)
B_SMOOTH_RANGE = (1e-6, 1e6)
B_SMOOTH_BOUND = 1e6

# Scalar resolvent
STIFFNESS_THRESHOLD = 1.0  # mu * ||b||_L1(0,h) * h
CONTRACTION_SLACK = 1e-6
HORIZON_TAIL_LIMIT = 0.01
DEFAULT_GRADING = 2.0
MITTAG_LEFFLER_SERIES_TERMS = 200
MITTAG_LEFFLER_EPS = 1e-16

# Spectral operator
DEFAULT_MODES = 64
SMOOTHING_MODES = 256
SMOOTHING_WINDOW_STEPS = 5
SMOOTHING_WINDOW_FRACTION = 0.1
INTEGRATED_BOUND_FACTOR = 50.0
OVERSAMPLING = 2  # collocation points M = OVERSAMPLING * N + 1

# Noise
DEFAULT_SEED = 20240501
DEFAULT_RULE = "left"
LOCAL_SUBGRID_STEPS = 256

# Picard iteration
DEFAULT_STEPS = 512
DEFAULT_HORIZON = 1.0
DEFAULT_MOMENT = 2
DEFAULT_PATHS = 200
PICARD_TOL = 1e-8
PICARD_MAX_ITER = 30
ALPHA_FACTOR = 4.0
ALPHA_MAX_DOUBLINGS = 10
RATIO_WINDOW = 5

# Regularity measurements
HOLDER_BASE_FRACTIONS = (0.25, 0.5, 0.75)
HOLDER_MIN_LAGS = 5
HOLDER_CI_LIMIT = 0.1
LAG_K_MIN = 3
LAG_K_MAX = 9
STABILITY_TOL = 0.10
DIVERGENCE_GROWTH = 0.30
PATHWISE_MIN_PATHS = 20
PATHWISE_MOMENT = 8
# largest share of D(h)^2 the modes beyond the basis may carry at a fitted lag
TRUNCATION_SHARE = 0.25
SLOPE_TOLERANCE = 0.1

# Output
FLOAT_FORMAT = "%.17g"
CSV_DELIMITER = ","

# File paths
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
PRESETS_DIR = os.path.join(BASE_DIR, "config", "presets")
OUTPUT_DIR = os.path.join(BASE_DIR, "output")
