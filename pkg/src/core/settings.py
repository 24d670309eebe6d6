"""
Global lab settings and constants.

This module contains every default value used by the lab.
Changing values here changes the defaults of every run; a config
document or CLI flag can still override them per run.
"""

import math

# =============================================================================
# PROJECT
# =============================================================================

PROJECT_NAME = "moving-teacher-lab"
VERSION = "1.0.0"

# =============================================================================
# QUADRATURE SETTINGS
# =============================================================================

QUAD_ABS_TOL = 1e-10
QUAD_MAX_SUBDIVISIONS = 4096
QUAD_INFINITE_CUTOFF = 10.0    # standard deviations
QUAD_MIN_CUTOFF = 8.0
QUAD_PANEL_ORDER = 20          # Gauss-Legendre nodes per panel

# =============================================================================
# MODEL SETTINGS
# =============================================================================

FEASIBILITY_TOL = 1e-9         # Gram determinant slack
SINGULAR_COSINE_EPS = 1e-12    # sqrt(1 - R^2) below this uses the indicator limit
DEGENERATE_DET = 1e-10         # Gram determinant below this routes <gf> to the oracle
MONOTONE_THRESHOLD = math.sqrt(2.0 * math.log(2.0))

# =============================================================================
# ODE SETTINGS
# =============================================================================

THEORY_DT = 0.01
RECORD_INTERVAL = 0.5
MIN_LENGTH = 1e-6

# =============================================================================
# SIMULATION SETTINGS
# =============================================================================

SIM_N = 10_000
SIM_N_CI = 2000
SIM_MIN_N = 100
SIM_TRIALS = 1
SIM_TEST_INPUTS = 0            # 0 = analytic gen_error at the measured R
SIM_MIN_TEST_INPUTS = 10_000
SIM_INPUT_BLOCK = 512          # training inputs drawn per generator call
SIM_TEST_CHUNK = 2048          # test inputs evaluated per matrix product
DEFAULT_SEED = 20070401
DEFAULT_JOBS = 1

# =============================================================================
# ORACLE SETTINGS
# =============================================================================

ORACLE_SAMPLES = 10_000_000
ORACLE_MIN_SAMPLES = 10_000
ORACLE_CHUNK = 1_000_000
ORACLE_BAND_SE = 4.0           # acceptance band in standard errors
ORACLE_GF_FLOOR = 1e-4         # <gf> band floor
GF_FALLBACK_SAMPLES = 1_000_000
GF_FALLBACK_SEED = 7

# =============================================================================
# REFERENCE CONDITIONS
# =============================================================================

REFERENCE_A = 0.5
REFERENCE_ETA_B = 0.1
REFERENCE_ETA_J_LIST = (1.0, 0.2, 0.05, 0.01)
REFERENCE_OPTIMAL_R = 0.905

# =============================================================================
# CSV SETTINGS
# =============================================================================

CSV_SIGNIFICANT_DIGITS = 9
CSV_COLUMNS = ("t", "R_B", "R_J", "R_BJ", "l_B", "l_J", "eg_B", "eg_J")
ORDER_PARAMETERS = ("R_B", "R_J", "R_BJ", "l_B", "l_J")
COMPARE_TOLERANCE = 0.03
DEFAULT_OUTPUT_DIR = "results"

# =============================================================================
# EXIT CODES
# =============================================================================

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_ACCEPTANCE = 3
