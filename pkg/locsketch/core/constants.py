"""
A module for keeping track of constants
"""
import os

# Seed used when neither the CLI nor a config file provides one.
DEFAULT_ROOT_SEED = int(os.environ.get("LS_DEFAULT_SEED", 20200826))

# Version of the experiment record layout written by the harness.
RECORD_SCHEMA_VERSION = 1

# Relative threshold below which singular values count as zero.
RANK_TOL = 1e-10

# Tolerance used when checking that a basis has orthonormal columns.
ORTHONORMAL_TOL = 1e-8

# Symmetry tolerance for the SPD solver.
SYMMETRY_TOL = 1e-10

# Tolerance of the spectral norm inside the coherence computation.
COHERENCE_NORM_TOL = 1e-8

# Slack used before taking the ceiling in the block allocation rule.
ALLOCATION_ROUNDING_TOL = 1e-9

FMX_MAGIC = b"FMX1"

LOG_LEVEL = os.environ.get("LS_LOG_LEVEL", "INFO").strip().upper()
