"""Application-wide constants and configuration."""
import os

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA_DIR = os.path.join(BASE_DIR, "data")
DB_PATH = os.path.join(DATA_DIR, "kemenytool.db")

# Largest node count for which the dense O(n^3) routes (oracle, dense
# factorization, eigen route) are offered.
DENSE_THRESHOLD = 2000

# A Cholesky pivot at or below PIVOT_RTOL * max(initial diagonal) aborts the
# factorization. L_{n-1} is positive definite in exact arithmetic.
PIVOT_RTOL = 1e-14

# kappa_curve refuses to evaluate when |1 - t*a*alpha| falls below this.
POLE_TOL = 1e-12

# Tolerance of the cut-edge identity a_pq * alpha(p, q) = 1.
BRIDGE_TOL = 1e-8

# A score column whose spread is below FLAT_RTOL * max|score| is constant.
FLAT_RTOL = 1e-12

HISTOGRAM_BINS = 50

# onepath-check fails when solver and closed form differ by more than this.
ONEPATH_RTOL = 1e-8

# Blend between common-neighbour count and inverse distance (CCPA index).
CNC_ALPHA = 0.8

# Stationary-vector products of one-path chains switch to log space above this n.
LOG_SPACE_MIN_N = 1000

# Pairs per block in batch solves. Fixed so results do not depend on --jobs.
PAIR_BLOCK = 64

# Default number of worker threads for batch pair processing.
PAIR_WORKERS = 1

HASH_CHUNK_SIZE = 4 * 1024 * 1024  # 4 MB chunks when fingerprinting inputs

APP_NAME = "kemenytool"
