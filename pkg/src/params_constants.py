"""Constants for numerical evaluation defaults and parameter envelopes."""

# === Series truncation ======================================================
DEFAULT_REL_TOL = 1e-12
DEFAULT_ABS_TOL = 1e-300
DEFAULT_MAX_TERMS = 10_000

# === Quadrature and inversion ===============================================
DEFAULT_QUAD_ORDER = 200
DEFAULT_LAPLACE_TERMS = 500
MAX_QUAD_ORDER = 512
DEFAULT_TALBOT_ORDER = 24

# === Parameter envelope (double precision) ==================================
ENVELOPE_MAX_N_PLUS_ALPHA = 64
ENVELOPE_MAX_MU = 50.0
HARD_MAX_N_PLUS_ALPHA = 512

# === Crossovers =============================================================
CENTRAL_MU_THRESHOLD = 1e-8
COINCIDENT_NODE_RATIO = 1e-10
CANCELLATION_MU = 30.0

# === Linear algebra =========================================================
JACOBI_MAX_SWEEPS = 50
JACOBI_TOL = 1e-14
POLY_DET_MAX_SIZE = 12
MAX_HERMITIAN_SIZE = 256
