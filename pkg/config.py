"""
Confined Diffusion — Configuration

All tunable numerical parameters, tolerances and defaults in one place.
Edit values here instead of hunting through the solver modules.
"""

# ═══════════════════════════════════════════════════════════════
# OUTPUT
# ═══════════════════════════════════════════════════════════════

SCHEMA_NAME = "confined-diffusion"
SCHEMA_VERSION = "1.0.0"          # written into every CSV header comment
CSV_FLOAT_FORMAT = "%.12g"        # fixed format so replays are byte-identical
CONFIG_DIR = "configs"            # bundled experiment recipes (relative to repo root)
OUTPUT_DIR = "results"            # default output directory for `run`

# ═══════════════════════════════════════════════════════════════
# PHYSICAL DEFAULTS (the transient comparison setup)
# ═══════════════════════════════════════════════════════════════

DEFAULT_N = 30                    # particles
DEFAULT_EPS = 0.01                # particle diameter (channel length = 1)
DEFAULT_H = 3.0                   # confinement parameter, H = eps * h
DEFAULT_DT = 1e-5                 # Euler–Maruyama step
DEFAULT_T_END = 0.05              # output time of the transient runs
INITIAL_SEGMENT = 0.2             # initial data uniform on |x| <= 0.1

# ═══════════════════════════════════════════════════════════════
# COEFFICIENTS — closed forms
# ═══════════════════════════════════════════════════════════════

SMALL_H_SWITCH = 0.1              # below this, evaluate closed forms with mpmath
MPMATH_BASE_DPS = 30              # working digits at h = SMALL_H_SWITCH
MPMATH_DPS_PER_DECADE = 4         # extra digits per decade of smaller h

# ═══════════════════════════════════════════════════════════════
# COEFFICIENTS — quadrature oracle
# ═══════════════════════════════════════════════════════════════

ORACLE_NODES = 128                # Gauss–Legendre nodes per outer dimension
ORACLE_SUB_NODES = 16             # nodes per sub-interval of the kink-split inner integral
ORACLE_RTOL = 1e-6                # successive refinements must agree to this
ORACLE_MAX_LEVEL = 6              # doublings after the base level before giving up

# ═══════════════════════════════════════════════════════════════
# COEFFICIENTS — optimal width
# ═══════════════════════════════════════════════════════════════

OPTIMAL_H_BRACKET = (0.5, 1.3, 5.0)   # golden-section bracket (g(mid) above both ends)
OPTIMAL_H_TOL = 1e-8                  # relative tolerance on h

# ═══════════════════════════════════════════════════════════════
# EFFECTIVE PDE
# ═══════════════════════════════════════════════════════════════

PDE_GRID_POINTS = 401             # nodes on [-1/2, 1/2]
PDE_GRID_POINTS_2D = 128          # nodes per side for the plate (2D) solver
PDE_MIN_GRID_POINTS = 8
PDE_METHOD = "BDF"                # solve_ivp method for the method-of-lines system
PDE_ATOL = 1e-8
PDE_RTOL = 1e-6
PDE_SCHEME = "central"            # "central" | "gradient_flow"
NEGATIVE_FLAG = -1e-10            # undershoot below this is reported
STEADY_NEWTON_TOL = 1e-13         # mass mismatch for the zero-flux equilibrium
STEADY_MAX_ITER = 100

# ═══════════════════════════════════════════════════════════════
# RATCHET
# ═══════════════════════════════════════════════════════════════

RATCHET_GRID_POINTS = 512
RATCHET_NEWTON_TOL = 1e-11        # L-inf residual of the collocated flux relation
RATCHET_MAX_ITER = 40
RATCHET_F0_STEP = 0.5             # continuation step in the tilt
RATCHET_GPHI_STEP = 0.1           # continuation step in the nonlinearity
RATCHET_ORACLE_TOL = 1e-12        # quad tolerances of the linear flux oracle

# ═══════════════════════════════════════════════════════════════
# PARTICLE SIMULATION
# ═══════════════════════════════════════════════════════════════

OVERLAP_PASSES = 10               # K separation sweeps per step
OVERLAP_TOL = 1e-12               # penetration below this is not an overlap
DENSE_PAIR_LIMIT = 64             # above this N, pairs come from a cell list
REALIZATIONS_PER_BLOCK = 100      # unit of parallel work and of RNG keying
MAX_WORKERS = None                # None = os.cpu_count()
REJECTION_ATTEMPTS_PER_PARTICLE = 100_000
DEFAULT_BINS = 25
DEFAULT_REALIZATIONS = 2000

# ═══════════════════════════════════════════════════════════════
# METROPOLIS–HASTINGS
# ═══════════════════════════════════════════════════════════════

MH_BURN_FRACTION = 0.1
MH_ACCEPT_LOW = 0.25
MH_ACCEPT_HIGH = 0.40
MH_TUNE_INTERVAL = 1000           # proposals between step-size adjustments
MH_TUNE_FACTOR = 1.2
MH_INITIAL_DELTA = 0.1
MH_MAX_DELTA = 0.5
MH_BATCHES = 20                   # batch means for histogram standard errors
MH_RNG_CHUNK = 65536              # random numbers drawn per refill
MH_DEFAULT_STEPS = 1_000_000
MH_DEFAULT_YBINS = 10
