
# Numerical thresholds
RANK_THRESHOLD = 1e-8  # relative to the largest singular value
HERMITIAN_TOLERANCE = 1e-10  # relative to max(1, |A|)
WHITENING_MAX_CONDITION = 1e12
SUBSPACE_GAP_MIN = 1 + 1e-9  # lambda_K / lambda_K+1 below this means no signal subspace
EIGENVALUE_FLOOR = 1e-12  # relative to the largest; smaller eigenvalues count as numerically zero

# Estimation defaults
SEARCH_GRID_RATIO = 5  # D: Nyquist grid / search grid
ROOT_SEPARATION_FACTOR = 4  # minimum root angle 2*pi / (factor * N)
CLUSTER_TOLERANCE_RATIO = 0.1  # delays closer than this many tau0 are merged
POLISH_MAX_ITERATIONS = 30
LARGE_RESIDUAL_RATIO = 0.5  # relative LS residual flagged as large

# Scene sampling
MAX_SCENE_REJECTIONS = 100_000
