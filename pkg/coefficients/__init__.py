from .geometry import Case, Geometry, CoefficientBundle, LimitingCoefficients
from .closed_forms import (
    alpha, bundle, branch_values, coefficient_table, limiting_coefficients, volume_fraction,
    GOLDEN_BREAK, HALF_SQRT2_BREAK,
)
from .oracle import alpha_oracle
from .optimize import g_of_h, lane_width, optimal_h, subdivision_gain
