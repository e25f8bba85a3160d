from .grid import BoundaryKind, Grid
from .field import DensityField, top_hat, uniform
from .model import ModelKind, ModelSpec, Normalization, build_model
from .solver import MethodOfLines, SolverOptions, log_mean, solve_transient
from .stationary import EquilibriumDensity, density_from_potential, free_energy, steady_state_noflux
from .analytic import heat_series
