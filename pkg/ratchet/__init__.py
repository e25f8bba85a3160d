from .potential import potential_sf, potential_sf_derivative, tilted
from .periodic import (
    RatchetProblem, RatchetSolution, boltzmann_solution, flux_curve, nonlinearity,
    solve_periodic_stationary, spectral_derivative, sweep_solutions,
)
from .oracle import linear_flux_oracle
from .equilibrium import equilibrium_profile
