"""
Confined Diffusion - finite-size Brownian particles in narrow channels.
Excluded-volume coefficients, effective nonlinear PDE solvers, ratchet
stationary states and the particle simulations that validate them.
"""
__version__ = "1.0.0"
