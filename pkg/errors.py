"""
Exception types shared by all packages.

Each subclasses a built-in so callers can catch either the specific
class or ValueError / RuntimeError.
"""

from typing import Optional

import numpy as np


class DomainError(ValueError):
    """Parameter outside the domain of a formula or geometry."""


class DiluteRegimeError(ValueError):
    """Volume fraction phi >= 1."""


class InfeasibleSplitError(ValueError):
    """Channel subdivision with lanes narrower than one diameter."""


class FreeEnergyError(ValueError):
    """Free energy requested on a nonpositive density."""


class ConfigError(ValueError):
    """Malformed or inconsistent experiment config."""


class SolverError(RuntimeError):
    """Time integration or quadrature refinement failed to converge."""

    def __init__(self, message: str, t_reached: float = float("nan"),
                 status: int = -1, nfev: int = 0):
        super().__init__(f"{message} (t_reached={t_reached:.6g}, status={status}, nfev={nfev})")
        self.t_reached = t_reached
        self.status = status
        self.nfev = nfev


class NewtonDivergence(SolverError):
    """Newton iteration did not converge; carries the last iterate."""

    def __init__(self, message: str, last_iterate: Optional[np.ndarray] = None,
                 residual: float = float("nan"), iterations: int = 0):
        RuntimeError.__init__(
            self, f"{message} (residual={residual:.3e} after {iterations} iterations)")
        self.last_iterate = last_iterate
        self.residual = residual
        self.iterations = iterations
        self.t_reached = float("nan")
        self.status = -1
        self.nfev = iterations


class SetupError(RuntimeError):
    """Initial configuration could not be constructed."""


class StageError(RuntimeError):
    """A harness stage failed; names the stage and keeps the cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
