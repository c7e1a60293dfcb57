"""Exception types shared across the simulator modules."""


class OptomechError(Exception):
    """Base class for all library errors."""


class ParameterError(OptomechError):
    """A physical parameter is outside its admissible range."""


class UnphysicalCovarianceError(OptomechError):
    """A covariance matrix violates symmetry or the uncertainty principle."""


class BODomainError(OptomechError):
    """A photon branch falls outside the domain of the adiabatic reduction."""


class IntegrationError(OptomechError):
    """The ODE integrator failed (step underflow or step budget exceeded)."""


class ConvergenceError(OptomechError):
    """An iterative solve did not converge.

    Carries the last iterate and its residual for diagnostics.
    """

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class StabilityError(OptomechError):
    """A steady-state solve was requested for an unstable drift matrix."""


class ConfigError(OptomechError):
    """A run configuration failed to parse or validate."""
