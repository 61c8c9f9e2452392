"""Exception hierarchy shared by the solver modules."""


class BinghamDGError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(BinghamDGError, ValueError):
    """A parameter is outside its admissible range."""


class StateValidityError(BinghamDGError):
    """A solution state has non-positive depth at an evaluation point."""


class SolverError(BinghamDGError):
    """Linear or nonlinear solve failure."""


class ConfigError(BinghamDGError):
    """Malformed or inconsistent run configuration."""


class SimulationAborted(BinghamDGError):
    """A time step failed; carries the last good state and the stats so far."""

    def __init__(self, message, state=None, stats=None):
        super().__init__(message)
        self.state = state
        self.stats = stats
