"""Exception hierarchy shared across the package."""
from pathlib import Path


class SoftRobustError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(SoftRobustError, ValueError):
    """Raised when a numeric argument falls outside its documented range."""


class InvalidModelError(InvalidParameterError):
    """Raised when an MDP component fails shape, range or probability validation."""


class AssumptionViolationError(SoftRobustError):
    """Raised when a chain or feature map breaks a structural assumption."""


class NoUniqueStationaryError(AssumptionViolationError):
    """Raised when a Markov chain admits no unique stationary distribution."""


class NumericalFailureError(SoftRobustError):
    """Raised when a linear solve is singular or its residual is out of tolerance."""


class EnvStepError(SoftRobustError):
    """Raised when an environment handle cannot advance."""


class ConfigError(SoftRobustError):
    """Raised when an experiment configuration cannot be loaded or validated."""


class DivergenceError(SoftRobustError):
    """Raised when actor parameters grow past the divergence threshold."""


class ResultsIOError(SoftRobustError):
    """Raised when results cannot be read from or written to disk."""

    def __init__(self, path: Path, message: str) -> None:
        self.path = Path(path)
        super().__init__(f"{self.path}: {message}")
