"""Exception types shared across the package."""


class CmcLabError(Exception):
    """Base class for all package-specific errors."""


class DomainError(CmcLabError, ValueError):
    """A geometric query left the region where the operation is defined."""


class RangeError(CmcLabError, ValueError):
    """A numeric argument fell outside its admissible interval."""


class ParameterError(CmcLabError, ValueError):
    """Invalid parameter combination (H <= 0, empty sequence, ...)."""


class ConfigError(CmcLabError, ValueError):
    """Malformed experiment configuration or mismatched inputs."""


class NumericsError(CmcLabError, RuntimeError):
    """A numeric routine failed to reach its tolerance."""


class PartialCoverageError(CmcLabError, ValueError):
    """A curve left the region covered by a grid mask.

    ``samples`` holds the indices of the offending curve samples.
    """

    def __init__(self, message: str, samples=None):
        super().__init__(message)
        self.samples = list(samples) if samples is not None else []
