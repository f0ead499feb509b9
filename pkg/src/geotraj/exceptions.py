"""Exception hierarchy shared across the package."""


class GeoTrajError(Exception):
    """Base class for all package errors."""


class DimensionError(GeoTrajError, ValueError):
    pass


class DomainError(GeoTrajError, ValueError):
    pass


class ModelError(GeoTrajError, ValueError):
    """A sampled operator violates a physical requirement (e.g. non-Hermitian)."""


class ConvergenceError(GeoTrajError, RuntimeError):
    pass


class ParameterError(GeoTrajError, ValueError):
    pass


class DegenerateLoopError(ParameterError):
    pass


class SingularDriftError(ParameterError):
    pass


class TopologyError(GeoTrajError, ValueError):
    pass


class UnknownGateError(GeoTrajError, KeyError):
    pass


class PhaseUndefinedWarning(UserWarning):
    """Tr(U^dag V) vanished, so no global phase could be aligned."""
