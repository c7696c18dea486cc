"""Exception hierarchy shared by all modules."""


class AnnulusDivError(Exception):
    """Base class for errors raised by this package."""


class DomainError(AnnulusDivError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class SolvabilityError(AnnulusDivError, ValueError):
    """A source violates the mean-zero compatibility condition.

    The offending mean is kept on the exception so callers can report it.
    """

    def __init__(self, message, mean=None):
        super().__init__(message)
        self.mean = mean


class ResolutionError(AnnulusDivError, ValueError):
    """Requested band limit cannot be resolved on the given grid."""


class ShapeError(AnnulusDivError, ValueError):
    """Sampled arrays live on mismatched grids or have the wrong shape."""


class ConfigurationError(AnnulusDivError, ValueError):
    """Invalid run configuration or inconsistent pipeline inputs."""


class StencilError(AnnulusDivError, ValueError):
    """A finite-difference stencil leaves the domain of the evaluator."""
