"""Exception types shared across the package."""


class FinslerTDAError(Exception):
    """Base class for all package errors."""


class DomainError(FinslerTDAError, ValueError):
    """A point lies outside the domain on which a metric is defined."""


class DimensionMismatch(FinslerTDAError, ValueError):
    pass


class ConvergenceError(FinslerTDAError, RuntimeError):
    """The minimax solver hit its iteration cap before certifying ``tol``.

    The best result found so far is attached as ``result``; builders add the
    offending simplex as ``simplex``.
    """

    def __init__(self, message, result=None, simplex=None):
        super().__init__(message)
        self.result = result
        self.simplex = simplex


class SamplingError(FinslerTDAError, RuntimeError):
    pass


class DegenerateGradient(FinslerTDAError, ValueError):
    pass


class VertexSetMismatch(FinslerTDAError, ValueError):
    pass


class InvalidFiltration(FinslerTDAError, ValueError):
    pass


class InfiniteMismatch(FinslerTDAError, ValueError):
    """Two diagrams carry different numbers of essential (infinite) bars."""


class InvalidCorrespondence(FinslerTDAError, ValueError):
    pass


class SizeLimitExceeded(FinslerTDAError, ValueError):
    pass


class DegenerateNormal(FinslerTDAError, ValueError):
    pass
