"""Exception hierarchy shared by the numerical kernels and the verdict engine."""


class EvlabError(Exception):
    """Base class for all errors raised by evlab."""


class DimensionMismatch(EvlabError, ValueError):
    pass


class SingularMatrix(EvlabError, ArithmeticError):
    def __init__(self, message, pivot_index=None):
        super().__init__(message)
        self.pivot_index = pivot_index


class MuInSpectrum(EvlabError, ArithmeticError):
    """Resolvent requested at a point numerically inside the spectrum."""

    def __init__(self, mu, message=None):
        super().__init__(message or f"mu={mu!r} is numerically in the spectrum")
        self.mu = mu


class MuZero(EvlabError, ValueError):
    pass


class NoConvergence(EvlabError, ArithmeticError):
    pass


class DegenerateEigenvalue(EvlabError, ArithmeticError):
    pass


class SymbolNotConjugateSymmetric(EvlabError, ValueError):
    pass


class NormTooLarge(EvlabError, ValueError):
    pass


class OutOfDomain(EvlabError, ValueError):
    pass


class DirectionViolated(EvlabError, ValueError):
    pass


class PreconditionFailed(EvlabError, ValueError):
    pass


class NotSymmetric(EvlabError, ValueError):
    pass


class NotPositiveDefinite(EvlabError, ValueError):
    pass
