"""Exception hierarchy shared by all modules."""


class TopoCQEDError(Exception):
    """Base class for every error raised by the package."""


class DomainError(TopoCQEDError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedRegimeError(TopoCQEDError, ValueError):
    """Analytic forms requested outside the regime they are derived for."""


class SingularityError(TopoCQEDError, ZeroDivisionError):
    """A pole or a singular linear system was hit."""


class UnreachableCouplingError(TopoCQEDError, ValueError):
    """The requested coupling cannot be realized by the circuit."""


class AmbiguityError(TopoCQEDError, ValueError):
    """A transcendental inversion has several admissible roots."""

    def __init__(self, message, roots=()):
        super().__init__(message)
        self.roots = tuple(roots)


class NoOscillationError(TopoCQEDError, ValueError):
    """A population trace shows no revival to extract a period from."""


class DegenerateDecompositionError(TopoCQEDError, ValueError):
    """Partial fractions requested at an exceptional (double) pole."""


class ConvergenceError(TopoCQEDError, RuntimeError):
    """An iterative or direct solve did not reach its residual target."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = tuple(history)


class CutoffError(ConvergenceError):
    """Photon-number truncation is not converged."""


class IntegratorError(TopoCQEDError, RuntimeError):
    """Time propagation produced non-finite values."""
