"""Exception hierarchy for the solver."""


class VortexError(Exception):
    """Base class for all solver errors."""


class DomainError(VortexError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConfigError(VortexError, ValueError):
    """Invalid discretization or run configuration."""


class DimensionError(VortexError, ValueError):
    """Coefficient vector does not match the basis size."""


class NumericalError(VortexError, ArithmeticError):
    """A numerical factorization or evaluation failed."""


class UnsupportedBasis(VortexError):
    """The requested quantity needs derivatives the basis does not provide."""


class IntervalError(VortexError, ValueError):
    """Propagation constant outside the admissible existence interval."""


class NoSignChange(VortexError):
    """Nehari scaling has no root because Gamma does not change sign."""

    def __init__(self, message, gamma_zero=None, gamma_inf=None):
        super().__init__(message)
        self.gamma_zero = gamma_zero
        self.gamma_inf = gamma_inf


class NoBracket(VortexError):
    """No shooting bracket in the core amplitude was found."""


class ShotOverflow(VortexError, ArithmeticError):
    """A shooting trajectory diverged."""


class NotConverged(VortexError):
    """An iterative solve stopped before meeting its tolerance.

    ``best`` carries the best iterate found (a ``SolveResult``) when available.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
