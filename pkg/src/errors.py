"""Exception and warning types shared by every formula module."""


class WishartLabError(Exception):
    """Base class for all library errors."""


class ParameterError(WishartLabError, ValueError):
    """Invalid model parameters, configuration or query."""


class DomainError(WishartLabError, ValueError):
    """Special-function or numerical routine called outside its domain."""


class CoincidentNodesError(WishartLabError, ValueError):
    """Two nodes (eigenvalues, arguments) coincide where distinctness is required."""


class ConvergenceError(WishartLabError, ArithmeticError):
    """A series, quadrature or eigensolver exhausted its iteration caps."""


class CancellationWarning(UserWarning):
    """An alternating series is expected to lose many significant digits."""
