"""Exception hierarchy shared by all graphfb modules."""


class InputError(ValueError):
    """Raised when an argument violates an operation's input contract."""


class NumericalError(RuntimeError):
    """Raised when a computation produces results outside guaranteed bounds."""


class SolverError(NumericalError):
    """Raised when an iterative solver fails to converge or certify."""


class EigensolverError(SolverError):
    """Raised when an underlying symmetric eigendecomposition does not converge."""
