"""Exception types shared across the package.

The CLI maps each class to a distinct process exit code.
"""


class ParameterError(ValueError):
    """Inputs violate a documented precondition."""


class CapacityError(RuntimeError):
    """A request exceeds an enumeration or memory budget."""


class NumericError(ArithmeticError):
    """An iterative routine failed to converge or lost precision."""


class GateError(AssertionError):
    """A cross-check between two independent computations disagreed."""
