"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """Input outside the documented domain of an operation."""


class NumericFailure(ArithmeticError):
    """An iterative numerical routine did not converge."""


class ResourceLimit(RuntimeError):
    """A configured size cap would be exceeded."""
