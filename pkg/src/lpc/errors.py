"""Exception types shared across the package."""


class LpcError(Exception):
    """Base class for errors raised by this package."""


class DataError(LpcError, ValueError):
    """Malformed or unusable input data."""


class NumericalError(LpcError, RuntimeError):
    """A linear program could not be solved to the required accuracy."""


class EmptyUncertaintySet(LpcError):
    """No distribution satisfies the expectation constraints ``a <= E[phi] <= b``."""
