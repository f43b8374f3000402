"""Package-wide exception types."""


class GridMismatch(ValueError):
    """Fields or states do not share the same grid/shape."""


class NearZeroCharge(ArithmeticError):
    """Charge magnitude too small for ratio functionals to be well defined."""


class NumericalFailure(RuntimeError):
    """A run produced non-finite values or failed to converge where required."""
