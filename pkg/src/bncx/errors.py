"""Exception hierarchy shared by all modules."""


class BncxError(Exception):
    """Base class for errors raised by this package."""


class StructuralError(BncxError, ValueError):
    """Scopes, graphs or trees that violate a structural requirement."""


class NumericalError(BncxError, ArithmeticError):
    """A positive quantity divided by zero (an inconsistent calibration)."""


class DegenerateInstanceError(BncxError, ValueError):
    """The instance has probability zero, so no class is meaningful."""


class CapExceeded(BncxError):
    """An exhaustive enumeration would exceed its configured size cap."""


class UsageError(BncxError, ValueError):
    """A query whose preconditions do not hold (e.g. instance not in class)."""


class CircuitFormatError(BncxError, ValueError):
    """Malformed mvnnf circuit text."""
