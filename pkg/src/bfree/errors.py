"""Exception types shared across the package."""


class BFreeError(Exception):
    """Base class for library errors."""


class InputError(BFreeError, ValueError):
    """Bad user input: unreadable files, malformed specs, invalid parameters."""


class GeometryError(BFreeError, ValueError):
    """Windows with mismatched offset or length were combined."""


class ExactnessError(BFreeError):
    """A computation would silently leave its exactness boundary."""


class LcmOverflowError(BFreeError, ArithmeticError):
    """An lcm exceeded the configured cap where a period-exact path is required."""


class CapExceededError(BFreeError):
    """An enumeration budget was exceeded and no fallback was requested."""


class MemoryBudgetError(BFreeError, MemoryError):
    """Exact-set counting would exceed its memory budget."""


class UncertifiedError(BFreeError):
    """Too many positions could not be certified."""
