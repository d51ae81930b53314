"""Exception types shared across the toolkit."""


class LexkitError(Exception):
    """Base class for all toolkit errors."""


class ParseError(LexkitError):
    """A file could not be parsed (names the offending line where known)."""


class ValidationError(LexkitError):
    """Data violates an invariant (duplicate IDs, bad dimensions, non-finite values, ...)."""


class ArgumentError(LexkitError):
    """An operation was called with inconsistent or out-of-range arguments."""


class DegenerateSegmentError(LexkitError):
    """A segment (or word type) has no usable direction, e.g. a zero mean vector."""


class MemoryBudgetError(LexkitError):
    """A dense result would exceed the configured memory budget."""
