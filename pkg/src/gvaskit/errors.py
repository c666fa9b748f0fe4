"""Exception types shared across the toolkit.

Every recoverable, typed failure mode gets its own class so that callers
(and the CLI exit-code mapping) can distinguish "the instance is too big"
from "the input is wrong" from "the operation is not enabled".
"""

from __future__ import annotations


class GvasError(Exception):
    """Base class for all toolkit errors."""


class ParseError(GvasError):
    """Malformed text input, with a byte-precise location."""

    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.expected = expected
        suffix = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{line}:{column}: {message}{suffix}")


class CapExceededError(GvasError):
    """A value crossed the configured cap; the instance is beyond desk scale."""


class ResourceLimitError(GvasError):
    """Grid, relation store, or search frontier crossed its configured limit."""


class NegativeCounterError(GvasError):
    """Running a word would drive a counter below zero."""

    def __init__(self, index: int, position: int):
        self.index = index
        self.position = position
        super().__init__(f"counter {index} underflows at word position {position}")


class UnknownSymbolError(GvasError):
    """A word mentions a symbol the grammar does not know."""


class DimensionMismatchError(GvasError):
    """Vectors of incompatible lengths were combined."""


class ArityMismatchError(GvasError):
    """Predicate operands have incompatible arities."""


class NotInTableError(GvasError):
    """Requested pair is absent from the reachability table."""


class OutOfGridError(GvasError):
    """Configuration lies outside the table's grid."""


class InvalidPositionError(GvasError):
    """Position does not exist in the tree."""


class InvalidWitnessError(GvasError):
    """Embedding witness fails to replay on the given trees."""


class ChainUndefinedError(GvasError):
    """Liftings do not chain: post of one differs from pre of the next."""


class PreconditionError(GvasError):
    """Surgery precondition does not hold (no ordering between the trees)."""


class NotEnabledError(GvasError):
    """A pushdown step is not enabled in the given configuration."""

    def __init__(self, reason: str):
        self.reason = reason  # "stack-mismatch" or "counter-underflow"
        super().__init__(reason)


class OrdinalRangeError(GvasError):
    """Ordinal argument falls outside the supported range."""


class UnsupportedModelError(GvasError):
    """Model shape outside the supported fragment (e.g. multi-symbol pops)."""
