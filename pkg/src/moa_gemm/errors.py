"""
Exception hierarchy. Every error raised by the library derives from MoaError and
from the builtin exception a caller would naturally catch.
"""

from typing import Optional


class MoaError(Exception):
    """Base class for all library errors."""


class InvalidIndexError(MoaError, IndexError):
    """An index vector is out of bounds or too long for the shape."""


class InvalidArgumentError(MoaError, ValueError):
    """An argument is outside the range the operation accepts."""


class OffsetOutOfRangeError(MoaError, IndexError):
    """A flat offset falls outside its buffer."""


class ShapeMismatchError(MoaError, ValueError):
    """Operand shapes are incompatible."""


class LayoutMismatchError(ShapeMismatchError):
    """Operands share a shape but not a layout."""


class TypeMismatchError(MoaError, TypeError):
    """Operands hold different element types."""


class RankError(MoaError, ValueError):
    """An operand has the wrong dimensionality."""


class NoIdentityError(MoaError, ValueError):
    """A reduction was requested with an op that has no identity element."""


class NegativeExtentError(MoaError, ValueError):
    """A shape or loop extent is negative."""


class DivisibilityError(MoaError, ValueError):
    """A split or block size does not divide the extent exactly."""


class UnknownVariableError(MoaError, KeyError):
    """A transform or pragma names a loop variable the nest does not have."""


class NameCollisionError(MoaError, ValueError):
    """A loop variable or parameter name is used twice."""


class UnboundParameterError(MoaError, KeyError):
    """A nest references a parameter with no value."""


class NonAffineError(MoaError, ValueError):
    """An index expression multiplies two loop variables."""


class BudgetError(MoaError, ValueError):
    """A memory budget cannot hold even the smallest plan."""


class HardwareConfigError(MoaError, ValueError):
    """
    A hardware description failed to parse or validate.

    Attributes:
        key (Optional[str]): The offending configuration key, when known.
    """

    def __init__(self, message: str, key: Optional[str] = None) -> None:
        super().__init__(message)
        self.key = key


class VerificationError(MoaError):
    """A kernel disagreed with the oracle, so it will not be timed."""
