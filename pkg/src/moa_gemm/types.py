"""
Types and value structures shared by the array algebra, the loop IR and the tracer.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, Optional, Sequence, Tuple

import numpy as np

from .errors import NegativeExtentError, TypeMismatchError


class Layout(str, Enum):
    """
    Enum of layout (gamma) functions relating a Cartesian index to a flat offset.

    Values:
        ROW_MAJOR: Last dimension varies fastest. The default everywhere.
        COL_MAJOR: Leading dimension varies fastest.
    """

    ROW_MAJOR = "row"
    COL_MAJOR = "col"

    @property
    def order(self) -> str:
        """numpy memory order letter for this layout."""
        return "C" if self is Layout.ROW_MAJOR else "F"


class ElementType(str, Enum):
    """
    Enum of element types an array may hold.

    Values:
        F64: 64-bit IEEE float.
        I64: 64-bit signed integer.
    """

    F64 = "f64"
    I64 = "i64"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float64) if self is ElementType.F64 else np.dtype(np.int64)

    @classmethod
    def of(cls, value: Any) -> "ElementType":
        """
        Classify a scalar value or numpy dtype.

        Args:
            value (Any): A Python/numpy scalar, or a numpy dtype.

        Returns:
            ElementType: The matching element type.

        Raises:
            TypeMismatchError: If the value is neither integral nor floating (bools included).
        """
        kind = value.kind if isinstance(value, np.dtype) else np.asarray(value).dtype.kind
        if kind in "iu":
            return cls.I64
        if kind == "f":
            return cls.F64
        raise TypeMismatchError(f"unsupported element kind {kind!r} for {value!r}")


class ScalarOp(str, Enum):
    """
    Enum of the binary scalar functions used by scalar extension, outer product
    and reduction.

    Values:
        ADD: Addition, identity 0.
        MUL: Multiplication, identity 1.
        SUB: Subtraction, no identity.
        MAX: Maximum, identity -inf (int64 minimum for integers).
        MIN: Minimum, identity +inf (int64 maximum for integers).
    """

    ADD = "add"
    MUL = "mul"
    SUB = "sub"
    MAX = "max"
    MIN = "min"

    @property
    def ufunc(self) -> np.ufunc:
        return _UFUNCS[self]

    def apply(self, left: Any, right: Any) -> Any:
        """Apply the op elementwise (numpy broadcasting rules)."""
        return self.ufunc(left, right)

    def identity(self, element: ElementType) -> Optional[Any]:
        """
        Identity element for this op in the given element type.

        Returns:
            Optional[Any]: A numpy scalar, or None when the op has no identity.
        """
        if self is ScalarOp.SUB:
            return None
        dtype = element.dtype
        if self is ScalarOp.ADD:
            return dtype.type(0)
        if self is ScalarOp.MUL:
            return dtype.type(1)
        if element is ElementType.F64:
            return dtype.type(-math.inf if self is ScalarOp.MAX else math.inf)
        info = np.iinfo(dtype)
        return dtype.type(info.min if self is ScalarOp.MAX else info.max)


_UFUNCS: Dict[ScalarOp, np.ufunc] = {
    ScalarOp.ADD: np.add,
    ScalarOp.MUL: np.multiply,
    ScalarOp.SUB: np.subtract,
    ScalarOp.MAX: np.maximum,
    ScalarOp.MIN: np.minimum,
}


class Product(str, Enum):
    """
    Enum of the products computed by the single ipophp routine.

    Values:
        HADAMARD: Elementwise product, no reduction.
        INNER: Inner product (matrix multiply when f=ADD, g=MUL).
        KRONECKER: Outer product reshaped to the block Kronecker layout.
    """

    HADAMARD = "hadamard"
    INNER = "inner"
    KRONECKER = "kronecker"


class AccessKind(str, Enum):
    """
    Enum of the memory access kinds recorded by an AccessLog.

    Values:
        READ: A load from an operand buffer.
        WRITE: A store into the result buffer.
    """

    READ = "read"
    WRITE = "write"


@dataclass(frozen=True)
class Shape:
    """
    The vector of extents of an array. The empty shape denotes a scalar.

    Attributes:
        extents (Tuple[int, ...]): Non-negative extent per dimension.
    """

    extents: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        extents = tuple(int(e) for e in self.extents)
        if any(e < 0 for e in extents):
            raise NegativeExtentError(f"shape extents must be >= 0, got {extents}")
        object.__setattr__(self, "extents", extents)

    @classmethod
    def of(cls, *extents: int) -> "Shape":
        return cls(tuple(extents))

    @property
    def dim(self) -> int:
        """Dimensionality: the length of the extents vector."""
        return len(self.extents)

    @property
    def size(self) -> int:
        """Total component count (pi). The empty product is 1."""
        return math.prod(self.extents)

    def drop(self, count: int) -> "Shape":
        """Shape without its first `count` extents."""
        return Shape(self.extents[count:])

    def take(self, count: int) -> "Shape":
        """Shape of only its first `count` extents."""
        return Shape(self.extents[:count])

    def concat(self, other: "Shape") -> "Shape":
        return Shape(self.extents + other.extents)

    def __len__(self) -> int:
        return len(self.extents)

    def __iter__(self) -> Iterator[int]:
        return iter(self.extents)

    def __getitem__(self, axis: int) -> int:
        return self.extents[axis]


@dataclass(frozen=True)
class IndexVector:
    """
    An index into an array: full when as long as the shape, prefix when shorter.

    Attributes:
        coords (Tuple[int, ...]): One coordinate per leading dimension.
    """

    coords: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @classmethod
    def of(cls, *coords: int) -> "IndexVector":
        return cls(tuple(coords))

    def is_valid_for(self, shape: Shape) -> bool:
        """True when 0 <= coords[d] < shape[d] for every coordinate present."""
        if len(self.coords) > shape.dim:
            return False
        return all(0 <= c < e for c, e in zip(self.coords, shape.extents))

    def is_full_for(self, shape: Shape) -> bool:
        return len(self.coords) == shape.dim and self.is_valid_for(shape)

    def padded(self, shape: Shape) -> "IndexVector":
        """The full index extending this prefix with zeros."""
        return IndexVector(self.coords + (0,) * (shape.dim - len(self.coords)))

    def concat(self, other: "IndexVector") -> "IndexVector":
        return IndexVector(self.coords + other.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[int]:
        return iter(self.coords)


def as_shape(value: "Shape | Sequence[int]") -> Shape:
    return value if isinstance(value, Shape) else Shape(tuple(value))


def as_index(value: "IndexVector | Sequence[int]") -> IndexVector:
    return value if isinstance(value, IndexVector) else IndexVector(tuple(value))


@dataclass
class AccessEntry:
    """
    Represents a single recorded memory access.

    Attributes:
        kind (AccessKind): READ or WRITE.
        buffer (str): Buffer name ("A", "B" or "C").
        offset (int): Flat offset into the buffer.
        coords (Dict[str, int]): Loop variable bindings at the time of access.
    """

    kind: AccessKind
    buffer: str
    offset: int
    coords: Dict[str, int] = field(default_factory=dict)
