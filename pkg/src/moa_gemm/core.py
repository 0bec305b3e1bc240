"""
Array core: the DenseArray value type and the psi calculus primitives
(shape, gamma, rav, iota, psi) every other module is defined from.
"""

from dataclasses import dataclass
from typing import Any, Iterator, Optional, Sequence

import numpy as np

from .errors import (
    InvalidIndexError,
    LayoutMismatchError,
    OffsetOutOfRangeError,
    RankError,
    ShapeMismatchError,
    TypeMismatchError,
)
from .types import ElementType, IndexVector, Layout, Shape, as_index, as_shape


@dataclass(frozen=True, eq=False)
class DenseArray:
    """
    An immutable array: a flat element buffer laid out by a gamma function.

    `data` is the rav of the array under `layout`, so the component at full
    index i lives at data[gamma(i, shape, layout)]. The buffer is read-only.

    Attributes:
        shape (Shape): Extents of the array; the empty shape is a scalar.
        data (np.ndarray): 1-d buffer of length pi(shape).
        layout (Layout): Row-major (default) or column-major.
        element (ElementType): F64 or I64; inferred from `data` when omitted.
    """

    shape: Shape
    data: np.ndarray
    layout: Layout = Layout.ROW_MAJOR
    element: ElementType = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        shape = as_shape(self.shape)
        element = self.element
        src = np.asarray(self.data)
        if element is None:
            element = ElementType.of(src.dtype)
        dtype = element.dtype
        if src.size and not np.can_cast(src.dtype, dtype, "same_kind"):
            raise TypeMismatchError(
                f"{src.dtype} components cannot be held as {element.value} without loss"
            )
        data = self.data
        if (
            isinstance(data, np.ndarray)
            and data.dtype == dtype
            and not data.flags.writeable
        ):
            buf = data.reshape(-1)
        else:
            buf = np.array(data, dtype=dtype).reshape(-1)
            buf.flags.writeable = False
        if buf.size != shape.size:
            raise ShapeMismatchError(
                f"buffer holds {buf.size} elements but shape {shape.extents} needs {shape.size}"
            )
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "data", buf)
        object.__setattr__(self, "layout", Layout(self.layout))
        object.__setattr__(self, "element", element)

    @classmethod
    def from_ndarray(
        cls,
        values: Any,
        layout: Layout = Layout.ROW_MAJOR,
        element: Optional[ElementType] = None,
    ) -> "DenseArray":
        """Build from a logical n-d array, flattening it in `layout` order."""
        nd = np.asarray(values)
        if element is None:
            element = ElementType.of(nd.dtype)
        return cls(Shape(nd.shape), np.ravel(nd, order=layout.order), layout, element)

    @classmethod
    def from_nested(
        cls,
        values: Any,
        layout: Layout = Layout.ROW_MAJOR,
        element: Optional[ElementType] = None,
    ) -> "DenseArray":
        """Build from nested Python lists, e.g. [[1, 2], [3, 4]]."""
        nd = np.array(values)
        if nd.size == 0 and element is None:
            element = ElementType.F64
        return cls.from_ndarray(nd, layout, element)

    @classmethod
    def from_components(
        cls,
        shape: "Shape | Sequence[int]",
        values: Sequence[Any],
        layout: Layout = Layout.ROW_MAJOR,
        element: Optional[ElementType] = None,
    ) -> "DenseArray":
        """
        Build from components listed in row-major (iota) order.

        Args:
            shape: Target shape.
            values: pi(shape) components, in the enumeration order of iota.
            layout: Layout the result is stored in.
            element: Element type; inferred when omitted.
        """
        shape = as_shape(shape)
        nd = np.asarray(values)
        if element is None:
            element = ElementType.of(nd.dtype) if nd.size else ElementType.F64
        if nd.size != shape.size:
            raise ShapeMismatchError(
                f"{nd.size} components cannot fill shape {shape.extents}"
            )
        nd = nd.reshape(shape.extents)
        return cls.from_ndarray(nd, layout, element)

    @classmethod
    def scalar(cls, value: Any, element: Optional[ElementType] = None) -> "DenseArray":
        return cls(Shape(), np.asarray([value]), Layout.ROW_MAJOR, element)

    @property
    def dim(self) -> int:
        return self.shape.dim

    @property
    def size(self) -> int:
        return self.shape.size

    @property
    def item(self) -> Any:
        """The single component of a scalar array."""
        if self.shape.dim != 0:
            raise RankError(f"item needs a scalar, got shape {self.shape.extents}")
        return self.data[0]

    def to_ndarray(self) -> np.ndarray:
        """Logical n-d view of the buffer (read-only)."""
        return self.data.reshape(self.shape.extents, order=self.layout.order)

    def to_nested(self) -> Any:
        return self.to_ndarray().tolist()

    def with_layout(self, layout: Layout) -> "DenseArray":
        """Same components, re-flattened under another layout."""
        if layout is self.layout:
            return self
        return DenseArray.from_ndarray(self.to_ndarray(), layout, self.element)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DenseArray):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.layout is other.layout
            and self.element is other.element
            and bool(np.array_equal(self.data, other.data))
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"DenseArray(shape={list(self.shape.extents)}, layout={self.layout.value}, "
            f"element={self.element.value}, data={self.data.tolist()})"
        )


def shape_of(a: DenseArray) -> Shape:
    """
    Return the shape of an array.

    Dimensionality is `len(shape)` and the component count is `shape.size`.

    Example:
        >>> shape_of(DenseArray.scalar(7)).size
        1
    """
    return a.shape


def gamma(
    idx: "IndexVector | Sequence[int]",
    s: "Shape | Sequence[int]",
    layout: Layout = Layout.ROW_MAJOR,
) -> int:
    """
    Map a full index to its flat offset under a layout.

    Row-major is the Horner evaluation ((i0*s1 + i1)*s2 + i2)...; column-major
    is its mirror with the leading dimension fastest.

    Args:
        idx: Full valid index for `s`.
        s: Array shape.
        layout: Layout function to apply.

    Returns:
        int: Offset in [0, pi(s)).

    Raises:
        InvalidIndexError: If `idx` is not a full valid index of `s`.
    """
    idx, s = as_index(idx), as_shape(s)
    if not idx.is_full_for(s):
        raise InvalidIndexError(
            f"index {list(idx.coords)} is not a full valid index of shape {list(s.extents)}"
        )
    if s.dim == 0:
        return 0
    return int(np.ravel_multi_index(idx.coords, s.extents, order=layout.order))


def gamma_inverse(
    offset: int,
    s: "Shape | Sequence[int]",
    layout: Layout = Layout.ROW_MAJOR,
) -> IndexVector:
    """
    Invert gamma: the unique full index stored at `offset`.

    Raises:
        OffsetOutOfRangeError: If offset is outside [0, pi(s)).
    """
    s = as_shape(s)
    if not 0 <= offset < s.size:
        raise OffsetOutOfRangeError(
            f"offset {offset} outside [0, {s.size}) for shape {list(s.extents)}"
        )
    if s.dim == 0:
        return IndexVector()
    coords = np.unravel_index(offset, s.extents, order=layout.order)
    return IndexVector(tuple(int(c) for c in coords))


def gamma_prefix(idx: "IndexVector | Sequence[int]", s: "Shape | Sequence[int]") -> int:
    """
    Row-major offset where the subarray selected by a (prefix) index starts.

    Equals gamma(idx padded with zeros, s) whenever that padded index is valid,
    and stays defined when the suffix shape has a zero extent.
    """
    idx, s = as_index(idx), as_shape(s)
    if not idx.is_valid_for(s):
        raise InvalidIndexError(
            f"index {list(idx.coords)} is not valid for shape {list(s.extents)}"
        )
    q = len(idx)
    lead = gamma(idx, s.take(q)) if q else 0
    return lead * s.drop(q).size


def psi_span(idx: "IndexVector | Sequence[int]", a: DenseArray) -> range:
    """Buffer offsets occupied by `psi(idx, a)` in a row-major array."""
    if a.layout is not Layout.ROW_MAJOR:
        raise LayoutMismatchError("contiguous spans exist only for row-major arrays")
    start = gamma_prefix(idx, a.shape)
    return range(start, start + a.shape.drop(len(as_index(idx))).size)


def rav(a: DenseArray) -> DenseArray:
    """Flatten an array to a vector in its layout order."""
    return DenseArray(Shape((a.size,)), a.data, Layout.ROW_MAJOR, a.element)


def iota(s: "Shape | Sequence[int]") -> DenseArray:
    """
    Generate every full valid index of a shape.

    Returns:
        DenseArray: Integer array of shape [pi(s), dim(s)], one index per row,
        in row-major enumeration order. The empty shape yields one empty index.
    """
    s = as_shape(s)
    if s.dim == 0:
        rows = np.zeros((1, 0), dtype=np.int64)
    else:
        rows = np.indices(s.extents, dtype=np.int64).reshape(s.dim, -1).T
    return DenseArray.from_ndarray(rows, Layout.ROW_MAJOR, ElementType.I64)


def index_vectors(s: "Shape | Sequence[int]") -> Iterator[IndexVector]:
    """Iterate the rows of iota(s) as IndexVectors."""
    for row in iota(s).to_ndarray():
        yield IndexVector(tuple(int(c) for c in row))


def psi(idx: "IndexVector | Sequence[int]", a: DenseArray) -> DenseArray:
    """
    Index an array with a full or prefix index vector.

    A full index returns a scalar array; a prefix of length q returns the
    subarray of shape drop(q, shape). For row-major arrays the subarray is a
    contiguous slice of the buffer. The empty index returns the whole array.

    Raises:
        InvalidIndexError: If `idx` is not valid for `a.shape`.
    """
    idx = as_index(idx)
    if not idx.is_valid_for(a.shape):
        raise InvalidIndexError(
            f"index {list(idx.coords)} is not valid for shape {list(a.shape.extents)}"
        )
    sub = a.shape.drop(len(idx))
    if a.layout is Layout.ROW_MAJOR:
        span = psi_span(idx, a)
        return DenseArray(sub, a.data[span.start : span.stop], a.layout, a.element)
    picked = np.asarray(a.to_ndarray()[idx.coords])
    return DenseArray.from_ndarray(picked, a.layout, a.element)
