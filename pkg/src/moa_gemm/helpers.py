"""
Helper functions: array factories and access-tracing shortcuts.
"""

from contextlib import contextmanager
from typing import Generator, Optional, Sequence

import numpy as np

from .core import DenseArray
from .trace import AccessLog
from .types import ElementType, Layout, Shape, as_shape


def zeros(
    shape: "Shape | Sequence[int]",
    element: ElementType = ElementType.F64,
    layout: Layout = Layout.ROW_MAJOR,
) -> DenseArray:
    """An array of the given shape filled with zero."""
    s = as_shape(shape)
    return DenseArray(s, np.zeros(s.size, dtype=element.dtype), layout, element)


def zeros_like(a: DenseArray) -> DenseArray:
    return zeros(a.shape, a.element, a.layout)


def ones_like(a: DenseArray) -> DenseArray:
    return DenseArray(a.shape, np.ones(a.size, dtype=a.element.dtype), a.layout, a.element)


def identity(size: int, element: ElementType = ElementType.F64) -> DenseArray:
    """
    The size x size identity matrix.

    Example:
        >>> identity(2, ElementType.I64).to_nested()
        [[1, 0], [0, 1]]
    """
    return DenseArray.from_ndarray(np.eye(size, dtype=element.dtype), Layout.ROW_MAJOR, element)


def random_integer_matrix(
    rng: np.random.Generator, rows: int, cols: int, low: int = -9, high: int = 9
) -> DenseArray:
    """
    A row-major I64 matrix with entries drawn uniformly from [low, high].

    Small integer entries keep every product exact, so results can be compared
    bitwise whatever the accumulation order.
    """
    values = rng.integers(low, high, size=(rows, cols), endpoint=True, dtype=np.int64)
    return DenseArray.from_ndarray(values, Layout.ROW_MAJOR, ElementType.I64)


def random_shape(rng: np.random.Generator, max_rank: int = 4, max_extent: int = 5) -> Shape:
    """A shape of rank 0..max_rank with extents in 1..max_extent."""
    rank = int(rng.integers(0, max_rank, endpoint=True))
    return Shape(tuple(int(e) for e in rng.integers(1, max_extent, size=rank, endpoint=True)))


@contextmanager
def trace_accesses(log: Optional[AccessLog] = None) -> Generator[AccessLog, None, None]:
    """
    Context manager yielding an AccessLog to pass as `trace=` to kernels and
    the nest interpreter. Entries recorded inside a block that raises are
    rolled back; earlier entries of a reused log are kept.

    Args:
        log (AccessLog, optional): Existing log to append to. A new one is
            created when omitted.

    Yields:
        AccessLog: The log receiving accesses.

    Example:
        >>> with trace_accesses() as log:
        ...     gemm_moa(A, B, trace=log)
        >>> log.offsets("B", AccessKind.READ, where={"i": 0, "k": 0})
    """
    log = log if log is not None else AccessLog()
    with log.capture():
        yield log
