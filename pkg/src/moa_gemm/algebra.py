"""
Array algebra: scalar extension, outer product, reduction and the inner product
family. Hadamard, matrix and Kronecker products are all instances of ipophp.
"""

from typing import Any, Optional, Sequence

import numpy as np

from .core import DenseArray, gamma, psi, psi_span
from .errors import (
    LayoutMismatchError,
    NoIdentityError,
    RankError,
    ShapeMismatchError,
    TypeMismatchError,
)
from .trace import AccessLog
from .types import AccessKind, ElementType, Layout, Product, ScalarOp, Shape


def _same_element(left: DenseArray, right: DenseArray) -> None:
    if left.element is not right.element:
        raise TypeMismatchError(
            f"mixed element types {left.element.value} and {right.element.value}"
        )


def _require_matrix(a: DenseArray, name: str) -> None:
    if a.dim != 2:
        raise RankError(f"{name} must be a matrix, got shape {list(a.shape.extents)}")


def _identity(f: ScalarOp, element: ElementType) -> Any:
    identity = f.identity(element)
    if identity is None:
        raise NoIdentityError(f"{f.value} has no identity element")
    return identity


def pointwise(f: ScalarOp, left: DenseArray, right: DenseArray) -> DenseArray:
    """
    Apply a scalar op componentwise to two arrays of the same shape.

    Indexing distributes over the result: psi(i, pointwise(f, left, right)) equals
    f(psi(i, left), psi(i, right)) at every full index i.

    Raises:
        ShapeMismatchError: On different shapes.
        LayoutMismatchError: On same shape but different layouts.
        TypeMismatchError: On different element types.
    """
    if left.shape != right.shape:
        raise ShapeMismatchError(
            f"shapes {list(left.shape.extents)} and {list(right.shape.extents)} differ"
        )
    _same_element(left, right)
    if left.layout is not right.layout:
        raise LayoutMismatchError(
            f"layouts {left.layout.value} and {right.layout.value} differ"
        )
    return DenseArray(left.shape, f.apply(left.data, right.data), left.layout, left.element)


def scalar_extend(f: ScalarOp, s: Any, a: DenseArray) -> DenseArray:
    """
    Combine one scalar with every component of an array: f(s, component).

    Args:
        f (ScalarOp): Scalar function.
        s (Any): A Python/numpy scalar or a scalar DenseArray.
        a (DenseArray): Array operand.

    Raises:
        TypeMismatchError: If `s` and `a` hold different element types.
    """
    if isinstance(s, DenseArray):
        s = s.item
    try:
        element = ElementType.of(s)
    except TypeError as exc:
        raise TypeMismatchError(str(exc)) from exc
    if element is not a.element:
        raise TypeMismatchError(
            f"scalar of type {element.value} cannot extend a {a.element.value} array"
        )
    value = element.dtype.type(s)
    return DenseArray(a.shape, f.apply(value, a.data), a.layout, a.element)


def outer(f: ScalarOp, left: DenseArray, right: DenseArray) -> DenseArray:
    """
    Outer product: shape concat(shape(left), shape(right)), component
    f(psi(i, left), psi(j, right)) at concat(i, j). A scalar `left` degenerates to
    scalar extension over `right`.
    """
    _same_element(left, right)
    nd = f.ufunc.outer(left.to_ndarray(), right.to_ndarray())
    layout = right.layout if left.dim == 0 else left.layout
    return DenseArray.from_ndarray(nd, layout, left.element)


def reduce(f: ScalarOp, a: DenseArray) -> DenseArray:
    """
    Fold the leading dimension with `f`, left to right from its identity.

    Returns:
        DenseArray: Shape drop(1, shape(a)). An empty leading extent yields
        an array filled with the identity.

    Raises:
        RankError: If `a` is a scalar.
        NoIdentityError: If `f` has no identity element.
    """
    if a.dim < 1:
        raise RankError("reduce needs an array of rank >= 1")
    sub = a.shape.drop(1)
    acc = np.full(sub.size, _identity(f, a.element), dtype=a.element.dtype)
    # explicit left fold: numpy's own reductions sum floats pairwise
    for k in range(a.shape[0]):
        acc = f.ufunc(acc, psi([k], a).data)
    return DenseArray(sub, acc, a.layout, a.element)


def stack(
    parts: Sequence[DenseArray],
    item_shape: Optional[Shape] = None,
    element: Optional[ElementType] = None,
) -> DenseArray:
    """
    Stack same-shaped row-major arrays along a new leading dimension.

    `item_shape` and `element` are only needed when `parts` is empty.
    """
    if parts:
        item_shape = parts[0].shape
        element = parts[0].element
        for part in parts:
            if part.shape != item_shape:
                raise ShapeMismatchError("stacked parts must share one shape")
            _same_element(parts[0], part)
    item_shape = item_shape or Shape()
    element = element or ElementType.F64
    data = (
        np.concatenate([part.with_layout(Layout.ROW_MAJOR).data for part in parts])
        if parts
        else np.empty(0, dtype=element.dtype)
    )
    return DenseArray(Shape((len(parts),)).concat(item_shape), data, Layout.ROW_MAJOR, element)


def inner(
    f: ScalarOp,
    g: ScalarOp,
    left: DenseArray,
    right: DenseArray,
    trace: Optional[AccessLog] = None,
) -> DenseArray:
    """
    Generalised inner product of two row-major matrices.

    Row i of the result is the f-fold, k ascending, of
    scalar_extend(g, left[i, k], row k of right). Every operand is read contiguously:
    the only access to `right` is whole rows. With f=ADD, g=MUL this is GEMM.

    Args:
        f (ScalarOp): Reducing op (replaces the sum).
        g (ScalarOp): Combining op (replaces the product).
        left (DenseArray): Shape [m, n].
        right (DenseArray): Shape [n, p].
        trace (AccessLog, optional): Receives every A/B read and C write,
            tagged with the (i, k) step.

    Raises:
        RankError: If an operand is not a matrix.
        ShapeMismatchError: If the inner extents differ.
        LayoutMismatchError: If an operand is not row-major.
    """
    _require_matrix(left, "left operand")
    _require_matrix(right, "right operand")
    m, n = left.shape.extents
    n_r, p = right.shape.extents
    if n != n_r:
        raise ShapeMismatchError(f"inner extents differ: {n} vs {n_r}")
    _same_element(left, right)
    if left.layout is not Layout.ROW_MAJOR or right.layout is not Layout.ROW_MAJOR:
        raise LayoutMismatchError("inner product operands must be row-major")

    element = left.element
    identity = _identity(f, element)
    b_rows = [psi([k], right).data for k in range(n)]
    out = np.empty(m * p, dtype=element.dtype)
    for i in range(m):
        a_row = psi([i], left).data
        acc = np.full(p, identity, dtype=element.dtype)
        for k in range(n):
            if trace is not None:
                coords = {"i": i, "k": k}
                trace.add(AccessKind.READ, "A", gamma([i, k], left.shape), coords)
                for offset in psi_span([k], right):
                    trace.add(AccessKind.READ, "B", offset, coords)
                for offset in range(i * p, (i + 1) * p):
                    trace.add(AccessKind.WRITE, "C", offset, coords)
            # acc = f(acc, g(A[i, k], B[k, :])), k ascending
            acc = f.ufunc(acc, g.ufunc(a_row[k], b_rows[k]))
        out[i * p : (i + 1) * p] = acc
    return DenseArray(Shape((m, p)), out, Layout.ROW_MAJOR, element)


def ipophp(
    product: Product,
    left: DenseArray,
    right: DenseArray,
    f: ScalarOp = ScalarOp.ADD,
    g: ScalarOp = ScalarOp.MUL,
    trace: Optional[AccessLog] = None,
) -> DenseArray:
    """
    The one routine behind the Hadamard, inner and Kronecker products.

    HADAMARD is the degenerate outer product (g componentwise, no reduction),
    INNER reduces g-scaled rows with f, and KRONECKER is outer(g) followed by
    a pure index permutation to shape [m*p, n*q].
    """
    product = Product(product)
    if product is Product.HADAMARD:
        return pointwise(g, left, right)
    if product is Product.INNER:
        return inner(f, g, left, right, trace)
    _require_matrix(left, "left operand")
    _require_matrix(right, "right operand")
    m, n = left.shape.extents
    p, q = right.shape.extents
    blocks = outer(g, left.with_layout(Layout.ROW_MAJOR), right.with_layout(Layout.ROW_MAJOR))
    nd = blocks.to_ndarray().transpose(0, 2, 1, 3).reshape(m * p, n * q)
    return DenseArray.from_ndarray(nd, Layout.ROW_MAJOR, left.element)


def gemm_moa(A: DenseArray, B: DenseArray, trace: Optional[AccessLog] = None) -> DenseArray:
    """
    Matrix multiply with contiguous access: C[i, :] accumulates A[i, k] * B[k, :]
    for k ascending. Equal to inner(ADD, MUL, A, B).

    Example:
        >>> A = DenseArray.from_nested([[1, 2], [3, 4]])
        >>> B = DenseArray.from_nested([[5, 6], [7, 8]])
        >>> gemm_moa(A, B).to_nested()
        [[19, 22], [43, 50]]
    """
    return ipophp(Product.INNER, A, B, trace=trace)


def gemm_naive(A: DenseArray, B: DenseArray, trace: Optional[AccessLog] = None) -> DenseArray:
    """
    Reference oracle: the textbook i-j-k loop, dotting row i of A with column j
    of B, k ascending from zero. Reads of B stride by p.
    """
    _require_matrix(A, "left operand")
    _require_matrix(B, "right operand")
    m, n = A.shape.extents
    n_b, p = B.shape.extents
    if n != n_b:
        raise ShapeMismatchError(f"inner extents differ: {n} vs {n_b}")
    _same_element(A, B)
    a = A.with_layout(Layout.ROW_MAJOR).data
    b = B.with_layout(Layout.ROW_MAJOR).data
    dtype = A.element.dtype
    out = np.zeros(m * p, dtype=dtype)
    for i in range(m):
        for j in range(p):
            acc = dtype.type(0)
            for k in range(n):
                if trace is not None:
                    coords = {"i": i, "j": j, "k": k}
                    trace.add(AccessKind.READ, "A", i * n + k, coords)
                    trace.add(AccessKind.READ, "B", k * p + j, coords)
                acc = acc + a[i * n + k] * b[k * p + j]
            out[i * p + j] = acc
            if trace is not None:
                trace.add(AccessKind.WRITE, "C", i * p + j, {"i": i, "j": j})
    return DenseArray(Shape((m, p)), out, Layout.ROW_MAJOR, A.element)


def hadamard(A: DenseArray, B: DenseArray) -> DenseArray:
    """Elementwise product of two same-shaped matrices."""
    _require_matrix(A, "left operand")
    _require_matrix(B, "right operand")
    return ipophp(Product.HADAMARD, A, B)


def kron(A: DenseArray, B: DenseArray) -> DenseArray:
    """
    Kronecker product: result[i*p + k, j*q + s] = A[i, j] * B[k, s].

    Example:
        >>> kron(DenseArray.from_nested([[1, 2]]), DenseArray.from_nested([[0, 1]])).to_nested()
        [[0, 1, 0, 2]]
    """
    return ipophp(Product.KRONECKER, A, B)
