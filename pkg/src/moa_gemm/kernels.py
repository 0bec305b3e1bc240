"""
Desk-scale numpy GEMM kernels timed by the bench command.

Every kernel accumulates into a caller-zeroed `out` and walks one vector of
B (or of the C block) per Python step, so the kernels differ only in their
access order.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .errors import DivisibilityError, InvalidArgumentError, ShapeMismatchError

Block = Tuple[int, int, int]


def _dims(a: np.ndarray, b: np.ndarray, out: np.ndarray) -> Tuple[int, int, int]:
    m, n = a.shape
    n_b, p = b.shape
    if n != n_b or out.shape != (m, p):
        raise ShapeMismatchError(
            f"cannot multiply {a.shape} by {b.shape} into {out.shape}"
        )
    return m, n, p


def gemm_naive(a: np.ndarray, b: np.ndarray, out: np.ndarray) -> None:
    """i-j order: each C component is a dot of a row of A with a strided column of B."""
    m, _, p = _dims(a, b, out)
    for i in range(m):
        row = a[i, :]
        for j in range(p):
            out[i, j] += row @ b[:, j]


def gemm_contiguous(a: np.ndarray, b: np.ndarray, out: np.ndarray) -> None:
    """i-k order: C[i, :] += A[i, k] * B[k, :], reading B one whole row at a time."""
    m, n, _ = _dims(a, b, out)
    for i in range(m):
        row = out[i, :]
        for k in range(n):
            row += a[i, k] * b[k, :]


def gemm_blocked(
    a: np.ndarray, b: np.ndarray, out: np.ndarray, block: Block
) -> None:
    """
    Blocked contiguous GEMM over (bi, bk, bj) blocks.

    Block loops run (row block, sigma block, column block); inside a block
    each sigma step adds the outer product of a column of the A block with a
    row of the B block to the whole C block.

    Raises:
        DivisibilityError: If a block side does not divide its extent.
    """
    m, n, p = _dims(a, b, out)
    bi, bk, bj = block
    for side, extent, label in ((bi, m, "bi"), (bk, n, "bk"), (bj, p, "bj")):
        if side <= 0 or extent % side:
            raise DivisibilityError(f"{label}={side} does not divide {extent}")
    for i0 in range(0, m, bi):
        for k0 in range(0, n, bk):
            a_blk = a[i0 : i0 + bi, k0 : k0 + bk]
            for j0 in range(0, p, bj):
                b_blk = b[k0 : k0 + bk, j0 : j0 + bj]
                c_blk = out[i0 : i0 + bi, j0 : j0 + bj]
                for k in range(bk):
                    c_blk += np.outer(a_blk[:, k], b_blk[k, :])


def gemm_rows_parallel(
    a: np.ndarray,
    b: np.ndarray,
    out: np.ndarray,
    parts: int,
    workers: Optional[int] = None,
) -> None:
    """
    Row-lifted contiguous GEMM: `parts` row partitions run on a thread pool.

    Partitions write disjoint row ranges of C, so the result equals
    gemm_contiguous exactly.

    Raises:
        DivisibilityError: If `parts` does not divide the row count.
    """
    m, _, _ = _dims(a, b, out)
    if parts <= 0 or m % parts:
        raise DivisibilityError(f"np={parts} does not divide {m}")
    size = m // parts

    def run(k: int) -> None:
        rows = slice(k * size, (k + 1) * size)
        gemm_contiguous(a[rows, :], b, out[rows, :])

    with ThreadPoolExecutor(max_workers=workers or parts) as pool:
        list(pool.map(run, range(parts)))


KernelFn = Callable[[np.ndarray, np.ndarray, np.ndarray], None]

SIMPLE_KERNELS: Dict[str, KernelFn] = {
    "naive": gemm_naive,
    "moa-contiguous": gemm_contiguous,
}


def run_kernel(
    name: str,
    a: np.ndarray,
    b: np.ndarray,
    out: np.ndarray,
    block: Optional[Block] = None,
    parts: int = 1,
    workers: Optional[int] = None,
) -> None:
    """
    Dispatch a kernel by its bench name.

    Args:
        name: "naive", "moa-contiguous", "moa-blocked" or "moa-rows-parallel".
        block: (bi, bk, bj), required by "moa-blocked".
        parts: Row partitions for "moa-rows-parallel".
        workers: Thread count for "moa-rows-parallel"; defaults to `parts`.
    """
    if name in SIMPLE_KERNELS:
        SIMPLE_KERNELS[name](a, b, out)
    elif name == "moa-blocked":
        if block is None:
            raise InvalidArgumentError("moa-blocked needs a block shape")
        gemm_blocked(a, b, out, block)
    elif name == "moa-rows-parallel":
        gemm_rows_parallel(a, b, out, parts, workers)
    else:
        raise InvalidArgumentError(f"unknown kernel {name!r}")


KERNEL_NAMES = ("naive", "moa-contiguous", "moa-blocked", "moa-rows-parallel")
