"""
Oracle harness: every GEMM formulation checked against gemm_naive on small
random integer matrices, plus the psi identity on random shapes.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .algebra import gemm_moa, gemm_naive
from .core import DenseArray, index_vectors, psi
from .errors import InvalidArgumentError, MoaError
from .helpers import random_integer_matrix, random_shape
from .lifting import build_blocked, build_col_lifted, build_row_lifted, is_parallel_safe
from .onf import LoopNest, build_gemm_nest, eval_nest
from .types import ElementType, Layout

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    """
    Outcome of one oracle comparison.

    Attributes:
        check (str): What was compared, e.g. "blocked".
        config (Dict[str, int]): Sizes and block parameters.
        ok (bool): Whether the candidate matched the oracle.
        detail (str): Failure description; empty on success.
    """

    check: str
    config: Dict[str, int]
    ok: bool
    detail: str = ""

    def describe(self) -> str:
        params = " ".join(f"{k}={v}" for k, v in self.config.items())
        status = "ok" if self.ok else f"FAILED: {self.detail}"
        return f"{self.check} {params}: {status}"


@dataclass
class VerifyReport:
    """Accumulated check results."""

    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(1 for r in self.results if r.ok)

    @property
    def failed(self) -> int:
        return len(self.results) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.ok]

    def record(self, check: str, config: Dict[str, int], run: Callable[[], bool]) -> None:
        """Run one comparison; library errors count as a failure."""
        try:
            ok, detail = run(), ""
            if not ok:
                detail = "result differs from gemm_naive"
        except MoaError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc.args[0] if exc.args else exc}"
        result = CheckResult(check, dict(config), ok, detail)
        logger.debug(result.describe())
        self.results.append(result)

    def render(self) -> str:
        lines = [r.describe() for r in self.failures]
        lines.append(f"{self.passed} passed, {self.failed} failed")
        return "\n".join(lines) + "\n"


def divisors(n: int) -> List[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def nest_matches(
    nest: LoopNest, a: np.ndarray, b: np.ndarray, expected: np.ndarray
) -> bool:
    """
    Evaluate a nest on stacked operands and compare with the expected product.

    Operands carry a trailing batch axis: a is (m*n, t), b is (n*p, t) and
    expected is (m*p, t), so one interpretation checks t matrix pairs.
    """
    out = np.zeros_like(expected)
    eval_nest(nest, a, b, out)
    return bool(np.array_equal(out, expected))


def _batch(
    rng: np.random.Generator, m: int, n: int, p: int, trials: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flat stacked operands and the gemm_naive product of each pair."""
    lefts = [random_integer_matrix(rng, m, n) for _ in range(trials)]
    rights = [random_integer_matrix(rng, n, p) for _ in range(trials)]
    products = [gemm_naive(left, right) for left, right in zip(lefts, rights)]

    def stack(parts: Sequence[DenseArray]) -> np.ndarray:
        return np.stack([part.data for part in parts], axis=1)

    return stack(lefts), stack(rights), stack(products)


def _check_sizes(
    report: VerifyReport,
    rng: np.random.Generator,
    m: int,
    n: int,
    p: int,
    trials: int,
) -> None:
    a, b, expected = _batch(rng, m, n, p, trials)
    size = {"m": m, "n": n, "p": p}

    def moa_matches() -> bool:
        for t in range(trials):
            left = DenseArray.from_ndarray(a[:, t].reshape(m, n))
            right = DenseArray.from_ndarray(b[:, t].reshape(n, p))
            if not np.array_equal(gemm_moa(left, right).data, expected[:, t]):
                return False
        return True

    report.record("gemm_moa", size, moa_matches)
    report.record(
        "onf", size, lambda: nest_matches(build_gemm_nest(m, n, p), a, b, expected)
    )
    for np_ in divisors(m):
        report.record(
            "row_lifted",
            {**size, "np": np_},
            lambda np_=np_: nest_matches(build_row_lifted(m, n, p, np_), a, b, expected),
        )
    for rsize in divisors(p):
        report.record(
            "col_lifted",
            {**size, "rsize": rsize},
            lambda rsize=rsize: nest_matches(
                build_col_lifted(m, n, p, rsize), a, b, expected
            ),
        )
    for bi in divisors(m):
        for bk in divisors(n):
            for bj in divisors(p):
                report.record(
                    "blocked",
                    {**size, "bi": bi, "bk": bk, "bj": bj},
                    lambda bi=bi, bk=bk, bj=bj: nest_matches(
                        build_blocked(m, n, p, bi, bk, bj), a, b, expected
                    ),
                )


def _check_psi_identity(report: VerifyReport, rng: np.random.Generator, count: int) -> None:
    for trial in range(count):
        shape = random_shape(rng)
        values = rng.integers(-99, 99, size=shape.size, endpoint=True, dtype=np.int64)
        layout = Layout.ROW_MAJOR if trial % 2 == 0 else Layout.COL_MAJOR
        a = DenseArray.from_components(shape, values, layout, ElementType.I64)

        def rebuilt_matches(a: DenseArray = a) -> bool:
            components = [psi(idx, a).item for idx in index_vectors(a.shape)]
            rebuilt = DenseArray.from_components(a.shape, components, a.layout, a.element)
            return rebuilt == a

        report.record("psi_identity", {"rank": shape.dim, "size": shape.size}, rebuilt_matches)


def verify_all(
    max_dim: int, seed: int, trials: int = 3, shape_count: int = 100
) -> VerifyReport:
    """
    Check every (m, n, p) in [1, max_dim]^3: gemm_moa, the ONF nest, every
    row-lifted and column-lifted split and every blocked triple against
    gemm_naive, then the psi identity on random shapes.

    Args:
        max_dim (int): Largest extent checked; at least 1.
        seed (int): Seed for numpy's default_rng.
        trials (int): Random matrix pairs per size.
        shape_count (int): Random shapes for the psi identity.
    """
    if max_dim < 1:
        raise InvalidArgumentError(f"max_dim must be >= 1, got {max_dim}")
    rng = np.random.default_rng(seed)
    report = VerifyReport()
    for m in range(1, max_dim + 1):
        for n in range(1, max_dim + 1):
            for p in range(1, max_dim + 1):
                _check_sizes(report, rng, m, n, p, trials)
    _check_psi_identity(report, rng, shape_count)
    logger.info("verify: %d passed, %d failed", report.passed, report.failed)
    return report


def verify_kernels(
    blocks: Iterable[Tuple[int, int]],
    seed: int,
    parts: Sequence[int] = (2,),
    workers: Optional[int] = None,
) -> VerifyReport:
    """
    Check the bench kernels against gemm_naive on integer matrices whose side
    is the lcm of every block side and partition count, so each one divides it.

    Block (r, c) runs as bi = r, bk = c, bj = c. The row-parallel kernel is
    checked once per partition count in `parts`, on `workers` threads, after
    confirming the row-lifted nest's outer loop writes disjoint offsets.
    """
    blocks = list(blocks)
    parts = list(parts)
    if any(count < 1 for count in parts):
        raise InvalidArgumentError(f"partition counts must be >= 1, got {parts}")
    side = math.lcm(*parts, *(s for block in blocks for s in block))
    rng = np.random.default_rng(seed)
    left = random_integer_matrix(rng, side, side)
    right = random_integer_matrix(rng, side, side)
    expected = gemm_naive(left, right).to_ndarray()
    a, b = left.to_ndarray(), right.to_ndarray()
    config = {"m": side, "n": side, "p": side}
    report = VerifyReport()

    def matches(kernel: Callable[[np.ndarray], None]) -> bool:
        out = np.zeros_like(expected)
        kernel(out)
        return bool(np.array_equal(out, expected))

    report.record("naive", config, lambda: matches(lambda out: kernels.gemm_naive(a, b, out)))
    report.record(
        "moa-contiguous", config, lambda: matches(lambda out: kernels.gemm_contiguous(a, b, out))
    )
    for rows, cols in blocks:
        block = (rows, cols, cols)
        report.record(
            "moa-blocked",
            {**config, "bi": rows, "bk": cols, "bj": cols},
            lambda block=block: matches(lambda out: kernels.gemm_blocked(a, b, out, block)),
        )
    for count in parts:
        report.record(
            "row_lifted_independence",
            {"m": count, "np": count},
            lambda count=count: is_parallel_safe(build_row_lifted(count, 1, 1, count), "k"),
        )
        report.record(
            "moa-rows-parallel",
            {**config, "np": count},
            lambda count=count: matches(
                lambda out: kernels.gemm_rows_parallel(a, b, out, count, workers)
            ),
        )
    logger.info("kernel verify: %d passed, %d failed", report.passed, report.failed)
    return report
