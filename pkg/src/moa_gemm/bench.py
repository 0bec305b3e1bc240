"""
Desk-scale timing of the GEMM kernels, written out as CSV.
"""

import csv
import logging
import math
import statistics
import time
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import IO, Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DivisibilityError, InvalidArgumentError, VerificationError
from .kernels import run_kernel
from .verify import verify_kernels

logger = logging.getLogger(__name__)

MIN_TRIALS = 3
_CLOCK_RESOLUTION = time.get_clock_info("perf_counter").resolution


@dataclass(frozen=True)
class BenchRecord:
    """
    One timed configuration; one CSV row.

    Attributes:
        kernel (str): Kernel name.
        m, n, p (int): Problem size.
        block_rows, block_cols (Optional[int]): Block shape, None for unblocked kernels.
        trials (int): Timed runs, at least 3.
        wall_seconds (float): Median wall time of one run.
        checksum (float): Sum of the components of C.
    """

    kernel: str
    m: int
    n: int
    p: int
    block_rows: Optional[int]
    block_cols: Optional[int]
    trials: int
    wall_seconds: float
    checksum: float

    def __post_init__(self) -> None:
        if self.trials < MIN_TRIALS:
            raise InvalidArgumentError(f"trials must be >= {MIN_TRIALS}, got {self.trials}")
        if not self.wall_seconds > 0:
            raise InvalidArgumentError(f"wall_seconds must be > 0, got {self.wall_seconds}")
        if not math.isfinite(self.checksum):
            raise InvalidArgumentError(f"checksum must be finite, got {self.checksum}")

    def row(self) -> List[str]:
        return ["" if value is None else str(value) for value in astuple(self)]


CSV_HEADER = tuple(f.name for f in fields(BenchRecord))


def time_kernel(
    run: Callable[[np.ndarray], None], out: np.ndarray, trials: int
) -> Tuple[float, float]:
    """
    Median wall time of `run(out)` over `trials` runs, and the checksum of the
    last result. `out` is re-zeroed before each run, outside the timed region.
    """
    if trials < MIN_TRIALS:
        raise InvalidArgumentError(f"trials must be >= {MIN_TRIALS}, got {trials}")
    samples = []
    for trial in range(trials):
        out.fill(0)
        start = time.perf_counter()
        run(out)
        elapsed = time.perf_counter() - start
        logger.debug("trial %d: %.6f s", trial, elapsed)
        samples.append(elapsed)
    return max(statistics.median(samples), _CLOCK_RESOLUTION), float(out.sum())


def check_config(
    sizes: Sequence[int],
    blocks: Sequence[Tuple[int, int]],
    trials: int = MIN_TRIALS,
    workers: int = 1,
) -> None:
    """
    Reject a bench configuration before anything is verified or timed.

    Raises:
        InvalidArgumentError: On too few trials, no workers or a size below 1.
        DivisibilityError: If a block side does not divide a size.
    """
    if trials < MIN_TRIALS:
        raise InvalidArgumentError(f"trials must be >= {MIN_TRIALS}, got {trials}")
    if workers < 1:
        raise InvalidArgumentError(f"workers must be >= 1, got {workers}")
    for size in sizes:
        if size < 1:
            raise InvalidArgumentError(f"sizes must be >= 1, got {size}")
        for rows, cols in blocks:
            if rows <= 0 or cols <= 0 or size % rows or size % cols:
                raise DivisibilityError(f"block {rows}x{cols} does not divide N={size}")


def run_bench(
    sizes: Sequence[int],
    blocks: Sequence[Tuple[int, int]],
    trials: int = MIN_TRIALS,
    seed: int = 0,
    parallel: bool = False,
    workers: int = 4,
    skip_verify: bool = False,
) -> List[BenchRecord]:
    """
    Time every kernel on square N x N float matrices for each N in `sizes`.

    Per size the records are: naive, moa-contiguous, one moa-blocked per
    block (r, c) run as (bi, bk, bj) = (r, c, c), then moa-rows-parallel when
    `parallel` is set. Operands come from default_rng(seed) with entries in
    [0, 1), so equal seeds give equal checksums.

    Raises:
        InvalidArgumentError: On too few trials, no workers or a size below 1.
        DivisibilityError: If a block side does not divide a size.
        VerificationError: If a kernel fails its oracle check.
    """
    check_config(sizes, blocks, trials, workers)
    partitions = {size: math.gcd(size, workers) for size in sizes}
    if skip_verify:
        logger.warning("timing kernels without verifying them first")
    else:
        report = verify_kernels(
            blocks,
            seed,
            parts=sorted(set(partitions.values())) if parallel else (),
            workers=workers,
        )
        if not report.ok:
            raise VerificationError(
                "kernels failed verification: "
                + "; ".join(r.describe() for r in report.failures)
            )

    records = []
    for size in sizes:
        rng = np.random.default_rng(seed)
        a = rng.random((size, size))
        b = rng.random((size, size))
        out = np.empty((size, size))
        parts = partitions[size]
        configs: List[Tuple[str, Optional[Tuple[int, int]]]] = [
            ("naive", None),
            ("moa-contiguous", None),
        ]
        configs += [("moa-blocked", block) for block in blocks]
        if parallel:
            configs.append(("moa-rows-parallel", None))
        logger.info("bench N=%d: %d configurations", size, len(configs))
        for kernel, block in configs:
            blk = None if block is None else (block[0], block[1], block[1])

            def run(
                target: np.ndarray,
                kernel: str = kernel,
                blk: Optional[Tuple[int, int, int]] = blk,
            ) -> None:
                run_kernel(kernel, a, b, target, blk, parts, workers)

            wall, checksum = time_kernel(run, out, trials)
            records.append(
                BenchRecord(
                    kernel,
                    size,
                    size,
                    size,
                    None if block is None else block[0],
                    None if block is None else block[1],
                    trials,
                    wall,
                    checksum,
                )
            )
    logger.info("bench finished: %d records", len(records))
    return records


def write_csv(records: Iterable[BenchRecord], out: Union[str, Path, IO[str]]) -> None:
    """Write the header and one row per record."""
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="", encoding="utf-8") as handle:
            write_csv(records, handle)
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in records:
        writer.writerow(record.row())
