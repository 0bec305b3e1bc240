"""
Cost model: hardware shapes and the block-size arithmetic that fits the A, B
and C working blocks into an L1 budget.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from .errors import BudgetError, HardwareConfigError, InvalidArgumentError

logger = logging.getLogger(__name__)

KIB = 1024
MIB = 1024 * KIB
GIB = 1024 * MIB

ELEMENT_BYTES = {"f32": 4, "f64": 8}
BLOCKS_PER_SM = 3
PRESETS = ("v100-16g", "v100-32g")


@dataclass(frozen=True)
class HardwareShape:
    """
    Memory hierarchy of one accelerator.

    Attributes:
        name (str): Label, e.g. "v100-16g".
        l1_budget_bytes (int): Per-SM working budget blocks are planned against.
        l1_full_bytes (int): Full L1 including shared memory.
        l2_bytes (int): L2 size.
        global_bytes (int): Global memory size.
        sm_count (int): Number of streaming multiprocessors.
        global_share_divisor (int): Devices sharing global memory when
            predicting the block-switch threshold.
    """

    name: str = "v100-16g"
    l1_budget_bytes: int = 32 * KIB
    l1_full_bytes: int = 128 * KIB
    l2_bytes: int = 6 * MIB
    global_bytes: int = 16 * GIB
    sm_count: int = 80
    global_share_divisor: int = 8

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise HardwareConfigError("name must be a non-empty string", key="name")
        for f in fields(self):
            if f.name == "name":
                continue
            value = getattr(self, f.name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise HardwareConfigError(
                    f"{f.name} must be an integer, got {value!r}", key=f.name
                )
            if value <= 0:
                raise HardwareConfigError(f"{f.name} must be > 0, got {value}", key=f.name)
        chain = ("l1_budget_bytes", "l1_full_bytes", "l2_bytes", "global_bytes")
        for lower, upper in zip(chain, chain[1:]):
            if getattr(self, lower) > getattr(self, upper):
                raise HardwareConfigError(
                    f"{lower}={getattr(self, lower)} exceeds {upper}={getattr(self, upper)}",
                    key=lower,
                )

    def with_overrides(self, **overrides: Any) -> "HardwareShape":
        """Copy with some fields replaced; the copy is validated again."""
        unknown = sorted(set(overrides) - {f.name for f in fields(self)})
        if unknown:
            raise HardwareConfigError(f"unknown hardware keys {unknown}", key=unknown[0])
        return replace(self, **overrides)

    @property
    def global_share_bytes(self) -> int:
        return self.global_bytes // self.global_share_divisor

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "HardwareShape":
        """
        Build from a key-value mapping.

        `global_share_divisor` is optional; every other field is required.

        Raises:
            HardwareConfigError: On unknown, missing or ill-typed keys.
        """
        if not isinstance(data, Mapping):
            raise HardwareConfigError(f"hardware config must be an object, got {type(data).__name__}")
        known = [f.name for f in fields(cls)]
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise HardwareConfigError(f"unknown hardware key {unknown[0]!r}", key=unknown[0])
        for key in known:
            if key not in data and key != "global_share_divisor":
                raise HardwareConfigError(f"missing hardware key {key!r}", key=key)
        return cls(**dict(data))

    @classmethod
    def from_json(cls, text: str) -> "HardwareShape":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise HardwareConfigError(f"hardware config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def load_hardware(source: Union[str, Path]) -> HardwareShape:
    """
    Load a hardware shape from a bundled preset name or a JSON file path.

    Args:
        source: "v100-16g", "v100-32g", or a path to a JSON file.

    Raises:
        HardwareConfigError: If the file is missing or malformed.
    """
    if str(source) in PRESETS:
        text = resources.files("moa_gemm.presets").joinpath(f"{source}.json").read_text()
    else:
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise HardwareConfigError(f"cannot read hardware config {path}: {exc}") from exc
    hw = HardwareShape.from_json(text)
    logger.info("loaded hardware shape %s", hw.name)
    return hw


@dataclass(frozen=True)
class BlockPlan:
    """
    One block shape for each of the three operands resident on an SM.

    Attributes:
        block_rows (int): Rows per block.
        block_cols (int): Columns per block.
        elem_bytes (int): Bytes per element.
        blocks_per_sm (int): Resident blocks (A, B and C).
        bytes_per_block (int): block_rows * block_cols * elem_bytes.
        total_bytes (int): blocks_per_sm * bytes_per_block.
        budget_bytes (int): The budget the plan fits.
    """

    block_rows: int
    block_cols: int
    elem_bytes: int
    blocks_per_sm: int
    bytes_per_block: int
    total_bytes: int
    budget_bytes: int

    @classmethod
    def square(cls, side: int, elem_bytes: int, budget_bytes: int) -> "BlockPlan":
        per_block = side * side * elem_bytes
        return cls(
            side,
            side,
            elem_bytes,
            BLOCKS_PER_SM,
            per_block,
            BLOCKS_PER_SM * per_block,
            budget_bytes,
        )

    @property
    def component_count(self) -> int:
        return self.block_rows * self.block_cols


def _check_elem_bytes(elem_bytes: int) -> None:
    if elem_bytes not in ELEMENT_BYTES.values():
        raise InvalidArgumentError(f"elem_bytes must be 4 or 8, got {elem_bytes}")


def select_block(hw: HardwareShape, elem_bytes: int, shared: bool = False) -> BlockPlan:
    """
    Largest power-of-two square block with 3 * b^2 * elem_bytes within budget.

    Args:
        hw (HardwareShape): Target hardware.
        elem_bytes (int): 4 or 8.
        shared (bool): Plan against the full L1 (with shared memory) instead
            of the per-SM working budget.

    Raises:
        BudgetError: If not even a 1x1 block fits.

    Example:
        >>> select_block(HardwareShape(), 8).block_rows
        32
    """
    _check_elem_bytes(elem_bytes)
    budget = hw.l1_full_bytes if shared else hw.l1_budget_bytes
    if BLOCKS_PER_SM * elem_bytes > budget:
        raise BudgetError(
            f"budget of {budget} bytes cannot hold {BLOCKS_PER_SM} blocks of one "
            f"{elem_bytes}-byte element"
        )
    side = 1
    while BLOCKS_PER_SM * (2 * side) ** 2 * elem_bytes <= budget:
        side *= 2
    return BlockPlan.square(side, elem_bytes, budget)


def enumerate_block_shapes(component_count: int) -> List[Tuple[int, int]]:
    """
    Every (rows, cols) with rows * cols == component_count, rows descending.

    Example:
        >>> enumerate_block_shapes(8)
        [(8, 1), (4, 2), (2, 4), (1, 8)]
    """
    if component_count < 1:
        raise InvalidArgumentError(f"component_count must be >= 1, got {component_count}")
    return [
        (r, component_count // r)
        for r in range(component_count, 0, -1)
        if component_count % r == 0
    ]


def predict_switch_threshold(
    hw: HardwareShape,
    elem_bytes: int,
    n_matrices: int = 3,
    budget_bytes: Optional[int] = None,
) -> int:
    """
    Largest square side N whose n_matrices * N^2 * elem_bytes working set fits
    the budget: the matrix size where the best block is predicted to double.

    The budget defaults to the per-device share of global memory
    (global_bytes // global_share_divisor). This is one hypothesis for where
    the switch happens; the L2 split across SMs is not modelled.

    Raises:
        BudgetError: If the budget is zero or negative.
    """
    _check_elem_bytes(elem_bytes)
    if n_matrices < 1:
        raise InvalidArgumentError(f"n_matrices must be >= 1, got {n_matrices}")
    budget = hw.global_share_bytes if budget_bytes is None else budget_bytes
    if budget <= 0:
        raise BudgetError(f"budget must be positive, got {budget}")
    return math.isqrt(budget // (n_matrices * elem_bytes))


@dataclass(frozen=True)
class PlanReport:
    """Everything the `plan` command prints for one hardware shape."""

    hardware: HardwareShape
    elem_bytes: int
    plan: BlockPlan
    shared_plan: BlockPlan
    shapes: List[Tuple[int, int]]
    threshold: int
    threshold_budget: int

    def render(self) -> str:
        hw, plan = self.hardware, self.plan
        lines = [
            f"hardware: {hw.name} ({hw.sm_count} SMs, L1 {hw.l1_full_bytes} B, "
            f"L2 {hw.l2_bytes} B, global {hw.global_bytes} B)",
            f"element: {self.elem_bytes} bytes",
            f"block: {plan.block_rows}x{plan.block_cols}",
            f"bytes per block: {plan.block_rows} * {plan.block_cols} * "
            f"{plan.elem_bytes} = {plan.bytes_per_block}",
            f"total: {plan.blocks_per_sm} * {plan.bytes_per_block} = "
            f"{plan.total_bytes} <= budget {plan.budget_bytes}",
            "equal-count shapes: "
            + ", ".join(f"{r}x{c}" for r, c in self.shapes),
        ]
        shared = self.shared_plan
        lines.append(
            f"with shared memory: {shared.block_rows}x{shared.block_cols}, "
            f"total {shared.total_bytes} <= budget {shared.budget_bytes}"
        )
        lines.append(
            f"switch threshold: N = isqrt({self.threshold_budget} // "
            f"(3 * {self.elem_bytes})) = {self.threshold}"
        )
        return "\n".join(lines) + "\n"


def plan_report(hw: HardwareShape, elem_bytes: int) -> PlanReport:
    """
    Bundle the working-budget plan, its equal-count shapes, the shared-memory
    plan and the switch threshold.
    """
    plan = select_block(hw, elem_bytes)
    return PlanReport(
        hardware=hw,
        elem_bytes=elem_bytes,
        plan=plan,
        shared_plan=select_block(hw, elem_bytes, shared=True),
        shapes=enumerate_block_shapes(plan.component_count),
        threshold=predict_switch_threshold(hw, elem_bytes),
        threshold_budget=hw.global_share_bytes,
    )
