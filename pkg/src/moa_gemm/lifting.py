"""
Dimension lifting: split one loop into an outer partition loop and an inner
intra-partition loop, plus the row-lifted, column-lifted and blocked GEMM
builders and the outer-loop independence analysis.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Set, Tuple

from .errors import DivisibilityError, NameCollisionError, UnknownVariableError
from .onf import (
    AccumStmt,
    Const,
    Expr,
    Loop,
    LoopNest,
    Sym,
    add,
    build_gemm_nest,
    div,
    group,
    iter_steps,
    mul,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LiftSpec:
    """
    How to split a loop: target == outer * inner_extent + inner.

    Attributes:
        target_var (str): Loop to split.
        inner_extent (int): Extent of the new inner loop; must divide the target's extent.
        outer_name (str): Name of the new partition loop.
        inner_name (str): Name of the new intra-partition loop.
        param (str, optional): When set, the split is expressed through this named
            parameter instead of literal constants.
        by_count (bool): With `param`, the parameter holds the partition count
            (outer extent) rather than the partition size (inner extent).
    """

    target_var: str
    inner_extent: int
    outer_name: str
    inner_name: str
    param: Optional[str] = None
    by_count: bool = False


def _split_exprs(spec: LiftSpec, extent: Expr, count: int) -> Tuple[Expr, Expr, Expr]:
    """Outer extent, inner extent and the replacement for the target variable."""
    outer, inner = Sym(spec.outer_name), Sym(spec.inner_name)
    if spec.param is None:
        size = Const(spec.inner_extent)
        return Const(count), size, group(add(group(mul(outer, size)), inner))
    param = Sym(spec.param)
    if spec.by_count:
        size = group(div(extent, param))
        return param, size, group(add(inner, mul(size, outer)))
    return group(div(extent, param)), param, group(add(group(mul(outer, param)), inner))


def lift(nest: LoopNest, spec: LiftSpec) -> LoopNest:
    """
    Replace the target loop by an outer loop immediately enclosing an inner one.

    Every occurrence of the target variable in the body becomes
    outer * inner_extent + inner, so the iteration count and the sequence of
    offsets visited are unchanged.

    Args:
        nest (LoopNest): Nest to transform.
        spec (LiftSpec): The split to apply.

    Returns:
        LoopNest: The lifted nest. When `spec.param` is new it is appended to
        the parameters; an existing parameter may be rebound only if nothing
        references it yet.

    Raises:
        UnknownVariableError: If the nest has no loop over `spec.target_var`.
        DivisibilityError: If inner_extent is not positive or does not divide the extent.
        NameCollisionError: If a new name is already taken.

    Example:
        >>> nest = lift(build_gemm_nest(4, 4, 4), LiftSpec("i", 2, "k", "ip"))
        >>> nest.loop_vars
        ('k', 'ip', 'sigma', 'j')
    """
    target = nest.loop(spec.target_var)
    extent = nest.extents()[nest.loop_vars.index(spec.target_var)]
    if spec.inner_extent <= 0:
        raise DivisibilityError(f"inner extent must be positive, got {spec.inner_extent}")
    if extent % spec.inner_extent:
        raise DivisibilityError(
            f"inner extent {spec.inner_extent} does not divide extent {extent} "
            f"of loop {spec.target_var!r}"
        )
    count = extent // spec.inner_extent

    taken = set(nest.loop_vars) | set(nest.param_dict)
    fresh = [spec.outer_name, spec.inner_name]
    if spec.outer_name == spec.inner_name or taken & set(fresh):
        raise NameCollisionError(f"lift names {fresh} are not fresh in {sorted(taken)}")

    params = nest.params
    if spec.param is not None:
        value = count if spec.by_count else spec.inner_extent
        if spec.param in nest.loop_vars or spec.param in fresh:
            raise NameCollisionError(f"parameter {spec.param!r} clashes with a loop variable")
        current = nest.param_dict.get(spec.param)
        if current is None:
            params = params + ((spec.param, value),)
        elif current != value:
            if nest.references(spec.param):
                raise NameCollisionError(
                    f"parameter {spec.param!r} is in use with value {current}, cannot rebind to {value}"
                )
            params = tuple((k, value if k == spec.param else v) for k, v in params)

    outer_extent, inner_extent, replacement = _split_exprs(spec, target.extent, count)
    loops = []
    for loop in nest.loops:
        if loop.var == spec.target_var:
            loops += [Loop(spec.outer_name, outer_extent), Loop(spec.inner_name, inner_extent)]
        else:
            loops.append(loop)
    lifted = LoopNest(
        tuple(loops), nest.body.substitute(spec.target_var, replacement), params
    )
    logger.debug(
        "lifted %s into %s[%d] x %s[%d]",
        spec.target_var,
        spec.outer_name,
        count,
        spec.inner_name,
        spec.inner_extent,
    )
    return lifted


def interchange(nest: LoopNest, order: Sequence[str]) -> LoopNest:
    """
    Reorder the loops of a rectangular nest.

    Legal for any permutation because extents reference parameters only. The
    body is untouched, so the same (out, left, right) triples are visited,
    in a different order.

    Raises:
        UnknownVariableError: If `order` names a loop the nest lacks or omits one.
        NameCollisionError: If `order` names a loop twice.
    """
    order = list(order)
    duplicates = sorted({v for v in order if order.count(v) > 1})
    if duplicates:
        raise NameCollisionError(f"interchange order repeats {duplicates}")
    if set(order) != set(nest.loop_vars):
        raise UnknownVariableError(
            f"interchange order {order} is not a permutation of {list(nest.loop_vars)}"
        )
    logger.debug("interchange %s -> %s", list(nest.loop_vars), order)
    return LoopNest(tuple(nest.loop(v) for v in order), nest.body, nest.params)


def _require_divides(part: int, whole: int, what: str) -> None:
    if part <= 0 or whole % part:
        raise DivisibilityError(f"{what}={part} does not divide {whole}")


def build_row_lifted(m: int, n: int, p: int, np: int) -> LoopNest:
    """
    Split the rows of A and C into `np` partitions: i == ip + (sizel/np)*k.

    The outer k loop is the one to hand to processors; its write sets are
    disjoint (see is_parallel_safe). The A offset groups the partition start
    on its own, as in ((ip+((sizel/np)*k))*shr0)+sigma.
    """
    _require_divides(np, m, "np")
    spec = LiftSpec("i", m // np, "k", "ip", param="np", by_count=True)
    base = build_gemm_nest(m, n, p)
    lifted = lift(base, spec)
    start = group(mul(group(div(base.loop("i").extent, "np")), "k"))
    row = group(add("ip", start))
    body = AccumStmt(lifted.body.out, base.body.left.substitute("i", row), lifted.body.right)
    return LoopNest(lifted.loops, body, lifted.params)


def build_col_lifted(m: int, n: int, p: int, rsize: int) -> LoopNest:
    """Split the columns of B and C into groups of `rsize`: j == jp*rsize + kp."""
    _require_divides(rsize, p, "rsize")
    return lift(build_gemm_nest(m, n, p), LiftSpec("j", rsize, "jp", "kp", param="rsize"))


BLOCKED_ORDER = ("ib", "sb", "jb", "ip", "sp", "jp")


def build_blocked(m: int, n: int, p: int, bi: int, bk: int, bj: int) -> LoopNest:
    """
    Fully blocked GEMM: lift i by bi, sigma by bk and j by bj, then hoist the
    three block loops outward.

    Loop order is (ib, sb, jb, ip, sp, jp). Rows of C blocks are finished in
    order, and each C block accumulates its partial products with sigma-blocks
    ascending, then sigma ascending within the block. For every C component
    that is plain sigma-ascending order, so results match the unblocked nest.

    Raises:
        DivisibilityError: Unless bi | m, bk | n and bj | p.
    """
    _require_divides(bi, m, "bi")
    _require_divides(bk, n, "bk")
    _require_divides(bj, p, "bj")
    nest = build_gemm_nest(m, n, p)
    nest = lift(nest, LiftSpec("i", bi, "ib", "ip", param="bi"))
    nest = lift(nest, LiftSpec("sigma", bk, "sb", "sp", param="bk"))
    nest = lift(nest, LiftSpec("j", bj, "jb", "jp", param="bj"))
    return interchange(nest, BLOCKED_ORDER)


def write_sets(
    nest: LoopNest, var: str, bindings: Optional[Mapping[str, int]] = None
) -> Dict[int, Set[int]]:
    """
    C offsets written per value of loop variable `var`.

    Raises:
        UnknownVariableError: If the nest has no loop over `var`.
    """
    nest.loop(var)
    pos = nest.loop_vars.index(var)
    sets: Dict[int, Set[int]] = {}
    for point, out, _, _ in iter_steps(nest, bindings):
        sets.setdefault(point[pos], set()).add(out)
    return sets


def is_parallel_safe(
    nest: LoopNest, var: str, bindings: Optional[Mapping[str, int]] = None
) -> bool:
    """True when distinct iterations of `var` write pairwise disjoint C offsets."""
    sets = write_sets(nest, var, bindings).values()
    union: Set[int] = set()
    for offsets in sets:
        if union & offsets:
            return False
        union |= offsets
    return True
