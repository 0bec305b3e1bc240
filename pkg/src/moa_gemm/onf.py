"""
Loop-nest IR for the operational normal form of GEMM.

A LoopNest is a stack of counted loops around one fused accumulate statement
C[out] = C[out] + A[left]*B[right]. Index expressions are kept as small
expression trees so they render exactly as written, and are lowered to
AffineExpr (coefficients per loop variable plus a constant) for evaluation.
"""

import itertools
from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import (
    Any,
    ContextManager,
    Dict,
    Iterator,
    List,
    Mapping,
    MutableSequence,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

import numpy as np

from .core import DenseArray
from .errors import (
    DivisibilityError,
    NameCollisionError,
    NegativeExtentError,
    NonAffineError,
    OffsetOutOfRangeError,
    RankError,
    ShapeMismatchError,
    UnboundParameterError,
    UnknownVariableError,
)
from .helpers import trace_accesses
from .trace import AccessLog
from .types import AccessKind, Layout, Shape

BUFFER_NAMES = ("C", "A", "B")


@dataclass(frozen=True)
class AffineExpr:
    """
    Normalised affine form: sum of coefficient * loop variable, plus a constant.

    Attributes:
        terms (Tuple[Tuple[int, str], ...]): (coefficient, variable) pairs,
            sorted by variable, zero coefficients dropped.
        constant (int): Constant offset.
    """

    terms: Tuple[Tuple[int, str], ...] = ()
    constant: int = 0

    @classmethod
    def of(cls, coeffs: Mapping[str, int], constant: int = 0) -> "AffineExpr":
        terms = tuple((c, v) for v, c in sorted(coeffs.items()) if c != 0)
        return cls(terms, constant)

    @property
    def coeffs(self) -> Dict[str, int]:
        return {v: c for c, v in self.terms}

    @property
    def is_constant(self) -> bool:
        return not self.terms

    def evaluate(self, bindings: Mapping[str, int]) -> int:
        try:
            return self.constant + sum(c * bindings[v] for c, v in self.terms)
        except KeyError as exc:
            raise UnknownVariableError(f"variable {exc.args[0]!r} is not bound") from exc

    def __add__(self, other: "AffineExpr") -> "AffineExpr":
        coeffs = self.coeffs
        for c, v in other.terms:
            coeffs[v] = coeffs.get(v, 0) + c
        return AffineExpr.of(coeffs, self.constant + other.constant)

    def scale(self, factor: int) -> "AffineExpr":
        return AffineExpr.of(
            {v: c * factor for c, v in self.terms}, self.constant * factor
        )


class Expr:
    """Base class of index and extent expressions."""

    def render(self) -> str:
        raise NotImplementedError

    def symbols(self) -> Set[str]:
        raise NotImplementedError

    def substitute(self, name: str, replacement: "Expr") -> "Expr":
        raise NotImplementedError

    def lower(self, params: Mapping[str, int], loop_vars: Sequence[str]) -> AffineExpr:
        """
        Fold parameters into constants and collect loop-variable coefficients.

        Raises:
            UnboundParameterError: A symbol is neither a loop variable nor a parameter.
            NonAffineError: Two loop-dependent factors are multiplied.
            DivisibilityError: A division is inexact or by zero.
        """
        raise NotImplementedError

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class Const(Expr):
    value: int

    def render(self) -> str:
        return str(self.value)

    def symbols(self) -> Set[str]:
        return set()

    def substitute(self, name: str, replacement: Expr) -> Expr:
        return self

    def lower(self, params: Mapping[str, int], loop_vars: Sequence[str]) -> AffineExpr:
        return AffineExpr((), self.value)


@dataclass(frozen=True)
class Sym(Expr):
    """A loop variable or a named parameter."""

    name: str

    def render(self) -> str:
        return self.name

    def symbols(self) -> Set[str]:
        return {self.name}

    def substitute(self, name: str, replacement: Expr) -> Expr:
        return replacement if self.name == name else self

    def lower(self, params: Mapping[str, int], loop_vars: Sequence[str]) -> AffineExpr:
        if self.name in loop_vars:
            return AffineExpr(((1, self.name),), 0)
        if self.name in params:
            return AffineExpr((), int(params[self.name]))
        raise UnboundParameterError(f"parameter {self.name!r} has no value")


@dataclass(frozen=True)
class BinOp(Expr):
    """Binary '+', '*' or exact-division '/' node. Renders without parentheses."""

    op: str
    left: Expr
    right: Expr

    def render(self) -> str:
        return f"{self.left.render()}{self.op}{self.right.render()}"

    def symbols(self) -> Set[str]:
        return self.left.symbols() | self.right.symbols()

    def substitute(self, name: str, replacement: Expr) -> Expr:
        return BinOp(
            self.op,
            self.left.substitute(name, replacement),
            self.right.substitute(name, replacement),
        )

    def lower(self, params: Mapping[str, int], loop_vars: Sequence[str]) -> AffineExpr:
        lhs = self.left.lower(params, loop_vars)
        rhs = self.right.lower(params, loop_vars)
        if self.op == "+":
            return lhs + rhs
        if self.op == "*":
            if lhs.is_constant:
                return rhs.scale(lhs.constant)
            if rhs.is_constant:
                return lhs.scale(rhs.constant)
            raise NonAffineError(f"{self.render()} multiplies two loop-dependent terms")
        if not (lhs.is_constant and rhs.is_constant):
            raise NonAffineError(f"{self.render()} divides loop-dependent terms")
        if rhs.constant == 0 or lhs.constant % rhs.constant:
            raise DivisibilityError(
                f"{self.render()} = {lhs.constant}/{rhs.constant} is not an exact division"
            )
        return AffineExpr((), lhs.constant // rhs.constant)


@dataclass(frozen=True)
class Group(Expr):
    """Parenthesised subexpression."""

    inner: Expr

    def render(self) -> str:
        return f"({self.inner.render()})"

    def symbols(self) -> Set[str]:
        return self.inner.symbols()

    def substitute(self, name: str, replacement: Expr) -> Expr:
        return Group(self.inner.substitute(name, replacement))

    def lower(self, params: Mapping[str, int], loop_vars: Sequence[str]) -> AffineExpr:
        return self.inner.lower(params, loop_vars)


ExprLike = Union[Expr, int, str]


def as_expr(value: ExprLike) -> Expr:
    """Ints become constants, strings become symbols."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return Sym(value)
    return Const(int(value))


def add(left: ExprLike, right: ExprLike) -> Expr:
    return BinOp("+", as_expr(left), as_expr(right))


def mul(left: ExprLike, right: ExprLike) -> Expr:
    return BinOp("*", as_expr(left), as_expr(right))


def div(left: ExprLike, right: ExprLike) -> Expr:
    return BinOp("/", as_expr(left), as_expr(right))


def group(inner: ExprLike) -> Expr:
    return Group(as_expr(inner))


@dataclass(frozen=True)
class Loop:
    """
    A counted loop: `var` runs from 0 (inclusive) to `extent` (exclusive), step 1.

    Attributes:
        var (str): Loop variable name.
        extent (Expr): Iteration count; may reference parameters only.
    """

    var: str
    extent: Expr

    def __post_init__(self) -> None:
        object.__setattr__(self, "extent", as_expr(self.extent))


@dataclass(frozen=True)
class AccumStmt:
    """
    The fused statement C[out] = C[out] + A[left] * B[right].

    Attributes:
        out (Expr): Offset into C.
        left (Expr): Offset into A.
        right (Expr): Offset into B.
    """

    out: Expr
    left: Expr
    right: Expr

    def __post_init__(self) -> None:
        for name in ("out", "left", "right"):
            object.__setattr__(self, name, as_expr(getattr(self, name)))

    def symbols(self) -> Set[str]:
        return self.out.symbols() | self.left.symbols() | self.right.symbols()

    def substitute(self, name: str, replacement: Expr) -> "AccumStmt":
        return AccumStmt(
            self.out.substitute(name, replacement),
            self.left.substitute(name, replacement),
            self.right.substitute(name, replacement),
        )


@dataclass(frozen=True)
class LoopNest:
    """
    Loops (outer to inner) around a single accumulate statement.

    Attributes:
        loops (Tuple[Loop, ...]): Outermost first.
        body (AccumStmt): The innermost statement.
        params (Tuple[Tuple[str, int], ...]): Named integer parameters, in the
            order they appear in a rendered C signature.
    """

    loops: Tuple[Loop, ...]
    body: AccumStmt
    params: Tuple[Tuple[str, int], ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "loops", tuple(self.loops))
        object.__setattr__(
            self, "params", tuple((str(k), int(v)) for k, v in self.params)
        )
        names = [loop.var for loop in self.loops] + [name for name, _ in self.params]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise NameCollisionError(f"names used more than once: {duplicates}")
        reserved = sorted(set(names) & set(BUFFER_NAMES))
        if reserved:
            raise NameCollisionError(f"names clash with buffer names: {reserved}")
        params = self.param_dict
        loop_vars = set(self.loop_vars)
        for loop in self.loops:
            unbound = loop.extent.symbols() - set(params)
            if unbound:
                raise UnboundParameterError(
                    f"extent of loop {loop.var!r} references non-parameters {sorted(unbound)}"
                )
        unknown = self.body.symbols() - loop_vars - set(params)
        if unknown:
            raise UnknownVariableError(
                f"body references undeclared names {sorted(unknown)}"
            )

    @property
    def loop_vars(self) -> Tuple[str, ...]:
        return tuple(loop.var for loop in self.loops)

    @property
    def param_dict(self) -> Dict[str, int]:
        return dict(self.params)

    def loop(self, var: str) -> Loop:
        for loop in self.loops:
            if loop.var == var:
                return loop
        raise UnknownVariableError(f"nest has no loop over {var!r}")

    def references(self, name: str) -> bool:
        """True when a loop extent or the body mentions `name`."""
        if name in self.body.symbols():
            return True
        return any(name in loop.extent.symbols() for loop in self.loops)

    def bind(self, bindings: Optional[Mapping[str, int]] = None) -> Dict[str, int]:
        """Parameters with `bindings` overriding the nest's own values."""
        params = self.param_dict
        params.update(bindings or {})
        return params

    def extents(self, bindings: Optional[Mapping[str, int]] = None) -> List[int]:
        """Concrete extent of every loop, outermost first."""
        params = self.bind(bindings)
        values = []
        for loop in self.loops:
            value = loop.extent.lower(params, ()).constant
            if value < 0:
                raise NegativeExtentError(f"loop {loop.var!r} has extent {value}")
            values.append(value)
        return values

    def iteration_count(self, bindings: Optional[Mapping[str, int]] = None) -> int:
        count = 1
        for extent in self.extents(bindings):
            count *= extent
        return count

    def offsets(
        self, bindings: Optional[Mapping[str, int]] = None
    ) -> Tuple[AffineExpr, AffineExpr, AffineExpr]:
        """The (out, left, right) offsets lowered to affine form."""
        params = self.bind(bindings)
        return (
            self.body.out.lower(params, self.loop_vars),
            self.body.left.lower(params, self.loop_vars),
            self.body.right.lower(params, self.loop_vars),
        )


def build_gemm_nest(m: int, n: int, p: int) -> LoopNest:
    """
    The sequential ONF loop nest: i over rows of A and C, sigma over the shared
    extent, j over columns of B and C, in that order.

    Parameters follow the rendered C signature: sizel = m, shr0 = n, sizer = p, plus
    sizeres = m*p and np = 1 carried in the signature.

    Raises:
        NegativeExtentError: If any of m, n, p is negative.
    """
    if min(m, n, p) < 0:
        raise NegativeExtentError(f"extents must be >= 0, got m={m} n={n} p={p}")
    body = AccumStmt(
        out=add("j", mul("i", "sizer")),
        left=add(group(mul("i", "shr0")), "sigma"),
        right=add(group(mul("sigma", "sizer")), "j"),
    )
    loops = (Loop("i", Sym("sizel")), Loop("sigma", Sym("shr0")), Loop("j", Sym("sizer")))
    params = (("sizel", m), ("sizer", p), ("sizeres", m * p), ("np", 1), ("shr0", n))
    return LoopNest(loops, body, params)


Step = Tuple[Tuple[int, ...], int, int, int]


def iter_steps(
    nest: LoopNest, bindings: Optional[Mapping[str, int]] = None
) -> Iterator[Step]:
    """
    Yield (loop values, out, left, right) for every innermost iteration, in
    execution order.
    """
    extents = nest.extents(bindings)
    lowered = nest.offsets(bindings)
    position = {var: pos for pos, var in enumerate(nest.loop_vars)}
    plans = [
        (expr.constant, [(position[v], c) for c, v in expr.terms]) for expr in lowered
    ]
    for point in itertools.product(*(range(e) for e in extents)):
        out, left, right = (
            const + sum(c * point[pos] for pos, c in terms) for const, terms in plans
        )
        yield point, out, left, right


def _check_bounds(name: str, offset: int, buffer: Sequence[Any]) -> None:
    if not 0 <= offset < len(buffer):
        raise OffsetOutOfRangeError(
            f"offset {offset} outside buffer {name} of length {len(buffer)}"
        )


def eval_nest(
    nest: LoopNest,
    A: Sequence[Any],
    B: Sequence[Any],
    C: MutableSequence[Any],
    bindings: Optional[Mapping[str, int]] = None,
    trace: Optional[AccessLog] = None,
    checked: bool = True,
) -> None:
    """
    Interpret a nest sequentially, accumulating into C in place.

    Args:
        nest (LoopNest): Nest to run.
        A, B (Sequence): Flat operand buffers. numpy buffers may carry extra
            trailing axes, which are carried through elementwise.
        C (MutableSequence): Flat result buffer, already initialised.
        bindings (Mapping[str, int], optional): Parameter overrides.
        trace (AccessLog, optional): Receives every read and write; left as
            it was before the call when evaluation raises.
        checked (bool): Verify every offset lies inside its buffer.

    Raises:
        OffsetOutOfRangeError: In checked mode, on any out-of-bounds offset.
        UnboundParameterError: If an extent or offset needs a missing parameter.
    """
    loop_vars = nest.loop_vars
    recording: ContextManager[Any] = (
        trace_accesses(trace) if trace is not None else nullcontext()
    )
    with recording:
        for point, out, left, right in iter_steps(nest, bindings):
            if checked:
                _check_bounds("C", out, C)
                _check_bounds("A", left, A)
                _check_bounds("B", right, B)
            if trace is not None:
                coords = dict(zip(loop_vars, point))
                trace.add(AccessKind.READ, "A", left, coords)
                trace.add(AccessKind.READ, "B", right, coords)
                trace.add(AccessKind.WRITE, "C", out, coords)
            C[out] = C[out] + A[left] * B[right]


def access_trace(nest: LoopNest, bindings: Optional[Mapping[str, int]] = None) -> AccessLog:
    """Record the offsets a nest touches without needing buffers."""
    log = AccessLog()
    loop_vars = nest.loop_vars
    for point, out, left, right in iter_steps(nest, bindings):
        coords = dict(zip(loop_vars, point))
        log.add(AccessKind.READ, "A", left, coords)
        log.add(AccessKind.READ, "B", right, coords)
        log.add(AccessKind.WRITE, "C", out, coords)
    return log


def run_nest(
    nest: LoopNest,
    A: DenseArray,
    B: DenseArray,
    bindings: Optional[Mapping[str, int]] = None,
    trace: Optional[AccessLog] = None,
) -> DenseArray:
    """
    Evaluate a GEMM nest on row-major matrices into a freshly zeroed C.

    Raises:
        RankError: If an operand is not a matrix.
        ShapeMismatchError: If the inner extents differ.
    """
    if A.dim != 2 or B.dim != 2:
        raise RankError("run_nest needs two matrices")
    (m, n), (n_b, p) = A.shape.extents, B.shape.extents
    if n != n_b:
        raise ShapeMismatchError(f"inner extents differ: {n} vs {n_b}")
    C = np.zeros(m * p, dtype=A.element.dtype)
    eval_nest(
        nest,
        A.with_layout(Layout.ROW_MAJOR).data,
        B.with_layout(Layout.ROW_MAJOR).data,
        C,
        bindings,
        trace,
    )
    return DenseArray(Shape((m, p)), C, Layout.ROW_MAJOR, A.element)


def render_c(
    nest: LoopNest,
    fn_name: str,
    pragmas: Optional[Sequence[Tuple[str, str]]] = None,
) -> str:
    """
    Render a nest as a C99 function over double buffers.

    The signature is `void fn(double *C, double *A, double *B, int <params>...)`,
    loops count up from 0 with 2-space indentation, and the body is the single
    accumulate statement with the nest's index expressions verbatim. Each
    (loop var, text) pragma is printed on its own line right above that loop.

    Raises:
        NameCollisionError: If the function name clashes with a loop var or param.
        UnknownVariableError: If a pragma names a loop the nest does not have.
    """
    names = set(nest.loop_vars) | set(nest.param_dict) | set(BUFFER_NAMES)
    if fn_name in names:
        raise NameCollisionError(f"function name {fn_name!r} clashes with a nest name")
    attached: Dict[str, List[str]] = {}
    for var, text in pragmas or ():
        nest.loop(var)
        attached.setdefault(var, []).append(text)

    args = ["double *C", "double *A", "double *B"]
    args += [f"int {name}" for name, _ in nest.params]
    lines = [f"void {fn_name}({', '.join(args)})", "{"]
    if nest.loops:
        lines.append(f"  int {', '.join(nest.loop_vars)};")
    depth = 1
    for loop in nest.loops:
        pad = "  " * depth
        lines += [f"{pad}{text}" for text in attached.get(loop.var, [])]
        lines.append(
            f"{pad}for ({loop.var} = 0; {loop.var} < {loop.extent.render()}; {loop.var}++) {{"
        )
        depth += 1
    out = nest.body.out.render()
    lines.append(
        f"{'  ' * depth}C[{out}] = C[{out}] + "
        f"A[{nest.body.left.render()}]*B[{nest.body.right.render()}];"
    )
    for level in range(depth - 1, 0, -1):
        lines.append(f"{'  ' * level}}}")
    lines.append("}")
    return "\n".join(lines) + "\n"
