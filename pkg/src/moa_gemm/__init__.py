"""
MoA GEMM

Mathematics of Arrays psi calculus, the operational normal form of matrix
multiply as an executable loop nest, dimension lifting into row, column and
blocked variants, and cache-driven block planning.
"""

from .algebra import (
    gemm_moa,
    gemm_naive,
    hadamard,
    inner,
    ipophp,
    kron,
    outer,
    pointwise,
    reduce,
    scalar_extend,
    stack,
)
from .core import (
    DenseArray,
    gamma,
    gamma_inverse,
    gamma_prefix,
    index_vectors,
    iota,
    psi,
    psi_span,
    rav,
    shape_of,
)
from .cost import (
    BlockPlan,
    HardwareShape,
    PlanReport,
    enumerate_block_shapes,
    load_hardware,
    plan_report,
    predict_switch_threshold,
    select_block,
)
from .errors import MoaError
from .helpers import (
    identity,
    ones_like,
    random_integer_matrix,
    random_shape,
    trace_accesses,
    zeros,
    zeros_like,
)
from .lifting import (
    LiftSpec,
    build_blocked,
    build_col_lifted,
    build_row_lifted,
    interchange,
    is_parallel_safe,
    lift,
    write_sets,
)
from .onf import (
    AccumStmt,
    AffineExpr,
    Loop,
    LoopNest,
    access_trace,
    build_gemm_nest,
    eval_nest,
    render_c,
    run_nest,
)
from .trace import AccessLog
from .types import (
    AccessEntry,
    AccessKind,
    ElementType,
    IndexVector,
    Layout,
    Product,
    ScalarOp,
    Shape,
)

__version__ = "0.1.0"
__all__ = [
    "AccessEntry",
    "AccessKind",
    "AccessLog",
    "AccumStmt",
    "AffineExpr",
    "BlockPlan",
    "DenseArray",
    "ElementType",
    "HardwareShape",
    "IndexVector",
    "Layout",
    "LiftSpec",
    "Loop",
    "LoopNest",
    "MoaError",
    "PlanReport",
    "Product",
    "ScalarOp",
    "Shape",
    "access_trace",
    "build_blocked",
    "build_col_lifted",
    "build_gemm_nest",
    "build_row_lifted",
    "enumerate_block_shapes",
    "eval_nest",
    "gamma",
    "gamma_inverse",
    "gamma_prefix",
    "gemm_moa",
    "gemm_naive",
    "hadamard",
    "identity",
    "index_vectors",
    "inner",
    "interchange",
    "iota",
    "ipophp",
    "is_parallel_safe",
    "kron",
    "lift",
    "load_hardware",
    "ones_like",
    "outer",
    "plan_report",
    "pointwise",
    "predict_switch_threshold",
    "psi",
    "psi_span",
    "random_integer_matrix",
    "random_shape",
    "rav",
    "reduce",
    "render_c",
    "run_nest",
    "scalar_extend",
    "select_block",
    "shape_of",
    "stack",
    "trace_accesses",
    "write_sets",
    "zeros",
    "zeros_like",
    "__version__",
]
