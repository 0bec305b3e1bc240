"""
Command-line front end: `moa-gemm verify | bench | render | plan`.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence, Tuple

from .bench import check_config, run_bench, write_csv
from .cost import ELEMENT_BYTES, load_hardware, plan_report
from .errors import MoaError
from .lifting import build_blocked, build_col_lifted, build_row_lifted
from .onf import LoopNest, build_gemm_nest, render_c
from .verify import verify_all

logger = logging.getLogger(__name__)

PRAGMA = "#pragma acc parallel loop"

# variant -> (function name, designated parallel loop)
VARIANTS = {
    "ip": ("ip", "i"),
    "ip_rows": ("ip_rows", "k"),
    "ip_cols": ("ip_cols", "i"),
    "blocked": ("ip_blocked", "ib"),
}


def parse_block(text: str) -> Tuple[int, int]:
    """Parse "32x32" (or a bare "32") into (rows, cols)."""
    rows, _, cols = text.lower().partition("x")
    try:
        return int(rows), int(cols or rows)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid block {text!r}, expected RxC") from None


def build_variant(variant: str, args: argparse.Namespace) -> LoopNest:
    m, n, p = args.m, args.n, args.p
    if variant == "ip":
        return build_gemm_nest(m, n, p)
    if variant == "ip_rows":
        return build_row_lifted(m, n, p, args.np)
    if variant == "ip_cols":
        return build_col_lifted(m, n, p, args.rsize)
    return build_blocked(m, n, p, args.bi, args.bk, args.bj)


def cmd_verify(args: argparse.Namespace) -> int:
    report = verify_all(args.max_dim, args.seed, trials=args.trials)
    sys.stdout.write(report.render())
    return 0 if report.ok else 1


def cmd_bench(args: argparse.Namespace) -> int:
    check_config(args.sizes, args.blocks, args.trials, args.workers)
    out = Path(args.out)
    # an unwritable path fails here, before any timing
    with out.open("w", newline="", encoding="utf-8") as handle:
        try:
            records = run_bench(
                args.sizes,
                args.blocks,
                trials=args.trials,
                seed=args.seed,
                parallel=args.parallel,
                workers=args.workers,
                skip_verify=args.skip_verify,
            )
        except MoaError:
            handle.close()
            out.unlink()
            raise
        for record in records:
            block = (
                "-" if record.block_rows is None else f"{record.block_rows}x{record.block_cols}"
            )
            print(
                f"{record.kernel} N={record.m} block={block} "
                f"median={record.wall_seconds:.6f}s checksum={record.checksum!r}"
            )
        write_csv(records, handle)
    print(args.out)
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    fn_name, parallel_loop = VARIANTS[args.variant]
    nest = build_variant(args.variant, args)
    pragmas = [(parallel_loop, PRAGMA)] if args.pragmas else None
    source = render_c(nest, fn_name, pragmas)
    if args.out:
        Path(args.out).write_text(source, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(source)
    return 0


def cmd_plan(args: argparse.Namespace) -> int:
    hw = load_hardware(args.hw)
    overrides = {
        key: value
        for key, value in (
            ("l1_budget_bytes", args.l1_budget),
            ("l1_full_bytes", args.l1_full),
            ("global_share_divisor", args.share_divisor),
        )
        if value is not None
    }
    if overrides:
        if args.l1_budget is not None and args.l1_full is None:
            overrides["l1_full_bytes"] = max(hw.l1_full_bytes, args.l1_budget)
        hw = hw.with_overrides(**overrides)
    sys.stdout.write(plan_report(hw, ELEMENT_BYTES[args.elem]).render())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moa-gemm",
        description="Verify, benchmark, render and plan MoA GEMM loop nests.",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging threshold for messages on stderr",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="check every formulation against the oracle")
    verify.add_argument("--max-dim", type=int, default=6)
    verify.add_argument("--seed", type=int, default=42)
    verify.add_argument("--trials", type=int, default=3, help="matrix pairs per size")
    verify.set_defaults(handler=cmd_verify)

    bench = sub.add_parser("bench", help="time the kernels and write CSV")
    bench.add_argument("--sizes", type=int, nargs="+", default=[256, 512])
    bench.add_argument("--blocks", type=parse_block, nargs="+", default=[(32, 32)])
    bench.add_argument("--trials", type=int, default=3)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", default="bench.csv")
    bench.add_argument("--parallel", action="store_true", help="also time the row-parallel kernel")
    bench.add_argument("--workers", type=int, default=4)
    bench.add_argument("--skip-verify", action="store_true")
    bench.set_defaults(handler=cmd_bench)

    render = sub.add_parser("render", help="print a GEMM loop nest as C")
    render.add_argument("variant", choices=sorted(VARIANTS))
    sizes = {"m": 64, "n": 64, "p": 64, "np": 4, "rsize": 8, "bi": 32, "bk": 32, "bj": 32}
    for name, default in sizes.items():
        render.add_argument(f"--{name}", type=int, default=default)
    render.add_argument("--pragmas", action="store_true")
    render.add_argument("--out")
    render.set_defaults(handler=cmd_render)

    plan = sub.add_parser("plan", help="select a block size for a hardware shape")
    plan.add_argument("--hw", default="v100-16g", help="preset name or JSON path")
    plan.add_argument("--elem", choices=sorted(ELEMENT_BYTES), default="f64")
    plan.add_argument("--l1-budget", type=int)
    plan.add_argument("--l1-full", type=int)
    plan.add_argument("--share-divisor", type=int)
    plan.set_defaults(handler=cmd_plan)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logger.debug("running %s", args.command)
    try:
        return int(args.handler(args))
    except MoaError as exc:
        message = exc.args[0] if exc.args else str(exc)
        print(f"moa-gemm: error: {message}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"moa-gemm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
