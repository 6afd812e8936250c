"""Command-line front end.

Subcommands cover the whole experiment loop: ``gen`` manufactures operators
and fronts, ``factor``/``solve`` exercise the hierarchical solver, ``gmres``
runs the preconditioned iteration against a diagonal baseline, and the two
``study-*`` commands emit the rank-error and pivot-distance data behind the
usual plots.  Every command prints a JSON report (or writes it via
``--out``) and can also render figures and CSVs with ``--figures``.

Exit codes: 0 success, 2 iteration did not converge, 1 everything else.
The ``HODLRKIT_LOG`` environment variable (error, info, debug) controls
diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

import numpy as np

from . import figures, hodlr, mmio, report
from .dense import lu_full
from .errors import (
    BlockOutOfRangeError,
    DegenerateSkeletonError,
    EmptySelectionError,
    HodlrkitError,
)
from .frontgen import GridSpec, grid_operator, kernel_matrix, planar_separator, schur_front
from .graph import SparsePattern, distance_index, select_by_depth
from .krylov import GmresConfig, diagonal_preconditioner, gmres
from .lowrank import BlockAccessor, CompressionConfig, compress_bdlr
from .mmio import read_matrix_market, read_ordering

log = logging.getLogger("hodlrkit")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_CONVERGENCE = 2


def _configure_logging() -> None:
    level_name = os.environ.get("HODLRKIT_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level_name not in levels:
        print(f"warning: unknown HODLRKIT_LOG level {level_name!r}", file=sys.stderr)
        level_name = "error"
    logging.basicConfig(stream=sys.stderr, level=levels[level_name],
                        format="%(levelname)s %(name)s: %(message)s")


def _add_compression_flags(parser, include_scheme=True):
    if include_scheme:
        parser.add_argument("--scheme", choices=("svd", "aca", "bdlr"), default="svd")
    parser.add_argument("--tol", type=float, default=1e-6,
                        help="compression tolerance")
    parser.add_argument("--depth", type=int, default=1,
                        help="boundary-distance selection depth (bdlr)")
    parser.add_argument("--leaf-size", type=int, default=64,
                        help="dense-leaf threshold of the bisection tree")
    parser.add_argument("--threads", type=int, default=1,
                        help="factorize child subtrees with this many threads")


def _add_io_flags(parser, need_graph=False):
    parser.add_argument("--front", required=True, help="front matrix (array file)")
    parser.add_argument("--graph", required=need_graph,
                        help="separator graph aligned with the front rows")
    parser.add_argument("--ordering", help="vertex id per front row (provenance)")
    parser.add_argument("--out", help="write the JSON report here instead of stdout")
    parser.add_argument("--figures", help="directory for rendered figures and CSVs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hodlrkit",
        description="hierarchical low-rank direct solver and preconditioner toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate operators, fronts and graphs")
    gen.add_argument("--grid", help="grid extents, e.g. 9x9 or 6x6x6")
    gen.add_argument("--stencil", choices=("laplacian", "vector-laplacian"),
                     default="laplacian")
    gen.add_argument("--sep-axis", default="x", help="separator axis (x, y, z or index)")
    gen.add_argument("--sep-plane", type=int, help="separator plane index")
    gen.add_argument("--kernel", choices=("inv-distance", "exp-decay"),
                     help="generate a dense kernel matrix instead of a grid front")
    gen.add_argument("--n", type=int, help="kernel matrix size")
    gen.add_argument("--shift", type=float, default=0.0, help="kernel diagonal shift")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out-prefix", required=True)
    gen.add_argument("--out", help="write the JSON report here instead of stdout")

    factor = sub.add_parser("factor", help="hierarchical factorization telemetry")
    _add_io_flags(factor)
    _add_compression_flags(factor)

    solve = sub.add_parser("solve", help="factor and solve against a right-hand side")
    _add_io_flags(solve)
    _add_compression_flags(solve)
    solve.add_argument("--rhs", help="right-hand side (array file); seeded when absent")
    solve.add_argument("--seed", type=int, default=0)

    gm = sub.add_parser("gmres", help="preconditioned iteration")
    _add_io_flags(gm)
    _add_compression_flags(gm)
    gm.add_argument("--rhs", help="right-hand side (array file); seeded when absent")
    gm.add_argument("--seed", type=int, default=0)
    gm.add_argument("--gmres-tol", type=float, default=1e-10)
    gm.add_argument("--gmres-maxit", type=int, default=1000)
    gm.add_argument("--baseline", action="store_true",
                    help="also run the diagonal-preconditioner baseline")

    rank = sub.add_parser("study-rank", help="rank/error curves for one block")
    _add_io_flags(rank)
    rank.add_argument("--leaf-size", type=int, default=64)
    rank.add_argument("--block", default="0:0:upper",
                      help="off-diagonal block as LEVEL:INDEX[:upper|lower]")
    rank.add_argument("--tol-list", default="1e-1,1e-3,1e-5",
                      help="comma-separated pivot tolerances for the bdlr curves")
    rank.add_argument("--max-depth", type=int,
                      help="cap the selection depth sweep (default: until saturated)")

    piv = sub.add_parser("study-pivots", help="pivot magnitude vs boundary distance")
    _add_io_flags(piv, need_graph=True)
    piv.add_argument("--leaf-size", type=int, default=64)
    piv.add_argument("--block", default="0:0:upper",
                     help="off-diagonal block as LEVEL:INDEX[:upper|lower]")

    return parser


def _load_front(args) -> BlockAccessor:
    front = read_matrix_market(args.front)
    if not isinstance(front, np.ndarray):
        raise HodlrkitError(f"{args.front} is not a dense array file")
    if front.shape[0] != front.shape[1]:
        raise HodlrkitError(f"front must be square, got {front.shape}")
    pattern = None
    if args.graph:
        pattern = read_matrix_market(args.graph)
        if not isinstance(pattern, SparsePattern):
            raise HodlrkitError(f"{args.graph} is not a coordinate (sparse) file")
        if pattern.n != front.shape[0]:
            raise HodlrkitError(
                f"graph has {pattern.n} vertices, front has {front.shape[0]} rows")
    if getattr(args, "ordering", None):
        read_ordering(args.ordering)  # validated for provenance, not required below
    return BlockAccessor.from_matrix(front, pattern=pattern)


def _load_rhs(args, n: int) -> np.ndarray:
    if getattr(args, "rhs", None):
        rhs = read_matrix_market(args.rhs)
        if not isinstance(rhs, np.ndarray):
            raise HodlrkitError(f"{args.rhs} is not a dense array file")
        if rhs.shape[0] != n:
            raise HodlrkitError(f"rhs has {rhs.shape[0]} rows, front expects {n}")
        return rhs
    rng = np.random.default_rng(args.seed)
    return rng.standard_normal((n, 1))


def _compression_config(args) -> CompressionConfig:
    return CompressionConfig(scheme=args.scheme, tol=args.tol, depth=args.depth)


def _emit(args, rep: dict) -> None:
    text = report.render_report(rep)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="ascii") as handle:
            handle.write(text + "\n")
    else:
        print(text)
    if getattr(args, "figures", None):
        paths = figures.render(rep, args.figures)
        log.info("rendered %s", ", ".join(paths))


def _parse_block(tree: hodlr.HodlrTree, spec: str):
    parts = spec.split(":")
    if len(parts) not in (2, 3):
        raise BlockOutOfRangeError(f"bad block spec {spec!r}, want LEVEL:INDEX[:SIDE]")
    try:
        level, index = int(parts[0]), int(parts[1])
    except ValueError:
        raise BlockOutOfRangeError(f"bad block spec {spec!r}")
    side = parts[2] if len(parts) == 3 else "upper"
    if side not in ("upper", "lower"):
        raise BlockOutOfRangeError(f"block side must be upper or lower, got {side!r}")
    try:
        slot = tree.node_at(level, index)
    except IndexError as exc:
        raise BlockOutOfRangeError(str(exc)) from exc
    node = tree.nodes[slot]
    na = tree.nodes[node.left].size
    rows = np.arange(node.lo, node.lo + na)
    cols = np.arange(node.lo + na, node.hi)
    if side == "lower":
        rows, cols = cols, rows
    return rows, cols, {"level": level, "index": index, "side": side,
                        "rows": int(rows.size), "cols": int(cols.size)}


def _grid_spec(args) -> GridSpec:
    dims = tuple(int(part) for part in args.grid.lower().split("x"))
    return GridSpec(dims, stencil=args.stencil)


def cmd_gen(args) -> int:
    tic = time.perf_counter()
    files = []
    prefix = args.out_prefix
    out_dir = os.path.dirname(prefix)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    if args.kernel:
        if not args.n:
            raise HodlrkitError("--kernel requires --n")
        front = kernel_matrix(args.n, args.kernel, args.shift)
        path = f"{prefix}.front.mtx"
        mmio.write_matrix_market_dense(path, front, comment=f"kernel {args.kernel}")
        files.append(path)
        rng = np.random.default_rng(args.seed)
        rhs_path = f"{prefix}.rhs.mtx"
        mmio.write_matrix_market_dense(rhs_path, rng.standard_normal((args.n, 1)))
        files.append(rhs_path)
        config = {"kernel": args.kernel, "n": args.n, "shift": args.shift,
                  "seed": args.seed}
    else:
        if not args.grid or args.sep_plane is None:
            raise HodlrkitError("grid generation requires --grid and --sep-plane")
        spec = _grid_spec(args)
        op = grid_operator(spec)
        sep, left, right = planar_separator(spec, args.sep_axis, args.sep_plane)
        problem = schur_front(op, sep, left, right, rhs_seed=args.seed)
        paths = {
            "operator": f"{prefix}.operator.mtx",
            "front": f"{prefix}.front.mtx",
            "graph": f"{prefix}.graph.mtx",
            "ordering": f"{prefix}.ordering.txt",
            "rhs": f"{prefix}.rhs.mtx",
        }
        mmio.write_matrix_market_sparse(paths["operator"], op,
                                        comment=f"grid {args.grid} {args.stencil}")
        mmio.write_matrix_market_dense(paths["front"], problem.front,
                                       comment="separator Schur complement")
        mmio.write_matrix_market_sparse(paths["graph"], problem.graph,
                                        comment="separator subgraph, front order")
        mmio.write_ordering(paths["ordering"], problem.ordering)
        mmio.write_matrix_market_dense(paths["rhs"], problem.rhs)
        files.extend(paths.values())
        config = {"grid": args.grid, "stencil": args.stencil,
                  "sep_axis": str(args.sep_axis), "sep_plane": args.sep_plane,
                  "seed": args.seed}
    rep = report.build_report("gen", config, {"files": files},
                              {"total": time.perf_counter() - tic})
    _emit(args, rep)
    return EXIT_OK


def _factorize(args, front: BlockAccessor):
    cfg = _compression_config(args)
    tree = hodlr.build_tree(front.shape[0], args.leaf_size)
    tic = time.perf_counter()
    fact, rep = hodlr.factorize(front, tree, cfg, threads=args.threads)
    rep.timings["factor_total"] = time.perf_counter() - tic
    return fact, rep


def cmd_factor(args) -> int:
    front = _load_front(args)
    _, solve_rep = _factorize(args, front)
    config = {"front": args.front, "graph": args.graph, "scheme": args.scheme,
              "tol": args.tol, "depth": args.depth, "leaf_size": args.leaf_size,
              "threads": args.threads}
    results = {"n": front.shape[0], "ranks_per_level": solve_rep.ranks_per_level}
    rep = report.build_report("factor", config, results, solve_rep.timings)
    _emit(args, rep)
    return EXIT_OK


def cmd_solve(args) -> int:
    front = _load_front(args)
    rhs = _load_rhs(args, front.shape[0])
    fact, solve_rep = _factorize(args, front)
    tic = time.perf_counter()
    x = hodlr.solve(fact, rhs)
    solve_rep.timings["solve"] = time.perf_counter() - tic
    solve_rep.residual = hodlr.residual_norm(front, x, rhs)
    config = {"front": args.front, "graph": args.graph, "rhs": args.rhs,
              "scheme": args.scheme, "tol": args.tol, "depth": args.depth,
              "leaf_size": args.leaf_size, "seed": args.seed,
              "threads": args.threads}
    results = {"n": front.shape[0], "ranks_per_level": solve_rep.ranks_per_level,
               "residual": solve_rep.residual}
    rep = report.build_report("solve", config, results, solve_rep.timings)
    _emit(args, rep)
    return EXIT_OK


def _gmres_run_dict(result) -> dict:
    return {
        "iterations": result.iterations,
        "converged": result.converged,
        "true_residual": result.true_residual,
        "residual_history": result.residual_history,
        "breakdown": result.breakdown,
    }


def cmd_gmres(args) -> int:
    front = _load_front(args)
    rhs = _load_rhs(args, front.shape[0])[:, 0]
    fact, solve_rep = _factorize(args, front)
    dense = front.materialize()
    operator = lambda v: dense @ v  # noqa: E731
    gcfg = GmresConfig(tol=args.gmres_tol, max_iter=args.gmres_maxit)
    tic = time.perf_counter()
    result = gmres(operator, rhs, gcfg, preconditioner=lambda r: hodlr.solve(fact, r))
    solve_rep.timings["iterate"] = time.perf_counter() - tic
    results = {"n": front.shape[0], "ranks_per_level": solve_rep.ranks_per_level,
               "preconditioned": _gmres_run_dict(result)}
    if args.baseline:
        tic = time.perf_counter()
        base = gmres(operator, rhs, gcfg,
                     preconditioner=diagonal_preconditioner(front))
        solve_rep.timings["baseline_iterate"] = time.perf_counter() - tic
        results["baseline"] = _gmres_run_dict(base)
    config = {"front": args.front, "graph": args.graph, "rhs": args.rhs,
              "scheme": args.scheme, "tol": args.tol, "depth": args.depth,
              "leaf_size": args.leaf_size, "seed": args.seed,
              "gmres_tol": args.gmres_tol, "gmres_maxit": args.gmres_maxit,
              "baseline": args.baseline, "threads": args.threads}
    rep = report.build_report("gmres", config, results, solve_rep.timings)
    _emit(args, rep)
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def cmd_study_rank(args) -> int:
    tic = time.perf_counter()
    front = _load_front(args)
    tree = hodlr.build_tree(front.shape[0], args.leaf_size)
    rows, cols, block_info = _parse_block(tree, args.block)
    block = front.block(rows, cols)
    a = block.materialize()
    norm_a = float(np.linalg.norm(a))
    sigma = np.linalg.svd(a, compute_uv=False)
    tail_sq = np.concatenate([np.cumsum(sigma[::-1] ** 2)[::-1], [0.0]])
    svd_curve = []
    for k in range(sigma.size + 1):
        err = float(np.sqrt(max(tail_sq[k], 0.0)) / norm_a) if norm_a > 0 else 0.0
        svd_curve.append({"rank": k, "error": err})
    tol_list = [float(t) for t in args.tol_list.split(",") if t]
    bdlr_curves = []
    if block.graph_view is not None:
        max_depth = args.max_depth if args.max_depth is not None else rows.size + cols.size
        for tol in tol_list:
            points = []
            for depth in range(max_depth + 1):
                cfg = CompressionConfig(scheme="bdlr", tol=tol, depth=depth)
                saturated = False
                try:
                    row_sel, col_sel = select_by_depth(block.graph_view, depth)
                    saturated = (row_sel.size == rows.size and col_sel.size == cols.size)
                except EmptySelectionError:
                    saturated = True
                try:
                    factor = compress_bdlr(block, cfg)
                except DegenerateSkeletonError:
                    log.info("study-rank: degenerate skeleton at tol=%g depth=%d",
                             tol, depth)
                    factor = None
                if factor is None:
                    err = 1.0 if norm_a > 0 else 0.0
                    rank = 0
                else:
                    rank = factor.rank
                    err = (float(np.linalg.norm(a - factor.evaluate()) / norm_a)
                           if norm_a > 0 else 0.0)
                points.append({"depth": depth, "rank": rank, "error": err})
                if saturated:
                    break
            bdlr_curves.append({"tol": tol, "points": points})
    config = {"front": args.front, "graph": args.graph, "block": args.block,
              "leaf_size": args.leaf_size, "tol_list": tol_list}
    results = {"block": block_info, "svd_curve": svd_curve,
               "bdlr_curves": bdlr_curves}
    rep = report.build_report("study-rank", config, results,
                              {"total": time.perf_counter() - tic})
    _emit(args, rep)
    return EXIT_OK


def cmd_study_pivots(args) -> int:
    tic = time.perf_counter()
    front = _load_front(args)
    tree = hodlr.build_tree(front.shape[0], args.leaf_size)
    rows, cols, block_info = _parse_block(tree, args.block)
    block = front.block(rows, cols)
    view = block.graph_view
    if view is None:
        raise HodlrkitError("study-pivots requires a separator graph")
    d_row = distance_index(view, "row")
    d_col = distance_index(view, "col")
    fact = lu_full(block.materialize())
    pivots = []
    for k, mag in enumerate(fact.pivot_magnitudes):
        rd = d_row[fact.row_perm[k]]
        cd = d_col[fact.col_perm[k]]
        pivots.append({
            "magnitude": float(mag),
            "row_d": float(rd) if np.isfinite(rd) else None,
            "col_d": float(cd) if np.isfinite(cd) else None,
        })
    config = {"front": args.front, "graph": args.graph, "block": args.block,
              "leaf_size": args.leaf_size}
    results = {"block": block_info, "pivots": pivots}
    rep = report.build_report("study-pivots", config, results,
                              {"total": time.perf_counter() - tic})
    _emit(args, rep)
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "factor": cmd_factor,
    "solve": cmd_solve,
    "gmres": cmd_gmres,
    "study-rank": cmd_study_rank,
    "study-pivots": cmd_study_pivots,
}


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (HodlrkitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
