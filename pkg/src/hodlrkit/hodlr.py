"""Hierarchically off-diagonal low-rank factorization and solve.

A square front is split recursively into 2x2 blocks; the two off-diagonal
blocks of every split are compressed to outer-product form and the diagonal
blocks recurse until they fall below the leaf threshold, where a dense LU
takes over.  The factorization eliminates the auxiliary coupling variables
of each split, so a solve is leaf LU sweeps plus a small stored coupling
correction per internal node, applied bottom-up.

The right-hand-side-independent work is shared across levels by carrying an
extension block Z down the recursion: each node prepends its own column
factors to the extension it received, and a single downward pass therefore
yields every ``K^{-1} U`` product the coupling systems need.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dense import PartialPivLU, lu_partial
from .errors import (
    DimensionMismatchError,
    SingularLeafError,
    SingularMatrixError,
    SingularSchurError,
)
from .lowrank import BlockAccessor, CompressionConfig, LowRankFactor, compress


@dataclass(frozen=True)
class TreeNode:
    level: int
    lo: int
    hi: int
    left: int = -1   # child slots in HodlrTree.nodes, -1 for a leaf
    right: int = -1

    @property
    def size(self) -> int:
        return self.hi - self.lo

    @property
    def is_leaf(self) -> bool:
        return self.left < 0


@dataclass(frozen=True)
class HodlrTree:
    nodes: list[TreeNode]
    leaf_threshold: int

    @property
    def n(self) -> int:
        return self.nodes[0].size

    @property
    def depth(self) -> int:
        return max(node.level for node in self.nodes)

    def internal_nodes(self):
        return [k for k, node in enumerate(self.nodes) if not node.is_leaf]

    def node_at(self, level: int, index: int) -> int:
        """Slot of the index-th internal node at a level, in left-to-right order."""
        hits = [k for k in self.internal_nodes() if self.nodes[k].level == level]
        hits.sort(key=lambda k: self.nodes[k].lo)
        if index < 0 or index >= len(hits):
            raise IndexError(f"no internal node ({level}, {index})")
        return hits[index]


def build_tree(n: int, leaf_threshold: int) -> HodlrTree:
    """Balanced bisection tree over an index range.

    A range splits at ceil(size / 2), so the smaller child takes the tail;
    a node is a leaf exactly when its size is at most the threshold.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if leaf_threshold < 1:
        raise ValueError("leaf_threshold must be >= 1")
    nodes: list[TreeNode] = []

    def descend(level, lo, hi):
        slot = len(nodes)
        nodes.append(None)
        size = hi - lo
        if size <= leaf_threshold:
            nodes[slot] = TreeNode(level, lo, hi)
            return slot
        mid = lo + (size + 1) // 2
        left = descend(level + 1, lo, mid)
        right = descend(level + 1, mid, hi)
        nodes[slot] = TreeNode(level, lo, hi, left, right)
        return slot

    descend(0, 0, n)
    return HodlrTree(nodes, leaf_threshold)


@dataclass(frozen=True)
class Coupling:
    """Stored per internal node: everything the coupling correction needs.

    ``d_left`` and ``d_right`` are the diagonal-block solves of the children
    against their own column factors; their column counts equal the ranks of
    the sibling-side row factors ``v_upper`` and ``v_lower``.  ``schur_lu``
    factors the small coupling system with unit diagonal blocks.
    """

    v_upper: np.ndarray   # rows of the upper block's row factor (right-child rows)
    v_lower: np.ndarray   # rows of the lower block's row factor (left-child rows)
    d_left: np.ndarray    # K_left^{-1} @ U_upper
    d_right: np.ndarray   # K_right^{-1} @ U_lower
    schur_lu: PartialPivLU

    @property
    def rank_upper(self) -> int:
        return self.v_upper.shape[1]

    @property
    def rank_lower(self) -> int:
        return self.v_lower.shape[1]

    def correct(self, top: np.ndarray, bottom: np.ndarray):
        """Apply the stored coupling correction to child solutions."""
        rhs = np.vstack([self.v_lower.T @ top, self.v_upper.T @ bottom])
        y = self.schur_lu.solve(rhs)
        y_low, y_up = y[:self.rank_lower], y[self.rank_lower:]
        return top - self.d_left @ y_up, bottom - self.d_right @ y_low


@dataclass
class HodlrFactorization:
    tree: HodlrTree
    config: CompressionConfig
    leaf_lus: list[PartialPivLU | None]
    couplings: list[Coupling | None]

    @property
    def n(self) -> int:
        return self.tree.n

    def off_diagonal_ranks(self):
        """(child level, upper rank, lower rank) per internal node."""
        out = []
        for k in self.tree.internal_nodes():
            cpl = self.couplings[k]
            out.append((self.tree.nodes[k].level + 1, cpl.rank_upper, cpl.rank_lower))
        return out


@dataclass
class SolveReport:
    """Per-level rank telemetry and per-phase wall times for one front."""

    ranks_per_level: list[dict] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    residual: float | None = None

    def to_dict(self) -> dict:
        return {
            "ranks_per_level": self.ranks_per_level,
            "timings": {k: float(v) for k, v in self.timings.items()},
            "residual": self.residual,
        }


def _ranks_summary(fact: HodlrFactorization) -> list[dict]:
    per_level: dict[int, list[int]] = {}
    for level, r_up, r_low in fact.off_diagonal_ranks():
        per_level.setdefault(level, []).extend((r_up, r_low))
    return [
        {"level": level, "max_rank": int(max(ranks)), "mean_rank": float(np.mean(ranks))}
        for level, ranks in sorted(per_level.items())
    ]


def factorize(front: BlockAccessor, tree: HodlrTree, cfg: CompressionConfig,
              threads: int = 1):
    """Factor a square front over a bisection tree.

    Returns the factorization together with a report of per-level
    off-diagonal ranks and per-phase timings.  The two children of a node
    are independent and may be processed concurrently (``threads > 1``);
    the coupling assembly at the parent is the join point.
    """
    m, n = front.shape
    if m != n or n != tree.n:
        raise DimensionMismatchError(
            f"front is {m}x{n}, tree expects {tree.n}x{tree.n}")
    leaf_lus: list[PartialPivLU | None] = [None] * len(tree.nodes)
    couplings: list[Coupling | None] = [None] * len(tree.nodes)
    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        _, timings = _factorize_node(front, tree, 0, cfg,
                                     np.zeros((n, 0)), leaf_lus, couplings,
                                     executor, threads)
    finally:
        if executor is not None:
            executor.shutdown(wait=True)
    fact = HodlrFactorization(tree, cfg, leaf_lus, couplings)
    report = SolveReport(ranks_per_level=_ranks_summary(fact), timings=timings)
    return fact, report


def _merge_timings(total: dict, part: dict) -> dict:
    for key, val in part.items():
        total[key] = total.get(key, 0.0) + val
    return total


def _factorize_node(front, tree, slot, cfg, ext, leaf_lus, couplings,
                    executor, budget):
    """Factor one subtree and return (K^{-1} @ ext, timings)."""
    node = tree.nodes[slot]
    timings: dict[str, float] = {}
    if node.is_leaf:
        tic = time.perf_counter()
        try:
            lu = lu_partial(front.materialize())
        except SingularMatrixError as exc:
            raise SingularLeafError(
                f"leaf block [{node.lo}, {node.hi}) is singular") from exc
        leaf_lus[slot] = lu
        solved = lu.solve(ext)
        timings["leaf_lu"] = time.perf_counter() - tic
        return solved, timings

    left, right = tree.nodes[node.left], tree.nodes[node.right]
    na = left.size
    idx_a = np.arange(na)
    idx_b = np.arange(na, node.size)

    tic = time.perf_counter()
    upper: LowRankFactor = compress(front.block(idx_a, idx_b), cfg)
    lower: LowRankFactor = compress(front.block(idx_b, idx_a), cfg)
    timings["lowrank"] = time.perf_counter() - tic

    ext_a = np.hstack([upper.u, ext[:na]])
    ext_b = np.hstack([lower.u, ext[na:]])

    front_a = front.block(idx_a, idx_a)
    front_b = front.block(idx_b, idx_b)
    if executor is not None and budget > 1:
        half = budget // 2
        fut = executor.submit(_factorize_node, front_a, tree, node.left, cfg,
                              ext_a, leaf_lus, couplings, executor, half)
        wb, tb = _factorize_node(front_b, tree, node.right, cfg, ext_b,
                                 leaf_lus, couplings, executor, budget - half)
        wa, ta = fut.result()
    else:
        wa, ta = _factorize_node(front_a, tree, node.left, cfg, ext_a,
                                 leaf_lus, couplings, executor, 1)
        wb, tb = _factorize_node(front_b, tree, node.right, cfg, ext_b,
                                 leaf_lus, couplings, executor, 1)
    _merge_timings(timings, ta)
    _merge_timings(timings, tb)

    r_up, r_low = upper.rank, lower.rank
    d_left, c_left = wa[:, :r_up], wa[:, r_up:]
    d_right, c_right = wb[:, :r_low], wb[:, r_low:]

    tic = time.perf_counter()
    schur = np.eye(r_low + r_up)
    schur[:r_low, r_low:] = lower.v.T @ d_left
    schur[r_low:, :r_low] = upper.v.T @ d_right
    try:
        schur_lu = lu_partial(schur)
    except SingularMatrixError as exc:
        raise SingularSchurError(
            f"coupling system singular at node [{node.lo}, {node.hi}); "
            "compression tolerance is too loose") from exc
    coupling = Coupling(upper.v, lower.v, d_left, d_right, schur_lu)
    couplings[slot] = coupling
    top, bottom = coupling.correct(c_left, c_right)
    timings["schur"] = timings.get("schur", 0.0) + time.perf_counter() - tic
    return np.vstack([top, bottom]), timings


def solve(fact: HodlrFactorization, rhs) -> np.ndarray:
    """Solve the factored front against one or many right-hand sides."""
    b = np.asarray(rhs, dtype=np.float64)
    vector = b.ndim == 1
    if vector:
        b = b[:, None]
    if b.ndim != 2 or b.shape[0] != fact.n:
        raise DimensionMismatchError(
            f"rhs has shape {np.shape(rhs)}, expected ({fact.n}, s)")
    x = _solve_node(fact, 0, b)
    return x[:, 0] if vector else x


def _solve_node(fact: HodlrFactorization, slot: int, b: np.ndarray) -> np.ndarray:
    node = fact.tree.nodes[slot]
    if node.is_leaf:
        return fact.leaf_lus[slot].solve(b)
    na = fact.tree.nodes[node.left].size
    top = _solve_node(fact, node.left, b[:na])
    bottom = _solve_node(fact, node.right, b[na:])
    top, bottom = fact.couplings[slot].correct(top, bottom)
    return np.vstack([top, bottom])


def apply(front: BlockAccessor, x) -> np.ndarray:
    """Exact product of the original front with a vector or matrix."""
    a = front.materialize() if isinstance(front, BlockAccessor) else np.asarray(front)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != a.shape[1]:
        raise DimensionMismatchError(
            f"operand has {x.shape[0]} rows, front has {a.shape[1]} columns")
    return a @ x


def residual_norm(front: BlockAccessor, x, rhs) -> float:
    """Relative residual of a solve, measured against the original front."""
    rhs = np.asarray(rhs, dtype=np.float64)
    num = np.linalg.norm(apply(front, x) - rhs)
    den = np.linalg.norm(rhs)
    return float(num / den) if den > 0 else float(num)
