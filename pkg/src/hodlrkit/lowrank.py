"""Low-rank compression of off-diagonal blocks.

Three interchangeable schemes sit behind :func:`compress`:

* ``svd``  - truncated singular value decomposition, the accuracy reference;
* ``aca``  - adaptive cross approximation with partial pivoting, which
  touches only O(rank) rows and columns through the block oracle;
* ``bdlr`` - boundary-distance pseudo-skeleton selection driven by the
  sparse-matrix graph attached to the block, with a complete-pivoting LU of
  the skeleton intersection in place of an explicit pseudoinverse.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dense import FullPivLU, SvdResult, lu_full, svd
from .errors import DegenerateSkeletonError, EmptySelectionError
from .graph import BlockGraphView, SparsePattern, next_layer, select_by_depth

log = logging.getLogger("hodlrkit")

SCHEMES = ("svd", "aca", "bdlr")


def _as_slice(idx: np.ndarray):
    """Slice equivalent of a contiguous ascending index array, else None."""
    if idx.size == 0:
        return None
    lo = int(idx[0])
    if np.array_equal(idx, np.arange(lo, lo + idx.size)):
        return slice(lo, lo + idx.size)
    return None


@dataclass(frozen=True)
class LowRankFactor:
    """Outer-product factor pair, approximating a block as u @ v.T."""

    u: np.ndarray  # m x r
    v: np.ndarray  # n x r

    def __post_init__(self):
        if self.u.shape[1] != self.v.shape[1]:
            raise ValueError("u and v must have the same column count")

    @property
    def rank(self) -> int:
        return self.u.shape[1]

    @property
    def shape(self):
        return (self.u.shape[0], self.v.shape[0])

    def evaluate(self) -> np.ndarray:
        return self.u @ self.v.T

    def rows(self, idx) -> np.ndarray:
        return self.u[np.asarray(idx, dtype=np.intp)] @ self.v.T

    def cols(self, idx) -> np.ndarray:
        return self.u @ self.v[np.asarray(idx, dtype=np.intp)].T

    @classmethod
    def zero(cls, m: int, n: int) -> "LowRankFactor":
        return cls(np.zeros((m, 0)), np.zeros((n, 0)))


class BlockAccessor:
    """Entry/row/column oracle over a block of a dense matrix.

    Wraps a base matrix together with the row and column index lists that
    define the block, plus an optional sparse pattern tying block indices to
    graph vertices (required by the bdlr scheme).  Sub-blocks share the base
    storage; nothing is copied until a scheme materializes what it needs.
    """

    def __init__(self, matrix, rows=None, cols=None, pattern=None,
                 row_verts=None, col_verts=None):
        self._base = np.asarray(matrix, dtype=np.float64)
        if self._base.ndim != 2:
            raise ValueError("base matrix must be 2-D")
        m, n = self._base.shape
        self._rows = np.arange(m, dtype=np.intp) if rows is None else np.asarray(rows, dtype=np.intp)
        self._cols = np.arange(n, dtype=np.intp) if cols is None else np.asarray(cols, dtype=np.intp)
        # contiguous index ranges use basic slicing, which is much cheaper
        self._row_slice = _as_slice(self._rows)
        self._col_slice = _as_slice(self._cols)
        self.pattern = pattern
        if pattern is not None:
            if row_verts is None:
                row_verts = self._rows
            if col_verts is None:
                col_verts = self._cols
            row_verts = np.asarray(row_verts, dtype=np.intp)
            col_verts = np.asarray(col_verts, dtype=np.intp)
            if row_verts.size != self._rows.size or col_verts.size != self._cols.size:
                raise ValueError("vertex lists must match block dimensions")
        self._row_verts = row_verts
        self._col_verts = col_verts

    @classmethod
    def from_matrix(cls, matrix, pattern: SparsePattern | None = None) -> "BlockAccessor":
        """Accessor over a whole (square, graph-aligned) matrix."""
        return cls(matrix, pattern=pattern)

    @property
    def shape(self):
        return (self._rows.size, self._cols.size)

    def entry(self, i: int, j: int) -> float:
        return float(self._base[self._rows[i], self._cols[j]])

    def row(self, i: int) -> np.ndarray:
        if self._col_slice is not None:
            return self._base[self._rows[i], self._col_slice]
        return self._base[self._rows[i], self._cols]

    def col(self, j: int) -> np.ndarray:
        if self._row_slice is not None:
            return self._base[self._row_slice, self._cols[j]]
        return self._base[self._rows, self._cols[j]]

    def rows(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.intp)
        if self._col_slice is not None:
            return self._base[self._rows[idx], self._col_slice]
        return self._base[np.ix_(self._rows[idx], self._cols)]

    def cols(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.intp)
        if self._row_slice is not None:
            return self._base[self._row_slice, self._cols[idx]]
        return self._base[np.ix_(self._rows, self._cols[idx])]

    def materialize(self) -> np.ndarray:
        """Dense copy or read-only view of the block; callers must not write."""
        if self._row_slice is not None and self._col_slice is not None:
            return self._base[self._row_slice, self._col_slice]
        if self._row_slice is not None:
            return self._base[self._row_slice, :][:, self._cols]
        if self._col_slice is not None:
            return self._base[self._rows, self._col_slice]
        return self._base[np.ix_(self._rows, self._cols)]

    def diagonal(self) -> np.ndarray:
        m, n = self.shape
        if m != n:
            raise ValueError("diagonal requires a square block")
        return self._base[self._rows, self._cols]

    def block(self, rows, cols) -> "BlockAccessor":
        """Sub-block accessor; indices are relative to this block."""
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        rv = self._row_verts[rows] if self._row_verts is not None else None
        cv = self._col_verts[cols] if self._col_verts is not None else None
        return BlockAccessor(self._base, self._rows[rows], self._cols[cols],
                             pattern=self.pattern, row_verts=rv, col_verts=cv)

    @property
    def graph_view(self) -> BlockGraphView | None:
        """Graph view of this block, or None when no pattern is attached."""
        if self.pattern is None:
            return None
        return BlockGraphView(self.pattern, self._row_verts, self._col_verts)


@dataclass(frozen=True)
class CompressionConfig:
    """Knobs shared by all compression schemes.

    ``depth`` only matters for bdlr.  ``max_rank`` defaults to the smaller
    block dimension and guards runaway adaptive growth; ``monitor_samples``
    sizes the held-out row/column sets used for error monitoring.
    """

    scheme: str = "svd"
    tol: float = 1e-6
    depth: int = 1
    max_rank: int | None = None
    monitor_samples: int = 8

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must lie strictly between 0 and 1")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.max_rank is not None and self.max_rank < 1:
            raise ValueError("max_rank must be >= 1")

    def rank_cap(self, m: int, n: int) -> int:
        cap = min(m, n)
        if self.max_rank is not None:
            cap = min(cap, self.max_rank)
        return cap


def truncate_svd(s: SvdResult, tol: float) -> LowRankFactor:
    """Keep the smallest rank k with sigma_{k+1} <= tol * sigma_1.

    The singular values are folded into the left factor, so the result
    approximates the original matrix as u @ v.T.
    """
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie strictly between 0 and 1")
    sigma = s.singular_values
    if sigma.size == 0 or sigma[0] == 0.0:
        return LowRankFactor.zero(s.u.shape[0], s.v.shape[0])
    below = np.flatnonzero(sigma <= tol * sigma[0])
    k = int(below[0]) if below.size else sigma.size
    return LowRankFactor(s.u[:, :k] * sigma[:k], s.v[:, :k].copy())


def compress_svd(block: BlockAccessor, cfg: CompressionConfig) -> LowRankFactor:
    """Reference compression: materialize, decompose, truncate."""
    factor = truncate_svd(svd(block.materialize()), cfg.tol)
    cap = cfg.rank_cap(*block.shape)
    if factor.rank > cap:
        factor = LowRankFactor(factor.u[:, :cap], factor.v[:, :cap])
    return factor


def compress_aca(block: BlockAccessor, cfg: CompressionConfig) -> LowRankFactor:
    """Adaptive cross approximation with partial pivoting.

    Starting from row 0, each step takes the largest-magnitude entry of the
    current residual row as the column pivot, forms the residual column
    there, and takes its largest untouched entry as the next row pivot.  The
    iteration stops when the latest cross norm falls below ``tol`` times a
    running Frobenius estimate of the accumulated approximant (the
    sub-tolerance cross is discarded), when the rank cap is reached, or when
    every row has been visited.  An exactly zero residual row restarts the
    sweep from the lowest untouched row.
    """
    m, n = block.shape
    cap = cfg.rank_cap(m, n)
    us: list[np.ndarray] = []
    vs: list[np.ndarray] = []
    if m == 0 or n == 0:
        return LowRankFactor.zero(m, n)
    used = np.zeros(m, dtype=bool)
    norm_sq = 0.0  # Frobenius norm squared of the accumulated approximant
    i = 0
    while len(us) < cap:
        used[i] = True
        res_row = block.row(i).astype(np.float64, copy=True)
        for uk, vk in zip(us, vs):
            res_row -= uk[i] * vk
        j = int(np.argmax(np.abs(res_row)))
        delta = res_row[j]
        if delta == 0.0:
            untouched = np.flatnonzero(~used)
            if untouched.size == 0:
                log.debug("aca: converged by row exhaustion at rank %d", len(us))
                break
            i = int(untouched[0])
            continue
        v = res_row / delta
        u = block.col(j).astype(np.float64, copy=True)
        for uk, vk in zip(us, vs):
            u -= vk[j] * uk
        cross_sq = float(u @ u) * float(v @ v)
        trial_sq = norm_sq + cross_sq
        for uk, vk in zip(us, vs):
            trial_sq += 2.0 * float(u @ uk) * float(v @ vk)
        trial_sq = max(trial_sq, cross_sq)
        if cross_sq <= cfg.tol ** 2 * trial_sq:
            break
        us.append(u)
        vs.append(v)
        norm_sq = trial_sq
        remaining = np.flatnonzero(~used)
        if remaining.size == 0:
            log.debug("aca: converged by row exhaustion at rank %d", len(us))
            break
        i = int(remaining[np.argmax(np.abs(u[remaining]))])
    if not us:
        return LowRankFactor.zero(m, n)
    return LowRankFactor(np.column_stack(us), np.column_stack(vs))


def pseudo_skeleton(block: BlockAccessor, row_sel, col_sel, tol: float,
                    max_rank: int | None = None) -> LowRankFactor:
    """Skeleton approximation from explicit row/column selections.

    Factors the intersection with complete pivoting, truncates at pivots
    below ``tol`` times the leading pivot, and absorbs the triangular
    inverses into the selected columns and rows; no inverse is formed
    explicitly.  Raises DegenerateSkeletonError when the intersection is
    numerically zero while sampled block entries are not.
    """
    row_sel = np.asarray(row_sel, dtype=np.intp)
    col_sel = np.asarray(col_sel, dtype=np.intp)
    m, n = block.shape
    r_rows = block.rows(row_sel)          # selected rows, k x n
    ahat = r_rows[:, col_sel]             # intersection, k x k'
    fact: FullPivLU = lu_full(ahat)
    rank = fact.numerical_rank(tol)
    if max_rank is not None:
        rank = min(rank, max_rank)
    if rank == 0:
        _check_degenerate(block, ahat, tol)
        return LowRankFactor.zero(m, n)
    c_cols = block.cols(col_sel[fact.col_perm[:rank]])   # m x r
    u11 = fact.upper(rank)
    l11 = fact.lower(rank)
    # X @ U11 = C  solved as  U11.T @ X.T = C.T
    c_til = scipy.linalg.solve_triangular(u11, c_cols.T, lower=False, trans="T",
                                          check_finite=False).T
    r_til = scipy.linalg.solve_triangular(l11, r_rows[fact.row_perm[:rank]], lower=True,
                                          unit_diagonal=True, check_finite=False)
    return LowRankFactor(c_til, r_til.T.copy())


def _check_degenerate(block: BlockAccessor, ahat: np.ndarray, tol: float) -> None:
    """Raise when a rank-0 skeleton faces a numerically nonzero block."""
    m, n = block.shape
    probe_rows = np.unique(np.linspace(0, m - 1, num=min(m, 8), dtype=np.intp))
    sampled = np.abs(block.rows(probe_rows)).max() if probe_rows.size else 0.0
    threshold = tol * (np.abs(ahat).max() if ahat.size else 0.0)
    if sampled > threshold:
        raise DegenerateSkeletonError(
            f"skeleton rank 0 but sampled block magnitude {sampled:.3e} "
            f"exceeds {threshold:.3e}; selection depth is too small")


def compress_bdlr(block: BlockAccessor, cfg: CompressionConfig) -> LowRankFactor:
    """Boundary-distance pseudo-skeleton compression.

    Rows and columns within graph distance ``cfg.depth`` of the row/column
    interface form the skeleton; a structurally disconnected block comes
    back as an exact rank-0 factor.
    """
    view = block.graph_view
    if view is None:
        raise ValueError("bdlr compression requires a graph view on the block")
    m, n = block.shape
    try:
        row_sel, col_sel = select_by_depth(view, cfg.depth)
    except EmptySelectionError:
        return LowRankFactor.zero(m, n)
    return pseudo_skeleton(block, row_sel, col_sel, cfg.tol,
                           max_rank=cfg.rank_cap(m, n))


def compress(block: BlockAccessor, cfg: CompressionConfig) -> LowRankFactor:
    """Dispatch to the configured scheme."""
    if cfg.scheme == "svd":
        return compress_svd(block, cfg)
    if cfg.scheme == "aca":
        return compress_aca(block, cfg)
    return compress_bdlr(block, cfg)


def held_out_samples(block: BlockAccessor, cfg: CompressionConfig,
                     skeleton_rows=None, skeleton_cols=None):
    """Row/column positions for error monitoring, disjoint from the skeleton.

    With a graph view the next BFS layer beyond the selection depth is
    preferred; otherwise evenly spaced unselected positions are used.
    """
    m, n = block.shape
    view = block.graph_view
    if view is not None and cfg.scheme == "bdlr":
        rows = next_layer(view, "row", cfg.depth, cfg.monitor_samples)
        cols = next_layer(view, "col", cfg.depth, cfg.monitor_samples)
        if rows.size and cols.size:
            return rows, cols
    taken_r = set() if skeleton_rows is None else set(int(i) for i in skeleton_rows)
    taken_c = set() if skeleton_cols is None else set(int(j) for j in skeleton_cols)
    rows = [i for i in np.unique(np.linspace(0, m - 1, num=min(m, 4 * cfg.monitor_samples),
                                             dtype=np.intp)) if int(i) not in taken_r]
    cols = [j for j in np.unique(np.linspace(0, n - 1, num=min(n, 4 * cfg.monitor_samples),
                                             dtype=np.intp)) if int(j) not in taken_c]
    return (np.asarray(rows[:cfg.monitor_samples], dtype=np.intp),
            np.asarray(cols[:cfg.monitor_samples], dtype=np.intp))


def monitor_error(block: BlockAccessor, factor: LowRankFactor,
                  held_rows, held_cols) -> float:
    """Relative Frobenius error of the factor on held-out rows and columns.

    The restriction is the union of the sampled rows and columns; the
    overlap is counted once.  When the held-out reference norm underflows,
    the absolute error norm is returned instead (with a warning), so the
    result is always finite.
    """
    held_rows = np.asarray(held_rows, dtype=np.intp)
    held_cols = np.asarray(held_cols, dtype=np.intp)
    a_rows = block.rows(held_rows)
    a_cols = block.cols(held_cols)
    e_rows = a_rows - factor.rows(held_rows)
    e_cols = a_cols - factor.cols(held_cols)
    err_sq = float(np.sum(e_rows ** 2)) + float(np.sum(e_cols ** 2)) \
        - float(np.sum(e_rows[:, held_cols] ** 2))
    ref_sq = float(np.sum(a_rows ** 2)) + float(np.sum(a_cols ** 2)) \
        - float(np.sum(a_rows[:, held_cols] ** 2))
    err = np.sqrt(max(err_sq, 0.0))
    if ref_sq < 1e-300:
        log.warning("monitor_error: held-out reference norm underflow, "
                    "returning absolute error")
        return err
    return err / np.sqrt(ref_sq)
