"""Sparse symmetric adjacency and the boundary-distance machinery.

The pseudo-skeleton compression scheme selects rows and columns of an
off-diagonal block by how close their graph vertices sit to the interface
between the row set and the column set.  This module provides the sparse
pattern container, boundary detection, the multi-source BFS distance index
and the depth-based selection built on top of it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import EmptySelectionError

UNREACHABLE = np.inf


@dataclass(frozen=True)
class SparsePattern:
    """Compressed adjacency of a symmetric sparse matrix.

    Neighbor lists are sorted and duplicate-free; self-loops are never
    stored as edges (the diagonal is held separately).  ``edge_values`` is
    aligned with ``indices`` when numeric values are attached.
    """

    indptr: np.ndarray
    indices: np.ndarray
    edge_values: np.ndarray | None = None
    diagonal: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def nnz(self) -> int:
        return len(self.indices)

    @property
    def has_values(self) -> bool:
        return self.edge_values is not None

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @classmethod
    def from_edges(cls, n, rows, cols, values=None, diagonal=None) -> "SparsePattern":
        """Build from edge triplets, symmetrizing the pattern by union.

        Self-loop values land on the diagonal.  A pair given in both
        orientations must carry the same value.
        """
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        if rows.size and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n):
            raise ValueError("edge endpoint out of range")
        diag = np.zeros(n) if values is not None else None
        if diagonal is not None:
            diag = np.array(diagonal, dtype=np.float64)
        edge_val = {}
        adj = {}
        vals = None if values is None else np.asarray(values, dtype=np.float64)
        for k in range(rows.size):
            i, j = int(rows[k]), int(cols[k])
            if i == j:
                if vals is not None and diag is not None:
                    diag[i] = vals[k]
                continue
            key = (i, j) if i < j else (j, i)
            if vals is not None:
                if key in edge_val and edge_val[key] != vals[k]:
                    raise ValueError(f"conflicting values for symmetric pair {key}")
                edge_val[key] = float(vals[k])
            adj.setdefault(i, set()).add(j)
            adj.setdefault(j, set()).add(i)
        indptr = np.zeros(n + 1, dtype=np.intp)
        indices = []
        flat_vals = [] if vals is not None else None
        for v in range(n):
            nbrs = sorted(adj.get(v, ()))
            indices.extend(nbrs)
            if flat_vals is not None:
                for u in nbrs:
                    flat_vals.append(edge_val[(v, u) if v < u else (u, v)])
            indptr[v + 1] = len(indices)
        return cls(
            indptr,
            np.asarray(indices, dtype=np.intp),
            None if flat_vals is None else np.asarray(flat_vals),
            diag,
        )

    def submatrix_dense(self, rows, cols) -> np.ndarray:
        """Materialize the dense sub-block at the given vertex lists."""
        if self.edge_values is None or self.diagonal is None:
            raise ValueError("pattern carries no numeric values")
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        col_pos = {int(c): k for k, c in enumerate(cols)}
        out = np.zeros((rows.size, cols.size))
        for a, v in enumerate(rows):
            v = int(v)
            lo, hi = self.indptr[v], self.indptr[v + 1]
            for u, val in zip(self.indices[lo:hi], self.edge_values[lo:hi]):
                b = col_pos.get(int(u))
                if b is not None:
                    out[a, b] = val
            b = col_pos.get(v)
            if b is not None:
                out[a, b] = self.diagonal[v]
        return out

    def induced(self, verts) -> "SparsePattern":
        """Subgraph on ``verts``, relabeled 0..len(verts)-1 in the given order."""
        verts = np.asarray(verts, dtype=np.intp)
        pos = {int(v): k for k, v in enumerate(verts)}
        rows, cols, vals = [], [], [] if self.has_values else None
        for a, v in enumerate(verts):
            v = int(v)
            lo, hi = self.indptr[v], self.indptr[v + 1]
            for idx in range(lo, hi):
                b = pos.get(int(self.indices[idx]))
                if b is not None:
                    rows.append(a)
                    cols.append(b)
                    if vals is not None:
                        vals.append(self.edge_values[idx])
        diag = self.diagonal[verts] if self.diagonal is not None else None
        return SparsePattern.from_edges(len(verts), rows, cols, vals, diag)


@dataclass(frozen=True)
class BlockGraphView:
    """Row and column vertex sets of an off-diagonal block, over one pattern."""

    pattern: SparsePattern
    row_verts: np.ndarray
    col_verts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_verts", np.asarray(self.row_verts, dtype=np.intp))
        object.__setattr__(self, "col_verts", np.asarray(self.col_verts, dtype=np.intp))
        n = self.pattern.n
        for name, verts in (("row", self.row_verts), ("col", self.col_verts)):
            if verts.size and (verts.min() < 0 or verts.max() >= n):
                raise ValueError(f"{name} vertex id out of range")
            if len(np.unique(verts)) != verts.size:
                raise ValueError(f"{name} vertex list has duplicates")
        if np.intersect1d(self.row_verts, self.col_verts).size:
            raise ValueError("row and column vertex sets must be disjoint")

    def side(self, which: str) -> np.ndarray:
        if which == "row":
            return self.row_verts
        if which == "col":
            return self.col_verts
        raise ValueError(f"side must be 'row' or 'col', got {which!r}")

    def other(self, which: str) -> np.ndarray:
        return self.col_verts if which == "row" else self.row_verts


def boundary_vertices(view: BlockGraphView, side: str) -> np.ndarray:
    """Vertices of one side with at least one edge into the other side.

    Returns sorted vertex ids; empty when the two sides are disconnected.
    """
    own = view.side(side)
    other_mask = np.zeros(view.pattern.n, dtype=bool)
    other_mask[view.other(side)] = True
    out = [int(v) for v in own if other_mask[view.pattern.neighbors(int(v))].any()]
    return np.asarray(sorted(out), dtype=np.intp)


def distance_index(view: BlockGraphView, side: str) -> np.ndarray:
    """BFS distance of each side vertex to that side's boundary set.

    The search is restricted to the induced subgraph on the side's own
    vertex set, so paths never route through the other side.  The result is
    aligned with the side's vertex ordering; unreachable vertices get inf.
    """
    own = view.side(side)
    pos = {int(v): k for k, v in enumerate(own)}
    dist = np.full(own.size, UNREACHABLE)
    frontier = deque()
    for v in boundary_vertices(view, side):
        k = pos[int(v)]
        dist[k] = 0.0
        frontier.append(int(v))
    while frontier:
        v = frontier.popleft()
        dv = dist[pos[v]]
        for u in view.pattern.neighbors(v):
            k = pos.get(int(u))
            if k is not None and dist[k] == UNREACHABLE:
                dist[k] = dv + 1.0
                frontier.append(int(u))
    return dist


def select_by_depth(view: BlockGraphView, depth: int):
    """Positions of row/column vertices within ``depth`` of the boundary.

    Each selection is ordered layer by layer (distance 0 first) and by
    ascending vertex id within a layer.  Raises EmptySelectionError when
    either side selects nothing, which signals a structurally zero block.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    sels = []
    for side in ("row", "col"):
        own = view.side(side)
        d = distance_index(view, side)
        keep = np.flatnonzero(d <= depth)
        order = np.lexsort((own[keep], d[keep]))
        sels.append(keep[order].astype(np.intp))
    row_sel, col_sel = sels
    if row_sel.size == 0 or col_sel.size == 0:
        raise EmptySelectionError("no vertices within requested depth of the boundary")
    return row_sel, col_sel


def next_layer(view: BlockGraphView, side: str, depth: int, count: int) -> np.ndarray:
    """Positions of up to ``count`` side vertices just beyond a selection depth.

    Used to pick held-out rows/columns for error monitoring: the next BFS
    layer first, then increasingly distant layers until ``count`` is met or
    the side is exhausted.
    """
    d = distance_index(view, side)
    own = view.side(side)
    beyond = np.flatnonzero((d > depth) & np.isfinite(d))
    order = np.lexsort((own[beyond], d[beyond]))
    return beyond[order][:count].astype(np.intp)
