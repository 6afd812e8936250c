"""Manufactured test fronts: grid operators, separators, Schur complements.

Fronts are built the brute-force way on purpose: assemble a grid stencil
matrix, split it with a planar separator, and eliminate both interior sides
with dense solves.  The result is an exact dense Schur complement over the
separator together with the separator subgraph, which is precisely the
setting the boundary-distance compression scheme expects.  Clarity beats
speed here; this module doubles as the independent oracle for the fast
paths, so grids are capped at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidPlaneError, SingularInteriorError
from .graph import SparsePattern
from .lowrank import BlockAccessor

STENCILS = ("laplacian", "vector-laplacian")
KERNELS = ("inv-distance", "exp-decay")

AXIS_NAMES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class GridSpec:
    """Regular grid with a scalar or 3-component stencil.

    Extents of 1 are allowed and degenerate that axis away (a 5x1 grid is a
    5-node chain); any other extent must be at least 3 so separators stay
    strictly interior.
    """

    dims: tuple
    stencil: str = "laplacian"

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) not in (2, 3):
            raise ValueError("dims must have 2 or 3 extents")
        if any(d < 1 or d == 2 for d in dims):
            raise ValueError("extents must be 1 (degenerate) or >= 3")
        if self.stencil not in STENCILS:
            raise ValueError(f"unknown stencil {self.stencil!r}")

    @property
    def dof_per_node(self) -> int:
        return 3 if self.stencil == "vector-laplacian" else 1

    @property
    def node_count(self) -> int:
        return int(np.prod(self.dims))

    @property
    def dof_count(self) -> int:
        return self.node_count * self.dof_per_node


@dataclass(frozen=True)
class FrontProblem:
    """A dense front, its separator subgraph and the vertex bookkeeping.

    ``graph`` is relabeled so vertex i corresponds to front row i;
    ``ordering`` records the original operator vertex id per front row.
    """

    front: np.ndarray
    graph: SparsePattern
    ordering: np.ndarray
    rhs: np.ndarray

    @property
    def n(self) -> int:
        return self.front.shape[0]

    def accessor(self) -> BlockAccessor:
        return BlockAccessor.from_matrix(self.front, pattern=self.graph)


def _node_coords(dims):
    """All grid coordinates in lexicographic (row-major) order."""
    grids = np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")
    return np.column_stack([g.ravel() for g in grids])


def grid_operator(spec: GridSpec) -> SparsePattern:
    """Assemble the stencil matrix with Dirichlet-eliminated boundary.

    Axes of extent > 1 contribute 2 to every diagonal entry (the eliminated
    boundary keeps the diagonal constant) and -1 couplings between grid
    neighbors.  The 3-component stencil applies the same scalar operator to
    each component independently, tripling every node into consecutive
    degrees of freedom.
    """
    dims = spec.dims
    n_nodes = spec.node_count
    diag_value = float(sum(2 for d in dims if d > 1))
    strides = np.zeros(len(dims), dtype=np.intp)
    acc = 1
    for axis in range(len(dims) - 1, -1, -1):
        strides[axis] = acc
        acc *= dims[axis]
    coords = _node_coords(dims)
    rows, cols = [], []
    for axis, extent in enumerate(dims):
        if extent < 2:
            continue
        movable = np.flatnonzero(coords[:, axis] < extent - 1)
        rows.extend(movable)
        cols.extend(movable + strides[axis])
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    dof = spec.dof_per_node
    if dof > 1:
        rows = (rows[:, None] * dof + np.arange(dof)).ravel()
        cols = (cols[:, None] * dof + np.arange(dof)).ravel()
    values = np.full(rows.size, -1.0)
    diagonal = np.full(n_nodes * dof, diag_value)
    return SparsePattern.from_edges(n_nodes * dof, rows, cols, values, diagonal)


def planar_separator(spec: GridSpec, axis, plane: int):
    """Split the grid at a plane: (separator, left, right) dof id lists.

    The plane must be strictly interior.  Separator dofs are ordered
    lexicographically by the remaining coordinates; left and right keep the
    natural grid order.
    """
    if isinstance(axis, str):
        if axis not in AXIS_NAMES:
            raise ValueError(f"axis must be one of {tuple(AXIS_NAMES)} or an integer")
        axis = AXIS_NAMES[axis]
    if not 0 <= axis < len(spec.dims):
        raise InvalidPlaneError(f"axis {axis} out of range for dims {spec.dims}")
    extent = spec.dims[axis]
    if not 0 < plane < extent - 1:
        raise InvalidPlaneError(
            f"plane {plane} is not strictly interior to extent {extent}")
    coords = _node_coords(spec.dims)
    along = coords[:, axis]
    dof = spec.dof_per_node

    def expand(nodes):
        nodes = np.asarray(nodes, dtype=np.intp)
        if dof == 1:
            return nodes
        return (nodes[:, None] * dof + np.arange(dof)).ravel()

    sep = expand(np.flatnonzero(along == plane))
    left = expand(np.flatnonzero(along < plane))
    right = expand(np.flatnonzero(along > plane))
    return sep, left, right


def schur_front(op: SparsePattern, sep, left, right, rhs_seed: int = 0,
                rhs_columns: int = 1) -> FrontProblem:
    """Eliminate both interior sides and return the dense separator front.

    Requires a valid separator: the two interior sides must not touch.  The
    elimination is dense on purpose (this is the oracle path); grids are
    small enough that the interior solves stay cheap.
    """
    sep = np.asarray(sep, dtype=np.intp)
    left = np.asarray(left, dtype=np.intp)
    right = np.asarray(right, dtype=np.intp)
    total = sep.size + left.size + right.size
    merged = np.concatenate([sep, left, right])
    if total != op.n or np.unique(merged).size != total:
        raise ValueError("sep, left, right must partition the vertex set")
    _check_separated(op, left, right)
    front = op.submatrix_dense(sep, sep)
    for side in (left, right):
        if side.size == 0:
            continue
        a_si = op.submatrix_dense(sep, side)
        a_is = op.submatrix_dense(side, sep)
        a_ii = op.submatrix_dense(side, side)
        try:
            front -= a_si @ np.linalg.solve(a_ii, a_is)
        except np.linalg.LinAlgError as exc:
            raise SingularInteriorError(str(exc)) from exc
    graph = op.induced(sep)
    rng = np.random.default_rng(rhs_seed)
    rhs = rng.standard_normal((sep.size, rhs_columns))
    return FrontProblem(front, graph, sep.copy(), rhs)


def _check_separated(op: SparsePattern, left, right) -> None:
    right_mask = np.zeros(op.n, dtype=bool)
    right_mask[right] = True
    for v in left:
        if right_mask[op.neighbors(int(v))].any():
            raise ValueError("left and right sides are connected; "
                             "the separator is invalid")


def grid_front(spec: GridSpec, axis, plane: int, rhs_seed: int = 0) -> FrontProblem:
    """Convenience pipeline: operator, planar split, Schur complement."""
    op = grid_operator(spec)
    sep, left, right = planar_separator(spec, axis, plane)
    return schur_front(op, sep, left, right, rhs_seed=rhs_seed)


def kernel_matrix(n: int, kind: str = "inv-distance", shift: float = 0.0) -> np.ndarray:
    """Dense smooth-kernel matrix k(|i - j|) + shift on the diagonal."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if kind not in KERNELS:
        raise ValueError(f"unknown kernel {kind!r}, expected one of {KERNELS}")
    r = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(np.float64)
    a = 1.0 / (1.0 + r) if kind == "inv-distance" else np.exp(-r / 8.0)
    if shift:
        a = a + shift * np.eye(n)
    return a
