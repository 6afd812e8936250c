"""hodlrkit: hierarchical low-rank direct solver and preconditioner toolkit.

Factors dense fronts with a hierarchically off-diagonal low-rank structure,
compressing the off-diagonal blocks with truncated SVD, partially pivoted
cross approximation, or graph-driven boundary-distance skeleton selection.
The resulting direct solve works standalone or as a GMRES preconditioner;
a generator manufactures realistic test fronts as Schur complements of grid
operators over planar separators.
"""

from .dense import FullPivLU, PartialPivLU, SvdResult, lu_full, lu_partial, svd
from .errors import (
    BlockOutOfRangeError,
    DegenerateSkeletonError,
    DimensionMismatchError,
    EmptySelectionError,
    GmresBreakdownError,
    HodlrkitError,
    InvalidPlaneError,
    ParseError,
    SingularInteriorError,
    SingularLeafError,
    SingularMatrixError,
    SingularSchurError,
    SvdConvergenceError,
)
from .frontgen import (
    FrontProblem,
    GridSpec,
    grid_front,
    grid_operator,
    kernel_matrix,
    planar_separator,
    schur_front,
)
from .graph import (
    BlockGraphView,
    SparsePattern,
    boundary_vertices,
    distance_index,
    select_by_depth,
)
from .hodlr import (
    HodlrFactorization,
    HodlrTree,
    SolveReport,
    apply,
    build_tree,
    factorize,
    residual_norm,
    solve,
)
from .krylov import GmresConfig, GmresResult, diagonal_preconditioner, gmres
from .lowrank import (
    BlockAccessor,
    CompressionConfig,
    LowRankFactor,
    compress,
    compress_aca,
    compress_bdlr,
    compress_svd,
    held_out_samples,
    monitor_error,
    pseudo_skeleton,
    truncate_svd,
)

__version__ = "0.1.0"

__all__ = [
    "BlockAccessor",
    "BlockGraphView",
    "BlockOutOfRangeError",
    "CompressionConfig",
    "DegenerateSkeletonError",
    "DimensionMismatchError",
    "EmptySelectionError",
    "FrontProblem",
    "FullPivLU",
    "GmresBreakdownError",
    "GmresConfig",
    "GmresResult",
    "GridSpec",
    "HodlrFactorization",
    "HodlrTree",
    "HodlrkitError",
    "InvalidPlaneError",
    "LowRankFactor",
    "ParseError",
    "PartialPivLU",
    "SingularInteriorError",
    "SingularLeafError",
    "SingularMatrixError",
    "SingularSchurError",
    "SolveReport",
    "SparsePattern",
    "SvdConvergenceError",
    "SvdResult",
    "apply",
    "boundary_vertices",
    "build_tree",
    "compress",
    "compress_aca",
    "compress_bdlr",
    "compress_svd",
    "diagonal_preconditioner",
    "distance_index",
    "factorize",
    "gmres",
    "grid_front",
    "grid_operator",
    "held_out_samples",
    "kernel_matrix",
    "lu_full",
    "lu_partial",
    "monitor_error",
    "planar_separator",
    "pseudo_skeleton",
    "residual_norm",
    "schur_front",
    "select_by_depth",
    "solve",
    "svd",
    "truncate_svd",
]
