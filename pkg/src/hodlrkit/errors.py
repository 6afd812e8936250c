"""Exception types shared across the package."""


class HodlrkitError(Exception):
    """Base class for all errors raised by hodlrkit."""


class SingularMatrixError(HodlrkitError):
    """A pivot fell below the singularity threshold during factorization."""


class SingularLeafError(SingularMatrixError):
    """A dense diagonal leaf block of the hierarchical factorization is singular."""


class SingularSchurError(SingularMatrixError):
    """A coupling (Schur) system is singular; compression was too aggressive."""


class SingularInteriorError(SingularMatrixError):
    """An interior block eliminated during front generation is singular."""


class SvdConvergenceError(HodlrkitError):
    """The SVD iteration failed to converge."""


class EmptySelectionError(HodlrkitError):
    """Depth-based row/column selection produced no vertices on one side."""


class DegenerateSkeletonError(HodlrkitError):
    """Skeleton intersection has rank zero while the block is numerically nonzero.

    Signals that the selection depth is too small for the requested tolerance.
    """


class GmresBreakdownError(HodlrkitError):
    """Arnoldi basis norm underflowed without reaching convergence."""


class DimensionMismatchError(HodlrkitError):
    """Operands have incompatible shapes."""


class ParseError(HodlrkitError):
    """A matrix file is malformed.  Carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidPlaneError(HodlrkitError):
    """Separator plane index is not strictly interior to the grid."""


class BlockOutOfRangeError(HodlrkitError):
    """Requested off-diagonal block does not exist in the hierarchy."""
