"""Dense numeric kernels: partial-pivot LU, full-pivot LU and SVD.

Everything downstream (compression schemes, the hierarchical solver, the
front generator) funnels through these three factorizations.  Matrices are
plain float64 ``numpy.ndarray`` objects; entries must be finite before a
factorization is admitted.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SingularMatrixError, SvdConvergenceError

PIVOT_UNDERFLOW = 1e-300


def as_matrix(a, name="matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array and reject non-finite entries."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={a.ndim}")
    if a.size and not np.isfinite(a).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return a


@dataclass(frozen=True)
class PartialPivLU:
    """Packed LU factorization with row pivoting, P @ A = L @ U."""

    lu: np.ndarray
    piv: np.ndarray        # LAPACK-style swap indices
    row_perm: np.ndarray   # permutation vector: (P @ A)[k] == A[row_perm[k]]

    @property
    def n(self) -> int:
        return self.lu.shape[0]

    def solve(self, b) -> np.ndarray:
        """Solve A @ X = B for one or many right-hand sides."""
        b = np.asarray(b, dtype=np.float64)
        vector = b.ndim == 1
        if vector:
            b = b[:, None]
        if b.shape[0] != self.n:
            raise ValueError(f"rhs has {b.shape[0]} rows, expected {self.n}")
        if self.n == 0 or b.shape[1] == 0:
            x = np.zeros_like(b)
        else:
            x = scipy.linalg.lu_solve((self.lu, self.piv), b, check_finite=False)
        return x[:, 0] if vector else x


def lu_partial(a) -> PartialPivLU:
    """Row-pivoted LU of a square matrix.

    Raises SingularMatrixError when a pivot magnitude underflows; the
    factorization is otherwise solve-ready.
    """
    a = as_matrix(a)
    m, n = a.shape
    if m != n:
        raise ValueError(f"matrix must be square, got {m}x{n}")
    if n == 0:
        empty = np.zeros((0, 0))
        return PartialPivLU(empty, np.zeros(0, dtype=np.intp), np.zeros(0, dtype=np.intp))
    with warnings.catch_warnings():
        # an exactly singular input is detected below and raised as an error
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < PIVOT_UNDERFLOW:
        raise SingularMatrixError(f"pivot magnitude below {PIVOT_UNDERFLOW:g}")
    row_perm = np.arange(n)
    for k, pk in enumerate(piv):
        row_perm[k], row_perm[pk] = row_perm[pk], row_perm[k]
    return PartialPivLU(lu, piv, row_perm)


@dataclass(frozen=True)
class FullPivLU:
    """Complete-pivoting LU: A[row_perm][:, col_perm] = L @ U.

    ``lu`` packs the unit-lower factor below the diagonal and the upper
    factor on and above it.  ``pivot_magnitudes`` lists |U[k, k]| in
    elimination order; elimination stops as soon as the remaining block is
    exactly zero, so rank-deficient input yields a short pivot list rather
    than an error.
    """

    lu: np.ndarray
    row_perm: np.ndarray
    col_perm: np.ndarray
    pivot_magnitudes: np.ndarray

    @property
    def shape(self):
        return self.lu.shape

    def numerical_rank(self, tau: float) -> int:
        """Number of pivots with magnitude >= tau * |first pivot|."""
        if self.pivot_magnitudes.size == 0:
            return 0
        return int(np.count_nonzero(self.pivot_magnitudes >= tau * self.pivot_magnitudes[0]))

    def lower(self, r: int) -> np.ndarray:
        """Leading r x r unit-lower-triangular factor."""
        l11 = np.tril(self.lu[:r, :r], -1)
        np.fill_diagonal(l11, 1.0)
        return l11

    def upper(self, r: int) -> np.ndarray:
        """Leading r x r upper-triangular factor."""
        return np.triu(self.lu[:r, :r])

    def reconstruct(self) -> np.ndarray:
        """Undo the permutations: return the original matrix (up to round-off)."""
        m, n = self.lu.shape
        k = min(m, n)
        l = np.tril(self.lu[:, :k], -1)
        np.fill_diagonal(l, 1.0)
        u = np.triu(self.lu[:k, :])
        perm = np.dot(l, u)
        out = np.zeros((m, n))
        out[np.ix_(self.row_perm, self.col_perm)] = perm
        return out


def lu_full(a) -> FullPivLU:
    """LU with complete pivoting; never errors on rank deficiency.

    Each pivot is the largest-magnitude entry of the current Schur
    complement.  Small pivots are kept (callers inspect them to decide a
    numerical rank); elimination only halts early when the remainder is
    exactly zero.
    """
    a = as_matrix(a)
    m, n = a.shape
    work = a.copy()
    p = np.arange(m)
    q = np.arange(n)
    pivots = []
    for k in range(min(m, n)):
        sub = np.abs(work[k:, k:])
        flat = int(np.argmax(sub))
        rk, ck = np.unravel_index(flat, sub.shape)
        rk += k
        ck += k
        if sub[rk - k, ck - k] == 0.0:
            break
        if rk != k:
            work[[k, rk], :] = work[[rk, k], :]
            p[[k, rk]] = p[[rk, k]]
        if ck != k:
            work[:, [k, ck]] = work[:, [ck, k]]
            q[[k, ck]] = q[[ck, k]]
        pivot = work[k, k]
        pivots.append(abs(pivot))
        if k + 1 < m:
            work[k + 1:, k] /= pivot
            work[k + 1:, k + 1:] -= np.outer(work[k + 1:, k], work[k, k + 1:])
    return FullPivLU(work, p, q, np.asarray(pivots))


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD, A = u @ diag(singular_values) @ v.T with orthonormal columns."""

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray


def svd(a) -> SvdResult:
    """Thin singular value decomposition of a dense matrix."""
    a = as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(str(exc)) from exc
    return SvdResult(u, s, vt.T)
