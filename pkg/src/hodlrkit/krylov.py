"""Left-preconditioned GMRES without restarts.

The intended workflow pairs this with a low-accuracy hierarchical
factorization as the preconditioner: the direct solve is cheap to build at
loose tolerance and pulls the iteration count far below what diagonal
scaling achieves on the same system.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import GmresBreakdownError
from .lowrank import BlockAccessor

log = logging.getLogger("hodlrkit")


@dataclass(frozen=True)
class GmresConfig:
    tol: float = 1e-10
    max_iter: int = 1000

    def __post_init__(self):
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must lie strictly between 0 and 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class GmresResult:
    x: np.ndarray
    iterations: int
    converged: bool
    residual_history: list = field(default_factory=list)
    true_residual: float = np.nan
    breakdown: bool = False


class DiagonalPreconditioner:
    """Elementwise division by the diagonal; zero entries act as identity."""

    def __init__(self, front):
        diag = front.diagonal() if isinstance(front, BlockAccessor) else np.diag(np.asarray(front))
        diag = np.asarray(diag, dtype=np.float64).copy()
        self.zero_count = int(np.count_nonzero(diag == 0.0))
        if self.zero_count:
            log.warning("diagonal preconditioner: %d zero entries replaced by 1",
                        self.zero_count)
            diag[diag == 0.0] = 1.0
        self.diag = diag

    @property
    def flagged(self) -> bool:
        return self.zero_count > 0

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return r / self.diag


def diagonal_preconditioner(front) -> DiagonalPreconditioner:
    return DiagonalPreconditioner(front)


def gmres(apply_op, b, cfg: GmresConfig, preconditioner=None) -> GmresResult:
    """Full-orthogonalization GMRES on the left-preconditioned system.

    ``apply_op`` maps a vector to A @ v; ``preconditioner`` maps a residual
    to M^{-1} r (identity when None).  Arnoldi uses modified Gram-Schmidt
    with one re-orthogonalization pass whenever the basis vector loses more
    than a factor 1/sqrt(2) of its norm.  The history tracks the
    preconditioned relative residual per iteration; a converged result is
    re-verified against the unpreconditioned system and demoted if the true
    relative residual exceeds 10x the target.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 1:
        raise ValueError("rhs must be a vector")
    n = b.size
    precond = (lambda r: r) if preconditioner is None else preconditioner
    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        return GmresResult(np.zeros(n), 0, True, [0.0], 0.0)

    r0 = precond(b)
    beta = np.linalg.norm(r0)
    if beta == 0.0:
        raise GmresBreakdownError("preconditioned rhs is exactly zero")

    max_iter = min(cfg.max_iter, n)
    basis = np.zeros((n, max_iter + 1))
    hess = np.zeros((max_iter + 1, max_iter))
    cs = np.zeros(max_iter)
    sn = np.zeros(max_iter)
    g = np.zeros(max_iter + 1)
    basis[:, 0] = r0 / beta
    g[0] = beta

    history = []
    converged = False
    breakdown = False
    k = 0
    for k in range(1, max_iter + 1):
        j = k - 1
        # copy: the operator may hand back its input and MGS updates in place
        w = np.array(precond(apply_op(basis[:, j])), dtype=np.float64)
        norm_in = np.linalg.norm(w)
        for i in range(k):
            hess[i, j] = basis[:, i] @ w
            w -= hess[i, j] * basis[:, i]
        if np.linalg.norm(w) < norm_in / np.sqrt(2.0):
            for i in range(k):
                extra = basis[:, i] @ w
                hess[i, j] += extra
                w -= extra * basis[:, i]
        hess[k, j] = np.linalg.norm(w)

        happy = hess[k, j] <= 1e-14 * max(norm_in, 1e-300)
        if not happy:
            basis[:, k] = w / hess[k, j]

        for i in range(j):
            temp = cs[i] * hess[i, j] + sn[i] * hess[i + 1, j]
            hess[i + 1, j] = -sn[i] * hess[i, j] + cs[i] * hess[i + 1, j]
            hess[i, j] = temp
        denom = np.hypot(hess[j, j], hess[k, j])
        if denom == 0.0:
            breakdown = True
            break
        cs[j] = hess[j, j] / denom
        sn[j] = hess[k, j] / denom
        hess[j, j] = denom
        hess[k, j] = 0.0
        g[k] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]

        rel = abs(g[k]) / beta
        history.append(float(rel))
        if rel <= cfg.tol or happy:
            converged = True
            break

    m = k if not breakdown else k - 1
    if m > 0:
        y = np.zeros(m)
        for i in range(m - 1, -1, -1):
            y[i] = (g[i] - hess[i, i + 1:m] @ y[i + 1:m]) / hess[i, i]
        x = basis[:, :m] @ y
    else:
        x = np.zeros(n)

    true_res = float(np.linalg.norm(b - apply_op(x)) / norm_b)
    if breakdown and true_res > 10.0 * cfg.tol:
        raise GmresBreakdownError(
            f"Arnoldi norm underflow at iteration {k} with true residual {true_res:.3e}")
    if converged and true_res > 10.0 * cfg.tol:
        log.warning("gmres: preconditioned residual converged but true residual "
                    "%.3e exceeds 10*tol; reporting non-convergence", true_res)
        converged = False
    if breakdown:
        converged = True
    return GmresResult(x, m, converged, history, true_res, breakdown)
