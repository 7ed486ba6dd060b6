"""Small dense linear-algebra helpers.

Every inverse in the recursions goes through a factorization; nothing here
forms an explicit inverse.
"""
import numpy as np
import scipy.linalg as sla

from .errors import DeltaSingular

DELTA_COND_LIMIT = 1e12


def symmetrize(M):
    return 0.5 * (M + M.T)


def asymmetry(M):
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M - M.T)))


class PDSolver:
    """Cholesky factorization of a symmetric positive definite matrix.

    Raises ``error_cls`` (with the stage index) when the factorization fails,
    with no regularization.
    """

    def __init__(self, M, error_cls, name="matrix", stage=None):
        M = symmetrize(np.asarray(M, dtype=float))
        self.matrix = M
        if M.shape[0] == 0:
            self._factor = None
            return
        if not np.all(np.isfinite(M)):
            raise error_cls(f"{name} has non-finite entries", stage=stage)
        try:
            self._factor = sla.cho_factor(M, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            raise error_cls(
                f"{name} is not positive definite "
                f"(min eigenvalue {np.linalg.eigvalsh(M).min():.3e})",
                stage=stage,
            ) from None

    def solve(self, rhs):
        if self._factor is None:
            return np.zeros_like(rhs, dtype=float)
        return sla.cho_solve(self._factor, rhs, check_finite=False)


class InvertibleSolver:
    """LU factorization with a condition-number gate (used for Delta)."""

    def __init__(self, M, name="Delta", stage=None, cond_limit=DELTA_COND_LIMIT):
        M = np.asarray(M, dtype=float)
        self.matrix = M
        if M.shape[0] == 0:
            self._factor = None
            return
        if not np.all(np.isfinite(M)):
            raise DeltaSingular(f"{name} has non-finite entries", stage=stage)
        cond = np.linalg.cond(M)
        if not np.isfinite(cond) or cond > cond_limit:
            raise DeltaSingular(
                f"{name} is singular or ill-conditioned (cond={cond:.3e})", stage=stage
            )
        self.cond = cond
        self._factor = sla.lu_factor(M, check_finite=False)

    def solve(self, rhs):
        if self._factor is None:
            return np.zeros_like(rhs, dtype=float)
        return sla.lu_solve(self._factor, rhs, check_finite=False)


def quad(x, M):
    """x' M x as a Python float."""
    x = np.asarray(x, dtype=float)
    return float(x @ M @ x)
