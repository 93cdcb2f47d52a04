import logging

import numpy as np
import scipy.linalg as la

from apps.eigen.models import EigenPair
from apps.grid.models import Field
from apps.operator.main import local_only
from apps.operator.models import MixedOperator
from config import EIGEN_MAX_ITER, EIGEN_RESIDUAL_TOL, EIGEN_TOL, SRC_LOG_LEVELS
from constants import ERROR_MESSAGES, STAGES
from utils.errors import ConvergenceFailure, PositivityFailure, ValidationFailure

log = logging.getLogger(__name__)
log.setLevel(SRC_LOG_LEVELS["EIGEN"])

NEGATIVE_TOLERANCE = 1e-10
SIMPLICITY_GAP = 1e-6
DEFLATED_ITERATIONS = 60
POLISH_ITERATIONS = 10


def _normalize(x: np.ndarray, mass: float) -> np.ndarray:
    return x / np.sqrt(mass * (x @ x))


def _rayleigh(matrix: np.ndarray, x: np.ndarray, mass: float) -> float:
    return float(x @ (matrix @ x) / (mass * (x @ x)))


def _second_estimate(factor, matrix: np.ndarray, e1: np.ndarray, mass: float) -> float:
    """Inverse iteration M-orthogonal to e1; its Rayleigh quotient bounds lambda_2 from above."""
    rng = np.random.default_rng(1)
    x = rng.standard_normal(e1.shape[0])
    for _ in range(DEFLATED_ITERATIONS):
        x -= mass * (e1 @ x) * e1
        x = _normalize(la.cho_solve(factor, x), mass)
    x -= mass * (e1 @ x) * e1
    return _rayleigh(matrix, x, mass)


def principal_eigenpair(
    op: MixedOperator, tol: float = EIGEN_TOL, max_iter: int = EIGEN_MAX_ITER
) -> EigenPair:
    """
    Smallest eigenpair of (a_loc + a_frac) e = lambda M e by inverse power
    iteration on a single Cholesky factorization.
    """
    if tol <= 0:
        raise ValidationFailure(ERROR_MESSAGES.INVALID_TOL(tol), stage=STAGES.EIGEN)

    matrix, mass = op.matrix, op.mass
    factor = la.cho_factor(matrix)

    x = _normalize(np.ones(op.domain.size), mass)
    lam = _rayleigh(matrix, x, mass)
    converged = False
    for iteration in range(1, max_iter + 1):
        x = _normalize(la.cho_solve(factor, x), mass)
        lam_next = _rayleigh(matrix, x, mass)
        log.debug(f"inverse iteration {iteration}: rayleigh={lam_next:.16g}")
        if abs(lam_next - lam) < tol * abs(lam_next):
            converged = True
            break
        lam = lam_next

    if converged:
        # the quotient converges twice as fast as the vector
        for _ in range(POLISH_ITERATIONS):
            x = _normalize(la.cho_solve(factor, x), mass)
        lam = _rayleigh(matrix, x, mass)

    residual = float(np.linalg.norm(matrix @ x - lam * mass * x))
    if not converged:
        raise ConvergenceFailure(
            ERROR_MESSAGES.EIGEN_NOT_CONVERGED(max_iter),
            stage=STAGES.EIGEN,
            data={"last": x, "residual": residual, "rayleigh": lam},
        )

    if x.mean() < 0:
        x = -x
    if x.min() < -NEGATIVE_TOLERANCE:
        raise PositivityFailure(
            ERROR_MESSAGES.EIGEN_NOT_POSITIVE,
            stage=STAGES.EIGEN,
            data={"min": float(x.min()), "node": int(np.argmin(x))},
        )
    x = _normalize(np.maximum(x, 0.0), mass)
    residual = float(np.linalg.norm(matrix @ x - lam * mass * x))
    relative_residual = residual / (lam * mass * float(np.linalg.norm(x)))
    if relative_residual > EIGEN_RESIDUAL_TOL:
        raise ConvergenceFailure(
            ERROR_MESSAGES.EIGEN_RESIDUAL(f"{relative_residual:.3e}"),
            stage=STAGES.EIGEN,
            data={"last": x, "residual": residual, "rayleigh": lam},
        )

    lambda2 = _second_estimate(factor, matrix, x, mass) if op.domain.size > 1 else None
    if lambda2 is not None and lambda2 <= lam * (1.0 + SIMPLICITY_GAP):
        log.warning(
            f"principal eigenvalue may not be simple: lambda1={lam:.10g}, "
            f"second estimate={lambda2:.10g}"
        )

    pair = EigenPair(
        lambda1=lam,
        e1=Field(values=x, domain=op.domain),
        residual=residual,
        relative_residual=relative_residual,
        iterations=iteration,
        min_interior=float(x.min()),
        lambda2_estimate=lambda2,
    )
    log.info(
        f"principal eigenpair: lambda1={lam:.12g}, residual={residual:.3e}, "
        f"iterations={iteration}, min e1={pair.min_interior:.3e}"
    )
    return pair


def local_eigenpair(op: MixedOperator, tol: float = EIGEN_TOL) -> EigenPair:
    """Principal eigenpair of the local stiffness alone (discrete Poincare constant)."""
    return principal_eigenpair(local_only(op), tol=tol)
