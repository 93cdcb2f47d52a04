import logging
from typing import Callable

import numpy as np
import scipy.linalg as la

from apps.grid.models import Field
from apps.operator.models import MixedOperator
from apps.singular.models import NewtonResult
from config import DEFAULT_MAX_ITER, DEFAULT_TOL, SRC_LOG_LEVELS
from constants import ERROR_MESSAGES, STAGES
from utils.errors import ConvergenceFailure

log = logging.getLogger(__name__)
log.setLevel(SRC_LOG_LEVELS["SINGULAR"])

Scalar = Callable[[np.ndarray], np.ndarray]

ARMIJO = 1e-4
MIN_STEP = 2.0**-40


def residual(op: MixedOperator, rhs: Scalar, u: np.ndarray) -> np.ndarray:
    """F(u) = (a_loc + a_frac) u - M g(u)."""
    return op.matrix @ u - op.mass * rhs(u)


def newton_solve(
    op: MixedOperator,
    rhs: Scalar,
    rhs_prime: Scalar,
    u0: Field,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> NewtonResult:
    """
    Damped Newton on F(u) = 0 with backtracking on ||F||_2. Trial points where
    g is not finite (e.g. u <= 0 for an unregularized singular term) are
    rejected by the line search, which keeps such iterates positive.
    """
    matrix, mass = op.matrix, op.mass
    u = np.array(u0.values, dtype=float)

    F = residual(op, rhs, u)
    norm = float(np.linalg.norm(F))
    if not np.isfinite(norm):
        raise ConvergenceFailure(
            ERROR_MESSAGES.LINE_SEARCH_FAILED,
            stage=STAGES.SINGULAR,
            data={"last": u, "residual": norm, "reason": "initial guess outside the domain of g"},
        )
    target = tol * (1.0 + norm)
    history = [norm]

    for iteration in range(1, max_iter + 1):
        if norm < target:
            return NewtonResult(
                u=u0.with_values(u), iterations=iteration - 1, residual=norm, history=history
            )

        jacobian = matrix - np.diag(mass * rhs_prime(u))
        step = la.solve(jacobian, -F, assume_a="sym")

        t = 1.0
        while True:
            trial = u + t * step
            with np.errstate(invalid="ignore", divide="ignore"):
                F_trial = residual(op, rhs, trial)
            norm_trial = float(np.linalg.norm(F_trial))
            if np.isfinite(norm_trial) and norm_trial <= (1.0 - ARMIJO * t) * norm:
                break
            t *= 0.5
            if t < MIN_STEP:
                raise ConvergenceFailure(
                    ERROR_MESSAGES.LINE_SEARCH_FAILED,
                    stage=STAGES.SINGULAR,
                    data={"last": u, "residual": norm, "iterations": iteration, "history": history},
                )

        u, F, norm = trial, F_trial, norm_trial
        history.append(norm)
        log.debug(f"newton {iteration}: |F|={norm:.3e} step={t:g}")

    if norm < target:
        return NewtonResult(u=u0.with_values(u), iterations=max_iter, residual=norm, history=history)
    raise ConvergenceFailure(
        ERROR_MESSAGES.NEWTON_NOT_CONVERGED(max_iter),
        stage=STAGES.SINGULAR,
        data={"last": u, "residual": norm, "history": history},
    )


def solve_regularized(
    op: MixedOperator,
    rhs: Scalar,
    rhs_prime: Scalar,
    u0: Field,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> Field:
    return newton_solve(op, rhs, rhs_prime, u0, tol=tol, max_iter=max_iter).u
