import logging
from typing import Callable, Iterable, Optional

import numpy as np
import scipy.linalg as la

from apps.diagnostics.main import weak_residual
from apps.eigen.models import EigenPair
from apps.grid.main import h1_semi
from apps.grid.models import Field
from apps.operator.models import MixedOperator
from apps.singular.models import (
    ContinuationStep,
    ContinuationTrace,
    ProblemSpec,
    SandwichCertificate,
)
from apps.singular.newton import newton_solve
from config import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    EPS0,
    EPS_FLOOR,
    EPS_RATIO,
    MONOTONE_MAX_ITER,
    N_TEST_FIELDS,
    SEARCH_MAX_STEPS,
    SHIFT_SAMPLES,
    SRC_LOG_LEVELS,
)
from constants import ERROR_MESSAGES, STAGES
from utils.errors import (
    ConvergenceFailure,
    OrderingFailure,
    PositivityFailure,
    SolverError,
    ValidationFailure,
)
from utils.misc import eps_schedule, gauss_jacobi_antiderivative

log = logging.getLogger(__name__)
log.setLevel(SRC_LOG_LEVELS["SINGULAR"])

CONTINUATION_TOL = 1e-6
MONOTONE_TOL = 1e-9
ORDER_TOL = 1e-10
SUPERSOLUTION_SLACK = 1e-8


def _require_kind(spec: ProblemSpec, kind: str):
    if spec.kind != kind:
        raise ValidationFailure(ERROR_MESSAGES.WRONG_PROBLEM_KIND(kind), stage=STAGES.SINGULAR)


def _require_positive(u: np.ndarray, what: str):
    if np.any(u <= 0.0):
        node = int(np.argmin(u))
        raise PositivityFailure(
            ERROR_MESSAGES.NOT_POSITIVE(node),
            data={"field": what, "node": node, "value": float(u[node])},
        )


############################
# Nonlinearities
############################


def regularized_singular(gamma: float, eps: float, lam: float = 1.0):
    """g(t) = lam (t+ + eps)^-gamma and its derivative."""

    def g(t):
        return lam * (np.maximum(t, 0.0) + eps) ** (-gamma)

    def g_prime(t):
        return np.where(t > 0.0, -gamma * lam * (np.maximum(t, 0.0) + eps) ** (-gamma - 1.0), 0.0)

    return g, g_prime


def g1_nonlinearity(spec: ProblemSpec):
    """g(t) = lam h(t) t^-gamma on t > 0; undefined (nan) for t <= 0."""
    h, gamma, lam = spec.h_fn, spec.gamma, spec.lam

    def g(t):
        return lam * h(t) * t ** (-gamma)

    def g_prime(t):
        return lam * (h.derivative(t) * t ** (-gamma) - gamma * h(t) * t ** (-gamma - 1.0))

    return g, g_prime


def j_energy(op: MixedOperator, spec: ProblemSpec, u: Field) -> float:
    """J(u) = 1/2 B(u,u) - lam sum H(u_i) |cell|, H(t) = int_0^t h(tau) tau^-gamma dtau."""
    antiderivative = gauss_jacobi_antiderivative(spec.h_fn, spec.gamma)
    quad = float(u.values @ (op.matrix @ u.values))
    return 0.5 * quad - spec.lam * float(np.sum(antiderivative(u.values))) * op.mass


############################
# Pure singular problem
############################


def solve_pure_singular(
    op: MixedOperator,
    gamma: float,
    schedule: Optional[Iterable[float]] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    continuation_tol: float = CONTINUATION_TOL,
    trace: Optional[ContinuationTrace] = None,
    polish: bool = True,
) -> Field:
    """
    v0 solving (a_loc + a_frac) v = M v^-gamma, v > 0, by continuation in eps
    on (v+ + eps)^-gamma followed by a Newton polish of the unregularized
    equation.
    """
    if not (0.0 < gamma < 1.0):
        raise ValidationFailure(ERROR_MESSAGES.INVALID_GAMMA(gamma), stage=STAGES.SINGULAR)
    if schedule is None:
        schedule = eps_schedule(EPS0, EPS_RATIO, EPS_FLOOR)
    trace = trace if trace is not None else ContinuationTrace()

    u = Field(values=np.zeros(op.domain.size), domain=op.domain)
    previous = None
    cauchy = False
    for eps in schedule:
        g, g_prime = regularized_singular(gamma, eps)
        result = newton_solve(op, g, g_prime, u, tol=tol, max_iter=max_iter)
        u = result.u

        change = h1_semi(u - previous) if previous is not None else np.inf
        if previous is not None:
            # g_eps decreases in eps, so iterates must not decrease as eps shrinks
            defect = float(np.max(previous.values - u.values))
            trace.monotone_defect = max(trace.monotone_defect, defect)
            if defect > 1e3 * tol * (1.0 + np.abs(u.values).max()):
                log.warning(f"continuation not monotone in eps: defect {defect:.3e} at eps={eps:g}")

        trace.steps.append(
            ContinuationStep(
                eps=eps,
                linf=float(np.abs(u.values).max()),
                h1_change=float(change),
                newton_iterations=result.iterations,
                residual=result.residual,
            )
        )
        log.debug(f"pure singular eps={eps:.3e}: linf={trace.steps[-1].linf:.6g} change={change:.3e}")
        previous = u
        if change < continuation_tol:
            cauchy = True
            break

    if not cauchy:
        raise ConvergenceFailure(
            ERROR_MESSAGES.CONTINUATION_STAGNATED,
            stage=STAGES.SINGULAR,
            data={"last": u.values, "trace": trace.model_dump()},
        )

    _require_positive(u.values, "v0")
    if polish:
        u = newton_solve(
            op,
            lambda t: t ** (-gamma),
            lambda t: -gamma * t ** (-gamma - 1.0),
            u,
            tol=tol,
            max_iter=max_iter,
        ).u
        _require_positive(u.values, "v0")

    log.info(
        f"pure singular solution: linf={np.abs(u.values).max():.10g}, "
        f"min={u.values.min():.3e}, continuation steps={len(trace.steps)}"
    )
    return u


############################
# Sub- and supersolution scaling
############################


def find_a_lambda(
    eig: EigenPair, spec: ProblemSpec, op: Optional[MixedOperator] = None
) -> float:
    """
    Largest a from 1, 1/2, 1/4, ... with lambda1 (a e1)_i <= lam (a e1)_i^-gamma h((a e1)_i)
    at every interior node. With `op`, the discrete subsolution inequality
    (a_loc + a_frac)(a e1) <= M g(a e1) is verified as well.
    """
    _require_kind(spec, "g1")
    e1 = eig.e1.values
    _require_positive(e1, "e1")
    g, _ = g1_nonlinearity(spec)
    applied = op.matrix @ e1 if op is not None else None

    a = 1.0
    for _ in range(SEARCH_MAX_STEPS):
        t = a * e1
        ok = np.all(eig.lambda1 * t <= g(t))
        if ok and applied is not None:
            ok = np.all(a * applied <= op.mass * g(t))
        if ok:
            log.info(f"a_lambda = {a:.6g}")
            return a
        a *= 0.5

    raise SolverError(ERROR_MESSAGES.A_LAMBDA_NOT_FOUND, stage=STAGES.SINGULAR, data={"last_a": a})


def find_b_lambda(
    v0: Field, spec: ProblemSpec, op: Optional[MixedOperator] = None, tol: float = DEFAULT_TOL
) -> float:
    """
    First b from 1, 2, 4, ... with (b|v0|)^-(gamma+1) h(b|v0|) <= 1 / (lam |v0|^(gamma+1)),
    |v0| = linf(v0), that also passes the nodewise discrete supersolution check
    (a_loc + a_frac)(b v0) >= M lam (b v0)^-gamma h(b v0) when `op` is given.
    """
    _require_kind(spec, "g1")
    v = v0.values
    _require_positive(v, "v0")
    g, _ = g1_nonlinearity(spec)
    linf = float(v.max())
    bound = 1.0 / (spec.lam * linf ** (spec.gamma + 1.0))
    applied = op.matrix @ v if op is not None else None

    b = 1.0
    for _ in range(SEARCH_MAX_STEPS):
        scalar_ok = (b * linf) ** (-(spec.gamma + 1.0)) * spec.h_fn(b * linf) <= bound
        if scalar_ok:
            if applied is None:
                return b
            lhs = b * applied
            rhs = op.mass * g(b * v)
            if np.all(lhs >= rhs - (SUPERSOLUTION_SLACK * np.abs(rhs) + tol)):
                log.info(f"b_lambda = {b:.6g}")
                return b
            log.debug(f"b={b:g} passes the scalar test but not the nodewise check")
        b *= 2.0

    raise SolverError(ERROR_MESSAGES.B_LAMBDA_NOT_FOUND, stage=STAGES.SINGULAR, data={"last_b": b})


############################
# Monotone iteration
############################


def nodewise_shift(
    g: Callable, lower: np.ndarray, upper: np.ndarray, samples: int = SHIFT_SAMPLES
) -> np.ndarray:
    """
    sigma_i >= sup over [lower_i, upper_i] of -g'(t), from difference quotients
    on a geometric sample of the interval.
    """
    lower = np.maximum(lower, np.finfo(float).tiny)
    upper = np.maximum(upper, lower * (1.0 + 1e-12))
    ratio = np.linspace(0.0, 1.0, samples)
    t = lower[:, None] * (upper[:, None] / lower[:, None]) ** ratio[None, :]
    values = g(t)
    slopes = -np.diff(values, axis=1) / np.diff(t, axis=1)
    return np.maximum(np.max(slopes, axis=1), 0.0)


def _monotone_iteration(op, g, sub, sup, shift, tol, max_iter):
    mass = op.mass
    factor = la.cho_factor(op.matrix + mass * np.diag(shift))
    u = sub.copy()
    scale = 1.0 + np.abs(sup).max()
    for iteration in range(1, max_iter + 1):
        nxt = la.cho_solve(factor, mass * (g(u) + shift * u))
        violation = max(
            float(np.max(u - nxt)),
            float(np.max(sub - nxt)),
            float(np.max(nxt - sup)),
        )
        if violation > ORDER_TOL * scale:
            return None, iteration, violation
        change = h1_semi(Field(values=nxt - u, domain=op.domain))
        u = nxt
        if change < tol:
            return u, iteration, 0.0
    log.warning(f"monotone iteration hit {max_iter} iterations; handing over to Newton")
    return u, max_iter, 0.0


def solve_g1(
    op: MixedOperator,
    eig: EigenPair,
    spec: ProblemSpec,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    v0: Optional[Field] = None,
    seed: int = 0,
) -> SandwichCertificate:
    """
    Sandwich a_lambda e1 <= u <= b_lambda v0 and solve by shifted monotone
    iteration from the subsolution, then polish with Newton inside the sandwich.
    """
    _require_kind(spec, "g1")
    if v0 is None:
        v0 = solve_pure_singular(op, spec.gamma, tol=tol, max_iter=max_iter)

    a = find_a_lambda(eig, spec, op)
    b = find_b_lambda(v0, spec, op, tol=tol)
    sub, sup = a * eig.e1.values, b * v0.values
    while np.any(sub > sup):
        a *= 0.5
        sub = a * eig.e1.values
    _require_positive(sub, "subsolution")

    g, g_prime = g1_nonlinearity(spec)
    shift = nodewise_shift(g, sub, sup)
    retries = 0
    u, iterations, violation = _monotone_iteration(
        op, g, sub, sup, shift, MONOTONE_TOL, MONOTONE_MAX_ITER
    )
    if u is None:
        log.warning(f"ordering violated ({violation:.3e}); retrying with 10x shift")
        retries = 1
        u, iterations, violation = _monotone_iteration(
            op, g, sub, sup, 10.0 * shift, MONOTONE_TOL, MONOTONE_MAX_ITER
        )
    if u is None:
        raise OrderingFailure(
            ERROR_MESSAGES.ORDERING_VIOLATED(f"violation {violation:.3e} at iteration {iterations}"),
            data={"a_lambda": a, "b_lambda": b, "iterations": iterations},
        )

    result = newton_solve(
        op, g, g_prime, Field(values=u, domain=op.domain), tol=tol, max_iter=max_iter
    )
    u = result.u.values
    scale = 1.0 + np.abs(sup).max()
    if np.any(u < sub - ORDER_TOL * scale) or np.any(u > sup + ORDER_TOL * scale):
        raise OrderingFailure(
            ERROR_MESSAGES.ORDERING_VIOLATED("Newton polish left the sandwich"),
            data={"a_lambda": a, "b_lambda": b},
        )
    _require_positive(u, "solution")

    solution = Field(values=u, domain=op.domain)
    report = weak_residual(op, g, solution, n_tests=N_TEST_FIELDS, seed=seed, singular=True)
    certificate = SandwichCertificate(
        sub=Field(values=sub, domain=op.domain),
        sup=Field(values=sup, domain=op.domain),
        a_lambda=a,
        b_lambda=b,
        solution=solution,
        residual=report.max_weak_residual,
        iterations=iterations + result.iterations,
        min_interior=float(u.min()),
        linf=float(u.max()),
        j_energy=j_energy(op, spec, solution),
        shift_retries=retries,
    )
    log.info(
        f"g1 solution: a={a:g} b={b:g} linf={certificate.linf:.8g} "
        f"weak residual={certificate.residual:.3e}"
    )
    return certificate
