import logging
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg as la
from scipy.optimize import brentq

from apps.diagnostics.main import bump_fields, weak_residual
from apps.eigen.main import local_eigenpair
from apps.eigen.models import EigenPair
from apps.grid.main import h1_semi
from apps.grid.models import Field
from apps.multiplicity.models import (
    EpsTraceEntry,
    LambdaSweep,
    MountainPassParams,
    SweepPoint,
    TwoSolutions,
)
from apps.multiplicity.mountain_pass import deform_path, path_through, straight_path
from apps.operator.models import MixedOperator
from apps.singular.models import ProblemSpec
from apps.singular.newton import newton_solve
from config import (
    ASCENT_RESTARTS,
    DEFAULT_MAX_ITER,
    DEFAULT_SEED,
    DEFAULT_TOL,
    EPS0,
    EPS_FLOOR,
    EPS_RATIO,
    GEOMETRY_K,
    MP_N_PATH,
    MP_TOL,
    N_TEST_FIELDS,
    RIM_SAMPLES,
    SEARCH_MAX_STEPS,
    SRC_LOG_LEVELS,
)
from constants import ERROR_MESSAGES, STAGES
from utils.errors import (
    BarrierFailure,
    BranchCollapse,
    ConvergenceFailure,
    GeometryFailure,
    PositivityFailure,
    SolverError,
    ValidationFailure,
)
from utils.misc import eps_schedule, seeded_rng

log = logging.getLogger(__name__)
log.setLevel(SRC_LOG_LEVELS["MULTIPLICITY"])

CONTINUATION_TOL = 1e-6
ASCENT_TOL = 1e-8
ASCENT_MAX_ITER = 2000
DESCENT_TOL = 1e-7
DESCENT_MAX_ITER = 5000
RIM_TOL = 1e-8
BARRIER_SLACK = 1e-8
COLLAPSE_TOL = 1e-6
NEGATIVE_TOLERANCE = 1e-10
K_HALVINGS = 10


def _require_g2(spec: ProblemSpec):
    if spec.kind != "g2":
        raise ValidationFailure(ERROR_MESSAGES.WRONG_PROBLEM_KIND("g2"), stage=STAGES.MULTIPLICITY)


def _require_below_threshold(spec: ProblemSpec, params: MountainPassParams):
    if not spec.lam < params.Lambda_est:
        raise GeometryFailure(
            ERROR_MESSAGES.LAMBDA_TOO_LARGE(f"lambda={spec.lam:g}, Lambda_est={params.Lambda_est:g}"),
            data={"lambda": spec.lam, "Lambda_est": params.Lambda_est},
        )


def _require_nonnegative(u: np.ndarray, what: str):
    if u.min() < -NEGATIVE_TOLERANCE * (1.0 + np.abs(u).max()):
        node = int(np.argmin(u))
        raise PositivityFailure(
            ERROR_MESSAGES.NOT_POSITIVE(node),
            stage=STAGES.MULTIPLICITY,
            data={"field": what, "node": node, "value": float(u[node])},
        )


####################
# Energy and gradient
####################


def g2_nonlinearity(spec: ProblemSpec, eps: float):
    """
    g(t) = lam (t+ + eps)^-gamma + (t+)^q and its derivative. With eps = 0 the
    singular term is left unclamped, so g is not finite for t <= 0.
    """
    lam, gamma, q = spec.lam, spec.gamma, spec.q

    if eps > 0.0:

        def g(t):
            tp = np.maximum(t, 0.0)
            return lam * (tp + eps) ** (-gamma) + tp**q

        def g_prime(t):
            tp = np.maximum(t, 0.0)
            return np.where(
                t > 0.0, -gamma * lam * (tp + eps) ** (-gamma - 1.0) + q * tp ** (q - 1.0), 0.0
            )

        return g, g_prime

    def g(t):
        return lam * t ** (-gamma) + np.maximum(t, 0.0) ** q

    def g_prime(t):
        return -gamma * lam * t ** (-gamma - 1.0) + q * np.maximum(t, 0.0) ** (q - 1.0)

    return g, g_prime


def _energy(op: MixedOperator, spec: ProblemSpec, eps: float, u: np.ndarray, lam: float) -> float:
    gamma, q = spec.gamma, spec.q
    up = np.maximum(u, 0.0)
    power = 1.0 - gamma
    singular = ((up + eps) ** power - eps**power) / power
    return float(
        0.5 * (u @ (op.matrix @ u))
        - lam * np.sum(singular) * op.mass
        - np.sum(up ** (q + 1.0)) * op.mass / (q + 1.0)
    )


def energy(op: MixedOperator, spec: ProblemSpec, eps: float, u: Field) -> float:
    """
    I(u) = 1/2 B(u,u) - lam sum [(u+ + eps)^(1-gamma) - eps^(1-gamma)]/(1-gamma) |cell|
           - sum (u+)^(q+1)/(q+1) |cell|
    """
    _require_g2(spec)
    if eps < 0.0:
        raise ValidationFailure(ERROR_MESSAGES.EPS_REQUIRED, stage=STAGES.MULTIPLICITY)
    return _energy(op, spec, eps, u.values, spec.lam)


def gradient(op: MixedOperator, spec: ProblemSpec, eps: float, u: Field) -> Field:
    """Dual gradient (a_loc + a_frac) u - M g_eps(u), the residual of the regularized problem."""
    _require_g2(spec)
    if not eps > 0.0:
        raise ValidationFailure(ERROR_MESSAGES.EPS_REQUIRED, stage=STAGES.MULTIPLICITY)
    g, _ = g2_nonlinearity(spec, eps)
    return u.with_values(op.matrix @ u.values - op.mass * g(u.values))


####################
# Geometry
####################


def embedding_ascent(
    op: MixedOperator, q: float, restarts: int = ASCENT_RESTARTS, seed: int = DEFAULT_SEED
) -> float:
    """
    max of sum (v+)^(q+1) |cell| over h1_semi(v) = 1 by the normalized ascent
    v <- A_loc^-1 M (v+)^q / |.|, which increases the objective monotonically.
    """
    a_loc, mass = op.a_loc, op.mass
    factor = la.cho_factor(a_loc)
    rng = seeded_rng(seed)

    def normalize(v):
        return v / np.sqrt(v @ (a_loc @ v))

    def objective(v):
        return float(np.sum(np.maximum(v, 0.0) ** (q + 1.0)) * mass)

    starts = [np.ones(op.domain.size)]
    starts += [np.abs(rng.standard_normal(op.domain.size)) + 0.1 for _ in range(restarts - 1)]

    best = 0.0
    for start in starts:
        v = normalize(start)
        value = objective(v)
        for _ in range(ASCENT_MAX_ITER):
            w = normalize(la.cho_solve(factor, mass * np.maximum(v, 0.0) ** q))
            nxt = objective(w)
            v, done = w, abs(nxt - value) < ASCENT_TOL * abs(nxt)
            value = nxt
            if done:
                break
        best = max(best, value)

    if not (np.isfinite(best) and best > 0.0):
        raise GeometryFailure(ERROR_MESSAGES.ASCENT_FAILED, data={"best": best})
    log.debug(f"embedding ascent: max ratio {best:.10g} over {len(starts)} starts")
    return best


def rim_violations(
    op: MixedOperator,
    spec: ProblemSpec,
    eps: float,
    R: float,
    rho: float,
    lam: float,
    samples: int = RIM_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> int:
    """Counts seeded fields with h1_semi = R whose energy at `lam` falls below rho."""
    rng = seeded_rng(seed)
    smooth = bump_fields(op, samples - samples // 2, seed)
    rough = rng.standard_normal((samples // 2, op.domain.size))
    count = 0
    for values in np.concatenate([smooth, rough]):
        values = R * values / h1_semi(Field(values=values, domain=op.domain))
        if _energy(op, spec, eps, values, lam) < rho:
            count += 1
    return count


def calibrate_geometry(
    op: MixedOperator,
    eig: EigenPair,
    spec: ProblemSpec,
    eps: float,
    k: float = GEOMETRY_K,
    seed: int = DEFAULT_SEED,
) -> MountainPassParams:
    """
    Rim radius R and level rho from the embedding constant, the certified
    threshold Lambda_est = rho / sup_{|v|=R} 1/(1-gamma) int |v|^(1-gamma)
    (bounded by Holder and the discrete Poincare constant), and the endpoint
    scale T with I_0(T e1) < -1.
    """
    _require_g2(spec)
    q, gamma = spec.q, spec.gamma
    measure = op.domain.measure
    theta = measure ** (1.0 - (q + 1.0) / spec.exponent_l)
    C = embedding_ascent(op, q, seed=seed) / theta

    for _ in range(K_HALVINGS):
        R = k * ((q + 1.0) / (2.0 * C * theta)) ** (1.0 / (q - 1.0))
        rho = 0.5 * (R**2 / 2.0 - C * theta * R ** (q + 1.0) / (q + 1.0))
        if rho > 0.0:
            break
        k *= 0.5
    else:
        raise GeometryFailure(ERROR_MESSAGES.ASCENT_FAILED, data={"C": C, "k": k})

    lambda1_local = local_eigenpair(op).lambda1
    sup_bound = (
        lambda1_local ** (-(1.0 - gamma) / 2.0)
        * R ** (1.0 - gamma)
        * measure ** ((1.0 + gamma) / 2.0)
        / (1.0 - gamma)
    )
    Lambda_est = rho / sup_bound

    # I_lam <= I_0, so an endpoint found for lam = 0 serves every lam
    e1 = eig.e1
    T = 2.0 * R / h1_semi(e1)
    for _ in range(SEARCH_MAX_STEPS):
        if _energy(op, spec, eps, T * e1.values, 0.0) < -1.0:
            break
        T *= 2.0
    else:
        raise GeometryFailure(ERROR_MESSAGES.T_NOT_FOUND, data={"last_T": T})

    level_bound = max(
        _energy(op, spec, eps, t * T * e1.values, 0.0) for t in np.linspace(0.0, 1.0, 201)
    )
    violations = rim_violations(op, spec, eps, R, rho, 0.5 * Lambda_est, seed=seed)
    if violations:
        log.warning(f"rim spot check: {violations} of {RIM_SAMPLES} fields below rho")

    params = MountainPassParams(
        e1=e1,
        R=R,
        rho=rho,
        T=T,
        Lambda_est=Lambda_est,
        k=k,
        embedding_constant=C,
        theta=theta,
        lambda1_local=lambda1_local,
        sup_bound=sup_bound,
        level_bound=level_bound,
        rim_violations=violations,
    )
    log.info(
        f"mountain-pass geometry: R={R:.6g} rho={rho:.6g} T={T:.6g} "
        f"Lambda_est={Lambda_est:.6g} C={C:.6g}"
    )
    return params


####################
# Critical points
####################


def ball_minimizer(
    op: MixedOperator,
    spec: ProblemSpec,
    eps: float,
    params: MountainPassParams,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    start: Optional[Field] = None,
    enforce_threshold: bool = True,
) -> Field:
    """
    Minimizer of the regularized energy over {h1_semi(v) <= R} by projected
    Sobolev-gradient descent, then an unconstrained Newton polish.

    The descent stops at the fixed DESCENT_TOL; it only has to reach the
    Newton basin. `tol` and `max_iter` govern the polish, so the returned
    field satisfies |F| < tol (1 + |F(start)|).
    """
    _require_g2(spec)
    if enforce_threshold:
        _require_below_threshold(spec, params)
    matrix, R = op.matrix, params.R
    factor = la.cho_factor(matrix)
    g, g_prime = g2_nonlinearity(spec, eps)

    def value(v):
        return _energy(op, spec, eps, v, spec.lam)

    def project(v):
        norm = h1_semi(Field(values=v, domain=op.domain))
        return v if norm <= R else v * (R / norm)

    if start is not None and value(project(start.values)) < 0.0:
        v = project(np.array(start.values, dtype=float))
    else:
        # the energy decreases linearly along t e1 near t = 0
        v = 0.01 * R / h1_semi(params.e1) * params.e1.values
        for _ in range(SEARCH_MAX_STEPS):
            if value(v) < 0.0:
                break
            v = 0.5 * v
    current = value(v)

    for iteration in range(1, DESCENT_MAX_ITER + 1):
        grad = matrix @ v - op.mass * g(v)
        direction = la.cho_solve(factor, grad)
        moved = v - project(v - direction)
        pg_norm = float(np.sqrt(max(moved @ (matrix @ moved), 0.0)))
        if pg_norm < DESCENT_TOL * (1.0 + np.sqrt(v @ (matrix @ v))):
            break
        t = 1.0
        while t > 1e-12:
            trial = project(v - t * direction)
            step = trial - v
            e_trial = value(trial)
            if e_trial <= current - 1e-4 * (step @ (matrix @ step)) / t:
                break
            t *= 0.5
        if t <= 1e-12:
            break
        v, current = trial, e_trial
    log.debug(f"ball descent: {iteration} iterations, energy {current:.10g}")

    if h1_semi(Field(values=v, domain=op.domain)) >= R - RIM_TOL:
        raise GeometryFailure(
            ERROR_MESSAGES.MINIMIZER_ON_RIM, data={"R": R, "energy": current, "lambda": spec.lam}
        )
    if not current < 0.0:
        raise GeometryFailure(ERROR_MESSAGES.ENERGY_NOT_NEGATIVE(current))

    start_field = Field(values=v, domain=op.domain)
    nu = newton_solve(op, g, g_prime, start_field, tol=tol, max_iter=max_iter).u
    e_nu = value(nu.values)
    if not e_nu < 0.0:
        raise GeometryFailure(ERROR_MESSAGES.ENERGY_NOT_NEGATIVE(e_nu))
    if h1_semi(nu) >= R:
        raise GeometryFailure(ERROR_MESSAGES.MINIMIZER_ON_RIM, data={"R": R, "energy": e_nu})
    _require_nonnegative(nu.values, "nu")
    return nu


def mountain_pass(
    op: MixedOperator,
    spec: ProblemSpec,
    eps: float,
    params: MountainPassParams,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    n_path: int = MP_N_PATH,
    through: Optional[Field] = None,
    enforce_threshold: bool = True,
) -> Field:
    """
    Mountain-pass critical point: deform the path 0 -> T e1 (or 0 -> through
    -> T e1 when warm started) until its highest node is nearly critical,
    then polish that node with Newton.

    The deformation stops at the fixed MP_TOL on the dual gradient norm and
    fails with ConvergenceFailure, carrying the path, if it stalls. `tol` and
    `max_iter` govern the Newton polish as in ball_minimizer.
    """
    _require_g2(spec)
    if enforce_threshold:
        _require_below_threshold(spec, params)
    matrix = op.matrix
    factor = la.cho_factor(matrix)
    g, g_prime = g2_nonlinearity(spec, eps)
    endpoint = params.endpoint.values

    if through is None:
        path = straight_path(endpoint, n_path)
    else:
        path = path_through(through.values, endpoint, matrix, n_path)

    result = deform_path(
        op.domain,
        path,
        energy=lambda v: _energy(op, spec, eps, v, spec.lam),
        gradient=lambda v: matrix @ v - op.mass * g(v),
        precondition=lambda r: la.cho_solve(factor, r),
        metric=matrix,
        tol=MP_TOL,
    )
    stalled = {
        "last": result.critical_point.values,
        "residual": result.gradient_norm,
        "path": result.path,
        "path_energies": result.energies,
        "sweeps": result.sweeps,
    }
    if not result.converged:
        raise ConvergenceFailure(
            ERROR_MESSAGES.MOUNTAIN_PASS_STALLED(f"{result.gradient_norm:.3e}"),
            stage=STAGES.MULTIPLICITY,
            data=stalled,
        )

    try:
        zeta = newton_solve(
            op, g, g_prime, result.critical_point, tol=tol, max_iter=max_iter
        ).u
    except ConvergenceFailure as e:
        raise ConvergenceFailure(
            ERROR_MESSAGES.MOUNTAIN_PASS_STALLED(f"{result.gradient_norm:.3e}"),
            stage=STAGES.MULTIPLICITY,
            data=stalled,
        ) from e

    level = _energy(op, spec, eps, zeta.values, spec.lam)
    if level < params.rho:
        raise GeometryFailure(
            ERROR_MESSAGES.MOUNTAIN_PASS_LEVEL(f"energy {level:.6g} < rho {params.rho:.6g}"),
            data={"energy": level, "rho": params.rho, "path_energies": result.energies},
        )
    if level > params.level_bound * (1.0 + 1e-8) + 1e-12:
        log.warning(f"mountain-pass level {level:.8g} above the path bound {params.level_bound:.8g}")
    _require_nonnegative(zeta.values, "zeta")
    log.debug(f"mountain pass eps={eps:g}: level {level:.10g} after {result.sweeps} sweeps")
    return zeta


####################
# Barrier and monitors
####################


def barrier(op: MixedOperator, spec: ProblemSpec) -> Field:
    """xi solving (a_loc + a_frac) xi = M min(1, lam/2); every solution lies above it."""
    level = min(1.0, 0.5 * spec.lam)
    rhs = np.full(op.domain.size, op.mass * level)
    xi = la.cho_solve(la.cho_factor(op.matrix), rhs)
    return Field(values=xi, domain=op.domain)


def _check_barrier(u: Field, xi: Field, what: str, eps: float):
    slack = BARRIER_SLACK * (1.0 + np.abs(u.values).max())
    gap = u.values - xi.values
    if gap.min() < -slack:
        node = int(np.argmin(gap))
        raise BarrierFailure(
            ERROR_MESSAGES.BARRIER_VIOLATED(f"{what} at node {node}, eps={eps:g}"),
            data={"field": what, "node": node, "gap": float(gap[node]), "eps": eps},
        )


def _check_distinct(nu: Field, zeta: Field, spec: ProblemSpec, params: MountainPassParams):
    distance = float(np.abs(nu.values - zeta.values).max())
    if distance <= COLLAPSE_TOL * (1.0 + np.abs(zeta.values).max()):
        raise BranchCollapse(
            ERROR_MESSAGES.BRANCH_COLLAPSE(
                f"linf(nu - zeta)={distance:.3e} at lambda={spec.lam:g}, "
                f"Lambda_est={params.Lambda_est:g}"
            ),
            data={"distance": distance, "lambda": spec.lam, "Lambda_est": params.Lambda_est},
        )
    return distance


def theta_bound(spec: ProblemSpec, params: MountainPassParams) -> float:
    """
    Largest Theta with (1/2 - 1/(q+1)) Theta^2 <= C1 Theta^(1-gamma) + A,
    C1 = lam sup_bound / R^(1-gamma), A the mountain-pass level bound.
    """
    q, gamma = spec.q, spec.gamma
    c1 = spec.lam * params.sup_bound / params.R ** (1.0 - gamma)
    a = max(params.level_bound, 0.0)

    def excess(theta):
        return (0.5 - 1.0 / (q + 1.0)) * theta**2 - c1 * theta ** (1.0 - gamma) - a

    hi = 1.0
    while excess(hi) <= 0.0:
        hi *= 2.0
    return float(brentq(excess, np.finfo(float).tiny, hi))


def nehari_defect(op: MixedOperator, spec: ProblemSpec, u: Field) -> float:
    """Relative defect of B(u,u) = lam sum u^(1-gamma) |cell| + sum u^(q+1) |cell|."""
    v = np.maximum(u.values, 0.0)
    quad = float(u.values @ (op.matrix @ u.values))
    rhs = (spec.lam * np.sum(v ** (1.0 - spec.gamma)) + np.sum(v ** (spec.q + 1.0))) * op.mass
    return abs(quad - rhs) / max(abs(quad), np.finfo(float).tiny)


def _gaps_shrinking(gaps: list[float], slack: float, window: int = 3) -> bool:
    tail = gaps[-window:]
    return len(tail) == window and all(b <= a + slack for a, b in zip(tail, tail[1:]))


def _uniformly_bounded(values: list[float], window: int = 3, growth: float = 1.1) -> bool:
    tail = values[-window:]
    return bool(np.all(np.isfinite(tail))) and all(b <= growth * a for a, b in zip(tail, tail[1:]))


####################
# Pipeline
####################


def solve_g2(
    op: MixedOperator,
    eig: EigenPair,
    spec: ProblemSpec,
    schedule: Optional[Iterable[float]] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = DEFAULT_SEED,
    params: Optional[MountainPassParams] = None,
    n_path: int = MP_N_PATH,
    enforce_threshold: bool = True,
) -> TwoSolutions:
    """
    Two positive solutions of the g2 problem: the ball minimizer (negative
    energy) and the mountain-pass point (energy >= rho), continued in eps
    and polished on the eps = 0 problem.
    """
    _require_g2(spec)
    schedule = list(schedule if schedule is not None else eps_schedule(EPS0, EPS_RATIO, EPS_FLOOR))
    if params is None:
        params = calibrate_geometry(op, eig, spec, schedule[0], seed=seed)
    if enforce_threshold:
        _require_below_threshold(spec, params)

    xi = barrier(op, spec)
    nu = zeta = None
    trace: list[EpsTraceEntry] = []
    cauchy = False
    for eps in schedule:
        nu_next = ball_minimizer(
            op, spec, eps, params, tol, max_iter, start=nu, enforce_threshold=enforce_threshold
        )
        zeta_next = mountain_pass(
            op,
            spec,
            eps,
            params,
            tol,
            max_iter,
            n_path,
            through=zeta,
            enforce_threshold=enforce_threshold,
        )
        e_nu = _energy(op, spec, eps, nu_next.values, spec.lam)
        e_zeta = _energy(op, spec, eps, zeta_next.values, spec.lam)
        if eps <= 1.0:
            _check_barrier(nu_next, xi, "nu", eps)
            _check_barrier(zeta_next, xi, "zeta", eps)
        _check_distinct(nu_next, zeta_next, spec, params)

        trace.append(
            EpsTraceEntry(
                eps=eps,
                energy_nu=e_nu,
                energy_zeta=e_zeta,
                residual_nu=float(np.linalg.norm(gradient(op, spec, eps, nu_next).values)),
                residual_zeta=float(np.linalg.norm(gradient(op, spec, eps, zeta_next).values)),
                h1_nu=h1_semi(nu_next),
                h1_zeta=h1_semi(zeta_next),
            )
        )
        if nu is not None:
            change = max(h1_semi(nu_next - nu), h1_semi(zeta_next - zeta))
            cauchy = change < CONTINUATION_TOL
        log.debug(f"g2 eps={eps:.3e}: I(nu)={e_nu:.10g} I(zeta)={e_zeta:.10g}")
        nu, zeta = nu_next, zeta_next
        if cauchy:
            break

    if not cauchy:
        raise ConvergenceFailure(
            ERROR_MESSAGES.CONTINUATION_STAGNATED,
            stage=STAGES.MULTIPLICITY,
            data={"last": zeta.values, "trace": trace},
        )

    g0, g0_prime = g2_nonlinearity(spec, 0.0)
    nu0 = newton_solve(op, g0, g0_prime, nu, tol=tol, max_iter=max_iter).u
    zeta0 = newton_solve(op, g0, g0_prime, zeta, tol=tol, max_iter=max_iter).u
    for name, u in (("nu", nu0), ("zeta", zeta0)):
        if np.any(u.values <= 0.0):
            _require_nonnegative(u.values, name)
        _check_barrier(u, xi, name, 0.0)
    distinctness = _check_distinct(nu0, zeta0, spec, params)

    e_nu0 = _energy(op, spec, 0.0, nu0.values, spec.lam)
    e_zeta0 = _energy(op, spec, 0.0, zeta0.values, spec.lam)
    if not e_nu0 < 0.0:
        raise GeometryFailure(ERROR_MESSAGES.ENERGY_NOT_NEGATIVE(e_nu0))
    if not e_zeta0 >= params.rho:
        raise GeometryFailure(
            ERROR_MESSAGES.MOUNTAIN_PASS_LEVEL(f"limit energy {e_zeta0:.6g} < rho {params.rho:.6g}")
        )

    for entry in trace:
        entry.limit_gap_nu = abs(entry.energy_nu - e_nu0)
        entry.limit_gap_zeta = abs(entry.energy_zeta - e_zeta0)
    slack = 1e-10 * (1.0 + abs(e_zeta0))
    energy_trace_cauchy = _gaps_shrinking(
        [e.limit_gap_nu for e in trace], slack
    ) and _gaps_shrinking([e.limit_gap_zeta for e in trace], slack)

    theta_observed = max(
        [max(e.h1_nu, e.h1_zeta) for e in trace] + [h1_semi(nu0), h1_semi(zeta0)]
    )
    bound = theta_bound(spec, params)
    if theta_observed > bound:
        log.warning(f"observed norm {theta_observed:.6g} exceeds the a-priori bound {bound:.6g}")

    h1_zeta = [e.h1_zeta for e in trace]
    uniform_bound = _uniformly_bounded(h1_zeta)
    if not uniform_bound:
        log.warning(f"h1_semi(zeta_eps) still growing over the last eps values: {h1_zeta[-3:]}")

    residual_zeta_vector = op.matrix @ zeta0.values - op.mass * g0(zeta0.values)
    ps_monitor = e_zeta0 - float(residual_zeta_vector @ zeta0.values) / (spec.q + 1.0)

    solutions = TwoSolutions(
        lam=spec.lam,
        params=params,
        nu=nu0,
        zeta=zeta0,
        xi=xi,
        energy_nu=e_nu0,
        energy_zeta=e_zeta0,
        eps_trace=trace,
        barrier_min=float(xi.values.min()),
        residual_nu=weak_residual(op, spec, nu0, N_TEST_FIELDS, seed).max_weak_residual,
        residual_zeta=weak_residual(op, spec, zeta0, N_TEST_FIELDS, seed).max_weak_residual,
        distinctness=distinctness,
        distinct_enough=distinctness >= 0.5 * float(np.abs(zeta0.values).max()),
        theta_observed=theta_observed,
        theta_bound=bound,
        nehari_defect_nu=nehari_defect(op, spec, nu0),
        nehari_defect_zeta=nehari_defect(op, spec, zeta0),
        ps_monitor_zeta=ps_monitor,
        energy_trace_cauchy=energy_trace_cauchy,
        h1_zeta_max=max(h1_zeta),
        uniform_bound=uniform_bound,
        min_nu=float(nu0.values.min()),
        min_zeta=float(zeta0.values.min()),
    )
    log.info(
        f"g2 lambda={spec.lam:g}: I(nu0)={e_nu0:.10g} < 0 < rho={params.rho:.6g} <= "
        f"I(zeta0)={e_zeta0:.10g}, distinctness={distinctness:.6g}"
    )
    return solutions


def lambda_grid(Lambda_est: float, factors: Optional[Sequence[float]] = None) -> list[float]:
    factors = factors if factors is not None else [2.0**k for k in range(-3, 4)]
    return [Lambda_est * f for f in factors]


def sweep_lambda(
    op: MixedOperator,
    eig: EigenPair,
    spec: ProblemSpec,
    factors: Optional[Sequence[float]] = None,
    schedule: Optional[Iterable[float]] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = DEFAULT_SEED,
) -> LambdaSweep:
    """
    Runs solve_g2 over a geometric lambda grid around Lambda_est without the
    threshold precondition; the largest certified lambda is the empirical threshold.
    """
    _require_g2(spec)
    schedule = list(schedule if schedule is not None else eps_schedule(EPS0, EPS_RATIO, EPS_FLOOR))
    params = calibrate_geometry(op, eig, spec, schedule[0], seed=seed)

    points = []
    for lam in lambda_grid(params.Lambda_est, factors):
        trial = spec.model_copy(update={"lam": lam})
        try:
            result = solve_g2(
                op, eig, trial, schedule, tol, max_iter, seed, params=params, enforce_threshold=False
            )
        except SolverError as e:
            log.info(f"lambda={lam:.6g}: not certified ({e.detail})")
            points.append(SweepPoint(lam=lam, certified=False, failure=e.to_report()))
            continue
        points.append(
            SweepPoint(
                lam=lam,
                certified=True,
                energy_nu=result.energy_nu,
                energy_zeta=result.energy_zeta,
            )
        )

    certified = [p.lam for p in points if p.certified]
    sweep = LambdaSweep(
        Lambda_est=params.Lambda_est,
        empirical_Lambda=max(certified) if certified else None,
        points=points,
    )
    log.info(f"lambda sweep: Lambda_est={sweep.Lambda_est:.6g}, empirical={sweep.empirical_Lambda}")
    return sweep
