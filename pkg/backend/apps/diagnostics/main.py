import logging
from typing import Callable, Sequence, Union

import numpy as np
import scipy.linalg as la

from apps.diagnostics.models import GradientCheck, RefinementStudy, ResidualReport
from apps.grid.main import h1_semi, node_coordinates, reflect
from apps.grid.models import Field
from apps.operator.models import MixedOperator
from apps.singular.models import ProblemSpec
from config import DENSE_ORACLE_LIMIT, DEFAULT_SEED, N_TEST_FIELDS, SRC_LOG_LEVELS
from constants import ERROR_MESSAGES, STAGES
from utils.errors import PositivityFailure, SizeGuardExceeded
from utils.misc import seeded_rng

log = logging.getLogger(__name__)
log.setLevel(SRC_LOG_LEVELS["DIAGNOSTICS"])

Nonlinearity = Callable[[np.ndarray], np.ndarray]

FD_STEP = 1e-5


############################
# Weak residuals
############################


def _nonlinearity(problem: Union[ProblemSpec, Nonlinearity]) -> tuple[Nonlinearity, bool]:
    """g(u) for the eps = 0 problem and whether it is singular at u = 0."""
    if not isinstance(problem, ProblemSpec):
        return problem, False
    # the solver apps import this module, so resolve their nonlinearities lazily
    if problem.kind == "g1":
        from apps.singular.main import g1_nonlinearity

        return g1_nonlinearity(problem)[0], True
    from apps.multiplicity.main import g2_nonlinearity

    return g2_nonlinearity(problem, 0.0)[0], True


def bump_fields(op: MixedOperator, n_tests: int, seed: int) -> np.ndarray:
    """
    (n_tests, size) nonnegative tensor-product bumps prod (1 - ((x-c)/w)^2)^2,
    supported strictly inside the domain, with seeded centers and widths.
    """
    rng = seeded_rng(seed)
    coords = node_coordinates(op.domain)
    fields = np.ones((n_tests, op.domain.size))
    for axis, (a, b) in enumerate(op.domain.extent):
        length = b - a
        width = rng.uniform(0.1, 0.4, n_tests) * length
        center = a + width + rng.uniform(0.0, 1.0, n_tests) * (length - 2.0 * width)
        z = (coords[None, :, axis] - center[:, None]) / width[:, None]
        fields *= np.where(np.abs(z) < 1.0, (1.0 - z**2) ** 2, 0.0)
    return fields


def weak_residual(
    op: MixedOperator,
    problem: Union[ProblemSpec, Nonlinearity],
    u: Field,
    n_tests: int = N_TEST_FIELDS,
    seed: int = DEFAULT_SEED,
    singular: bool = False,
) -> ResidualReport:
    """
    max over seeded bump fields phi of |B(u, phi) - sum g(u) phi |cell|| / h1_semi(phi).
    `problem` is a ProblemSpec (its eps = 0 right-hand side) or a plain
    callable g(u); `singular` marks a callable that blows up at u = 0.
    """
    g, is_singular = _nonlinearity(problem)
    is_singular = is_singular or singular
    values = u.values
    if is_singular and np.any(values <= 0.0):
        node = int(np.argmin(values))
        raise PositivityFailure(
            ERROR_MESSAGES.NOT_POSITIVE(node),
            stage=STAGES.DIAGNOSTICS,
            data={"node": node, "value": float(values[node])},
        )

    dual = op.matrix @ values - op.mass * g(values)
    worst = 0.0
    for phi in bump_fields(op, n_tests, seed):
        scale = h1_semi(Field(values=phi, domain=op.domain))
        if scale == 0.0:
            continue
        worst = max(worst, abs(float(dual @ phi)) / scale)

    log.debug(f"weak residual over {n_tests} test fields: {worst:.3e}")
    return ResidualReport(max_weak_residual=worst, n_test_fields=n_tests)


############################
# Oracles
############################


def dense_eigen_oracle(op: MixedOperator) -> list[float]:
    """All eigenvalues of (a_loc + a_frac) e = lambda M e, ascending."""
    if op.domain.size > DENSE_ORACLE_LIMIT:
        raise SizeGuardExceeded(ERROR_MESSAGES.SIZE_GUARD(op.domain.size))
    return (la.eigvalsh(op.matrix) / op.mass).tolist()


def gradient_check(
    op: MixedOperator,
    spec: ProblemSpec,
    eps: float,
    n_pairs: int = N_TEST_FIELDS,
    seed: int = DEFAULT_SEED,
) -> GradientCheck:
    """
    Central differences of the regularized energy against <gradient, d> on
    seeded pairs (u, d) with u bounded away from zero.
    """
    from apps.multiplicity.main import energy, gradient

    rng = seeded_rng(seed)
    bumps = bump_fields(op, n_pairs, seed + 1)
    worst = 0.0
    for bump in bumps:
        u = Field(values=0.2 + bump * rng.uniform(0.5, 2.0), domain=op.domain)
        d = rng.standard_normal(op.domain.size)
        d /= np.abs(d).max()
        direction = Field(values=d, domain=op.domain)

        plus = energy(op, spec, eps, u + FD_STEP * direction)
        minus = energy(op, spec, eps, u - FD_STEP * direction)
        fd = (plus - minus) / (2.0 * FD_STEP)
        exact = float(gradient(op, spec, eps, u).values @ d)
        error = abs(exact - fd) / (1.0 + abs(energy(op, spec, eps, u)))
        worst = max(worst, error)

    log.info(f"gradient check eps={eps:g}: worst error {worst:.3e} over {n_pairs} pairs")
    return GradientCheck(eps=eps, n_pairs=n_pairs, max_error=worst)


############################
# Symmetry and refinement
############################


def symmetry_defect(f: Field) -> float:
    return float(np.max(np.abs(f.values - reflect(f).values)))


def refinement_study(builder: Callable[[int], float], levels: Sequence[int]) -> RefinementStudy:
    """
    Evaluates a scalar quantity builder(n) over refinement levels and returns
    the ratios of successive differences.
    """
    levels = list(levels)
    values = []
    for n in levels:
        values.append(float(builder(n)))
        log.info(f"refinement level n={n}: {values[-1]:.12g}")

    diffs = np.abs(np.diff(values))
    ratios = [
        float(diffs[k + 1] / diffs[k]) if diffs[k] > 0.0 else 0.0 for k in range(len(diffs) - 1)
    ]
    return RefinementStudy(levels=levels, values=values, ratios=ratios)
