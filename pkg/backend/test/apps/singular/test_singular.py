import numpy as np
import pytest
from pydantic import ValidationError

from apps.diagnostics.main import symmetry_defect, weak_residual
from apps.grid.main import build_domain
from apps.grid.models import Field
from apps.operator.main import assemble
from apps.eigen.main import principal_eigenpair
from apps.singular.main import (
    find_a_lambda,
    find_b_lambda,
    j_energy,
    nodewise_shift,
    solve_g1,
    solve_pure_singular,
)
from apps.singular.models import ContinuationTrace, ProblemSpec
from utils.errors import ValidationFailure
from utils.misc import eps_schedule


def g1(lam=1.0, gamma=0.5, h="one"):
    return ProblemSpec(kind="g1", s=0.5, gamma=gamma, lam=lam, h=h)


@pytest.fixture(scope="module")
def v0(op_1d):
    return solve_pure_singular(op_1d, 0.5)


####################
# ProblemSpec
####################


def test_lambda_alias():
    spec = ProblemSpec(**{"kind": "g1", "s": 0.5, "gamma": 0.5, "lambda": 3.0, "h": "one"})
    assert spec.lam == 3.0


@pytest.mark.parametrize(
    "fields, message",
    [
        ({"gamma": 1.5}, "(0,1)"),
        ({"gamma": 0.0}, "(0,1)"),
        ({"lam": -1.0}, "lambda must be positive"),
        ({"s": 1.0}, "Fractional order"),
        ({"h": "two"}, "Unknown h"),
    ],
)
def test_invalid_g1(fields, message):
    data = {"kind": "g1", "s": 0.5, "gamma": 0.5, "lam": 1.0, "h": "one", **fields}
    with pytest.raises(ValidationError, match=message):
        ProblemSpec(**data)


@pytest.mark.parametrize("q, r", [(0.5, None), (2.0, 2.5), (3.0, 4.0)])
def test_invalid_g2_exponents(q, r):
    with pytest.raises(ValidationError, match="q"):
        ProblemSpec(kind="g2", s=0.5, gamma=0.5, lam=1.0, q=q, r=r)


def test_default_critical_exponent():
    spec = ProblemSpec(kind="g2", s=0.5, gamma=0.5, lam=1.0, q=2.0)
    assert spec.exponent_l == 4.0


####################
# Pure singular problem
####################


def test_pure_singular_weak_residual(op_1d, v0):
    report = weak_residual(op_1d, lambda t: t ** (-0.5), v0, singular=True)
    assert report.max_weak_residual < 1e-6
    assert np.all(v0.values > 0.0)


def test_pure_singular_is_symmetric(v0):
    assert symmetry_defect(v0) < 1e-9


def test_continuation_trace(op_1d):
    trace = ContinuationTrace()
    solve_pure_singular(op_1d, 0.5, trace=trace)
    assert trace.steps[0].eps == 1.0
    assert trace.monotone_defect < 1e-6
    linf = [step.linf for step in trace.steps]
    assert all(b >= a - 1e-9 for a, b in zip(linf, linf[1:]))


def test_pure_singular_rejects_gamma(op_1d):
    with pytest.raises(ValidationFailure):
        solve_pure_singular(op_1d, 1.0)


def test_short_schedule_stagnates(op_1d):
    from utils.errors import ConvergenceFailure

    with pytest.raises(ConvergenceFailure) as exc:
        solve_pure_singular(op_1d, 0.5, schedule=[1.0, 0.5])
    assert "trace" in exc.value.data


@pytest.mark.slow
def test_pure_singular_refines():
    linf = []
    for n in (63, 127, 255):
        op = assemble(build_domain(1, [(-1.0, 1.0)], [n]), 0.5)
        linf.append(float(solve_pure_singular(op, 0.5).values.max()))
    assert linf[2] == pytest.approx(linf[1], rel=5e-2)
    assert abs(linf[2] - linf[1]) < abs(linf[1] - linf[0])


####################
# Scalings
####################


def test_a_lambda(eig_1d):
    for lam in (0.5, 1.0, 8.0):
        a = find_a_lambda(eig_1d, g1(lam))
        t = a * eig_1d.e1.values
        assert np.all(eig_1d.lambda1 * t <= lam * t ** (-0.5))
        if a < 1.0:
            # the next larger candidate must fail
            assert np.any(eig_1d.lambda1 * 2.0 * t > lam * (2.0 * t) ** (-0.5))


def test_a_lambda_grows_with_lambda(eig_1d):
    values = [find_a_lambda(eig_1d, g1(lam)) for lam in (0.1, 1.0, 10.0, 100.0)]
    assert values == sorted(values)


@pytest.mark.parametrize("lam, expected", [(1.0, 1.0), (5.0, 4.0), (0.2, 1.0)])
def test_b_lambda_closed_form(v0, lam, expected):
    # h = 1: need b^(gamma+1) >= lam
    assert find_b_lambda(v0, g1(lam)) == expected


def test_scalings_need_g1(eig_1d):
    spec = ProblemSpec(kind="g2", s=0.5, gamma=0.5, lam=1.0, q=2.0)
    with pytest.raises(ValidationFailure):
        find_a_lambda(eig_1d, spec)


def test_nodewise_shift_bounds_slope():
    g = lambda t: t ** (-0.5)
    lower, upper = np.array([0.5, 1.0]), np.array([1.0, 4.0])
    shift = nodewise_shift(g, lower, upper)
    assert shift == pytest.approx(0.5 * lower ** (-1.5), rel=1e-2)


####################
# g1 problem
####################


@pytest.mark.parametrize("h", ["one", "one-plus-t", "one-plus-log"])
def test_g1_sandwich(op_1d, eig_1d, v0, h):
    cert = solve_g1(op_1d, eig_1d, g1(1.0, h=h), v0=v0)
    u = cert.solution.values
    assert np.all(cert.sub.values <= u + 1e-10)
    assert np.all(u <= cert.sup.values + 1e-10)
    assert cert.min_interior > 0.0
    assert cert.residual < 1e-6
    assert cert.summary()["a_lambda"] == cert.a_lambda


def test_j_energy_closed_form(op_1d, v0):
    spec = g1(2.0)
    u = v0.values
    expected = 0.5 * u @ (op_1d.matrix @ u) - 2.0 * np.sum(u**0.5 / 0.5) * op_1d.mass
    assert j_energy(op_1d, spec, v0) == pytest.approx(expected, rel=1e-12)


def test_j_energy_needs_positive_part():
    domain = build_domain(1, [(0.0, 1.0)], [7])
    op = assemble(domain, 0.5)
    u = Field(values=-np.ones(7), domain=domain)
    assert j_energy(op, g1(), u) == pytest.approx(0.5 * u.values @ (op.matrix @ u.values))


def test_eps_schedule_default_start():
    assert list(eps_schedule(1.0, 0.5, 0.2)) == [1.0, 0.5, 0.25, 0.2]


@pytest.fixture(scope="module")
def pure_singular(op_1d):
    solutions = {}

    def solve(gamma):
        if gamma not in solutions:
            solutions[gamma] = solve_pure_singular(op_1d, gamma)
        return solutions[gamma]

    return solve


@pytest.mark.parametrize("h", ["one", "one-plus-t"])
@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_g1_parameter_grid(op_1d, eig_1d, pure_singular, lam, gamma, h):
    v0 = pure_singular(gamma)
    cert = solve_g1(op_1d, eig_1d, g1(lam, gamma=gamma, h=h), v0=v0)
    u = cert.solution.values
    assert np.all(cert.sub.values <= u + 1e-10)
    assert np.all(u <= cert.sup.values + 1e-10)
    assert cert.residual < 1e-6
    if h == "one":
        expected = lam ** (1.0 / (1.0 + gamma)) * v0.values
        assert np.abs(u - expected).max() < 1e-8
