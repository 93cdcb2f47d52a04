import numpy as np
import pytest
import scipy.linalg as la

from apps.diagnostics.main import gradient_check
from apps.grid.main import h1_semi, zero_field
from apps.grid.models import Field
import apps.multiplicity.main as multiplicity_main
from apps.multiplicity.main import (
    _energy,
    _uniformly_bounded,
    ball_minimizer,
    barrier,
    calibrate_geometry,
    energy,
    gradient,
    lambda_grid,
    mountain_pass,
    nehari_defect,
    rim_violations,
    solve_g2,
    theta_bound,
)
from apps.singular.models import ProblemSpec
from constants import STAGES
from utils.errors import ConvergenceFailure, GeometryFailure, ValidationFailure


def g2(lam=1.0, q=2.0, gamma=0.5):
    return ProblemSpec(kind="g2", s=0.5, gamma=gamma, lam=lam, q=q)


@pytest.fixture(scope="module")
def params(op_1d, eig_1d):
    return calibrate_geometry(op_1d, eig_1d, g2(), 1.0)


@pytest.fixture
def positive(op_1d):
    return Field(values=0.5 + 0.1 * np.arange(op_1d.domain.size) / op_1d.domain.size, domain=op_1d.domain)


####################
# Energy and gradient
####################


@pytest.mark.parametrize("eps", [0.0, 1e-3, 1.0])
def test_energy_at_zero(op_1d, eps):
    assert energy(op_1d, g2(), eps, zero_field(op_1d.domain)) == 0.0


def test_energy_decreases_in_lambda(op_1d, positive):
    values = [energy(op_1d, g2(lam), 0.1, positive) for lam in (0.01, 0.1, 1.0, 10.0)]
    assert values == sorted(values, reverse=True)
    assert values[-1] <= _energy(op_1d, g2(), 0.1, positive.values, 0.0)


def test_energy_of_nonpositive_field_is_quadratic(op_1d):
    u = Field(values=-np.linspace(0.1, 1.0, op_1d.domain.size), domain=op_1d.domain)
    assert energy(op_1d, g2(), 0.5, u) == pytest.approx(0.5 * u.values @ (op_1d.matrix @ u.values))


def test_gradient_at_zero(op_1d):
    eps, lam = 0.25, 3.0
    grad = gradient(op_1d, g2(lam), eps, zero_field(op_1d.domain))
    assert grad.values == pytest.approx(-op_1d.mass * lam * eps**-0.5 * np.ones(op_1d.domain.size))


def test_eps_is_validated(op_1d, positive):
    with pytest.raises(ValidationFailure):
        gradient(op_1d, g2(), 0.0, positive)
    with pytest.raises(ValidationFailure):
        energy(op_1d, g2(), -1.0, positive)


def test_g1_problem_rejected(op_1d, positive):
    spec = ProblemSpec(kind="g1", s=0.5, gamma=0.5, lam=1.0, h="one")
    with pytest.raises(ValidationFailure):
        energy(op_1d, spec, 0.1, positive)


@pytest.mark.parametrize("eps", [1.0, 1e-2, 1e-4])
def test_gradient_matches_central_differences(op_1d, eps):
    check = gradient_check(op_1d, g2(), eps, n_pairs=20, seed=7)
    assert check.max_error <= 1e-6


####################
# Geometry
####################


def test_geometry(op_1d, params):
    assert params.R > 0.0
    assert params.rho > 0.0
    assert params.Lambda_est > 0.0
    assert params.theta == pytest.approx(2.0 ** (1.0 - 3.0 / 4.0))
    assert params.rim_violations == 0
    assert params.level_bound >= params.rho
    assert "e1" not in params.summary()


def test_endpoint_energy(op_1d, params):
    spec = g2(0.5 * params.Lambda_est)
    assert energy(op_1d, spec, 1.0, params.endpoint) < -1.0
    assert h1_semi(params.endpoint) > params.R


def test_rim_is_above_rho(op_1d, params):
    for lam in (0.25 * params.Lambda_est, 0.5 * params.Lambda_est):
        assert rim_violations(op_1d, g2(), 1e-2, params.R, params.rho, lam, samples=30) == 0


def test_ball_minimizer(op_1d, params):
    spec = g2(0.25 * params.Lambda_est)
    nu = ball_minimizer(op_1d, spec, 1e-2, params)
    assert energy(op_1d, spec, 1e-2, nu) < 0.0
    assert h1_semi(nu) < params.R
    assert nu.values.min() >= 0.0
    assert np.linalg.norm(gradient(op_1d, spec, 1e-2, nu).values) < 1e-8


def test_threshold_precondition(op_1d, params):
    spec = g2(2.0 * params.Lambda_est)
    with pytest.raises(GeometryFailure):
        ball_minimizer(op_1d, spec, 1e-2, params)
    with pytest.raises(GeometryFailure):
        mountain_pass(op_1d, spec, 1e-2, params)


def test_mountain_pass(op_1d, params):
    spec = g2(0.25 * params.Lambda_est)
    zeta = mountain_pass(op_1d, spec, 1.0, params)
    assert energy(op_1d, spec, 1.0, zeta) >= params.rho
    assert zeta.values.min() >= 0.0
    assert np.linalg.norm(gradient(op_1d, spec, 1.0, zeta).values) < 1e-8

    nu = ball_minimizer(op_1d, spec, 1.0, params)
    assert np.abs(zeta.values - nu.values).max() > 0.5 * np.abs(nu.values).max()


def test_mountain_pass_reports_stalled_path(op_1d, params, monkeypatch):
    deform = multiplicity_main.deform_path

    def one_sweep(*args, **kwargs):
        return deform(*args, **{**kwargs, "max_sweeps": 1})

    monkeypatch.setattr(multiplicity_main, "deform_path", one_sweep)
    with pytest.raises(ConvergenceFailure) as info:
        mountain_pass(op_1d, g2(0.25 * params.Lambda_est), 1.0, params, n_path=21)
    assert info.value.stage == STAGES.MULTIPLICITY
    assert info.value.data["path"].shape == (21, op_1d.domain.size)
    assert info.value.data["sweeps"] == 1
    assert "path" in info.value.to_report()["data"]


def test_uniformly_bounded():
    assert _uniformly_bounded([5.0, 3.0, 3.2, 3.3])
    assert not _uniformly_bounded([1.0, 2.0, 3.0])
    assert not _uniformly_bounded([1.0, 1.0, np.inf])
    assert _uniformly_bounded([2.0])


def test_barrier(op_1d):
    xi = barrier(op_1d, g2(0.5))
    expected = la.solve(op_1d.matrix, op_1d.mass * 0.25 * np.ones(op_1d.domain.size))
    assert xi.values == pytest.approx(expected)
    assert xi.values.min() > 0.0
    assert barrier(op_1d, g2(4.0)).values == pytest.approx(4.0 * xi.values)


def test_theta_bound(params):
    spec = g2(0.25 * params.Lambda_est)
    theta = theta_bound(spec, params)
    c1 = spec.lam * params.sup_bound / params.R**0.5
    excess = (0.5 - 1.0 / 3.0) * theta**2 - c1 * theta**0.5 - params.level_bound
    assert excess == pytest.approx(0.0, abs=1e-8 * (1.0 + params.level_bound))
    assert theta_bound(g2(0.5 * params.Lambda_est), params) > theta


def test_nehari_defect_vanishes_on_solutions(op_1d, params):
    spec = g2(0.25 * params.Lambda_est)
    nu = ball_minimizer(op_1d, spec, 1e-8, params)
    assert nehari_defect(op_1d, spec, nu) < 1e-4


def test_lambda_grid():
    grid = lambda_grid(8.0)
    assert grid == pytest.approx([1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0])
    assert lambda_grid(1.0, [0.5]) == [0.5]


####################
# Two solutions
####################


@pytest.mark.slow
def test_two_solutions(op_127, eig_127):
    placeholder = calibrate_geometry(op_127, eig_127, g2(), 1.0)
    spec = g2(0.25 * placeholder.Lambda_est)
    result = solve_g2(op_127, eig_127, spec, params=placeholder)

    assert result.energy_nu < 0.0 < placeholder.rho <= result.energy_zeta
    for entry in result.eps_trace:
        assert entry.energy_nu < 0.0 < placeholder.rho <= entry.energy_zeta
    assert np.all(result.nu.values >= result.xi.values - 1e-8)
    assert np.all(result.zeta.values >= result.xi.values - 1e-8)
    assert result.barrier_min > 0.0
    assert result.distinct_enough
    assert result.energy_trace_cauchy
    assert result.uniform_bound
    assert result.h1_zeta_max >= h1_semi(result.zeta) * 0.9
    assert result.residual_nu < 1e-6
    assert result.residual_zeta < 1e-6
    assert result.nehari_defect_nu < 1e-6
    assert result.nehari_defect_zeta < 1e-6

    summary = result.summary()
    assert summary["lambda"] == spec.lam
    assert "nu" not in summary
    assert "e1" not in summary["params"]
