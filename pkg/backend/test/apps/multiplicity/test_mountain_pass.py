import numpy as np
import pytest

from apps.grid.main import build_domain
from apps.multiplicity.mountain_pass import (
    deform_path,
    path_through,
    redistribute,
    straight_path,
)


def test_straight_path():
    path = straight_path(np.array([2.0, -1.0]), 5)
    assert path.shape == (5, 2)
    assert path[2] == pytest.approx([1.0, -0.5])


def test_redistribute_keeps_endpoints_and_spacing():
    metric = np.eye(2)
    path = np.array([[0.0, 0.0], [0.1, 0.0], [0.2, 0.0], [3.0, 0.0]])
    out = redistribute(path, metric)
    assert out[0] == pytest.approx(path[0])
    assert out[-1] == pytest.approx(path[-1])
    assert np.diff(out[:, 0]) == pytest.approx([1.0, 1.0, 1.0])


def test_redistribute_in_metric():
    # arclength counts the first coordinate four times as heavily
    metric = np.diag([4.0, 1.0])
    path = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 2.0]])
    out = redistribute(path, metric, n_nodes=5)
    assert out[2] == pytest.approx([1.0, 0.0])
    assert out[1] == pytest.approx([0.5, 0.0])


def test_path_through_visits_point():
    metric = np.eye(2)
    out = path_through(np.array([1.0, 1.0]), np.array([2.0, 0.0]), metric, 5)
    assert out[2] == pytest.approx([1.0, 1.0])
    assert out[0] == pytest.approx([0.0, 0.0])


def test_deformation_finds_saddle():
    # E(v) = |v|^2 / 2 - sum v^4 / 4 has its lowest saddle at the unit vectors
    domain = build_domain(1, [(0.0, 1.0)], [3])

    def energy(v):
        return 0.5 * v @ v - 0.25 * np.sum(v**4)

    def gradient(v):
        return v - v**3

    path = straight_path(np.array([2.0, 0.0, 0.0]), 41)
    path[:, 1] = 0.3 * np.sin(np.pi * np.linspace(0.0, 1.0, 41))
    result = deform_path(
        domain, path, energy, gradient, precondition=lambda r: r, metric=np.eye(3), tol=1e-6
    )
    assert result.converged
    assert np.abs(result.critical_point.values) == pytest.approx([1.0, 0.0, 0.0], abs=1e-4)
    assert energy(result.critical_point.values) == pytest.approx(0.25, abs=1e-6)
    assert result.path[0] == pytest.approx(np.zeros(3))
    assert result.path[-1] == pytest.approx([2.0, 0.0, 0.0])


def test_deformation_reports_budget_exhaustion():
    domain = build_domain(1, [(0.0, 1.0)], [3])

    def energy(v):
        return 0.5 * v @ v - 0.25 * np.sum(v**4)

    path = straight_path(np.array([2.0, 0.0, 0.0]), 11)
    path[:, 1] = 0.3 * np.sin(np.pi * np.linspace(0.0, 1.0, 11))
    result = deform_path(
        domain,
        path,
        energy,
        lambda v: v - v**3,
        precondition=lambda r: r,
        metric=np.eye(3),
        tol=1e-12,
        max_sweeps=1,
    )
    assert not result.converged
    assert result.sweeps == 1
    assert result.path[-1] == pytest.approx([2.0, 0.0, 0.0])
