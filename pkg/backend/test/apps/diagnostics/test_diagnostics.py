import numpy as np
import pytest
import scipy.linalg as la
from pydantic import ValidationError

from apps.diagnostics.main import (
    bump_fields,
    dense_eigen_oracle,
    refinement_study,
    symmetry_defect,
    weak_residual,
)
from apps.diagnostics.models import ResidualReport
from apps.grid.main import build_domain, sample_field
from apps.grid.models import Field
from apps.operator.main import assemble, local_only
from utils.errors import PositivityFailure, SizeGuardExceeded


def one(t):
    return np.ones_like(t)


@pytest.fixture(scope="module")
def torsion(op_1d):
    values = la.solve(op_1d.matrix, op_1d.mass * np.ones(op_1d.domain.size))
    return Field(values=values, domain=op_1d.domain)


def test_exact_solution_has_no_residual(op_1d, torsion):
    assert weak_residual(op_1d, one, torsion).max_weak_residual < 1e-10


def test_residual_tracks_perturbation(op_1d, torsion, rng):
    noise = rng.standard_normal(op_1d.domain.size)
    small = weak_residual(op_1d, one, torsion.with_values(torsion.values + 1e-6 * noise))
    large = weak_residual(op_1d, one, torsion.with_values(torsion.values + 1e-3 * noise))
    assert large.max_weak_residual >= 10.0 * small.max_weak_residual


def test_residual_is_seeded(op_1d, torsion):
    u = torsion.with_values(torsion.values * 1.01)
    first = weak_residual(op_1d, one, u, seed=5).max_weak_residual
    assert weak_residual(op_1d, one, u, seed=5).max_weak_residual == first


def test_singular_residual_needs_positive_field(op_1d, torsion):
    u = torsion.with_values(torsion.values - torsion.values.max())
    with pytest.raises(PositivityFailure) as exc:
        weak_residual(op_1d, lambda t: t ** (-0.5), u, singular=True)
    assert exc.value.to_report()["stage"] == "diagnostics"


def test_bump_fields_are_interior(square, op_2d):
    fields = bump_fields(op_2d, 8, seed=2)
    assert fields.shape == (8, square.size)
    assert fields.min() >= 0.0
    assert np.all(fields.max(axis=1) > 0.0)
    assert np.array_equal(fields, bump_fields(op_2d, 8, seed=2))


def test_size_guard(op_1d, monkeypatch):
    monkeypatch.setattr("apps.diagnostics.main.DENSE_ORACLE_LIMIT", 10)
    with pytest.raises(SizeGuardExceeded):
        dense_eigen_oracle(op_1d)


def test_local_spectrum_closed_form():
    op = local_only(assemble(build_domain(1, [(0.0, 1.0)], [31]), 0.5))
    (h,) = op.domain.h
    k = np.arange(1, 32)
    expected = 4.0 / h**2 * np.sin(k * np.pi * h / 2.0) ** 2
    assert dense_eigen_oracle(op) == pytest.approx(expected, rel=1e-10)


def test_symmetry_defect():
    domain = build_domain(1, [(-1.0, 1.0)], [15])
    assert symmetry_defect(sample_field(domain, lambda x: np.cos(x))) == pytest.approx(0.0, abs=1e-15)
    assert symmetry_defect(sample_field(domain, lambda x: x)) == pytest.approx(2.0 * 14.0 / 16.0)


def test_refinement_ratios():
    study = refinement_study(lambda n: 1.0 + 1.0 / n**2, [10, 20, 40, 80])
    assert study.levels == [10, 20, 40, 80]
    assert study.ratios == pytest.approx([0.25, 0.25])


def test_report_rejects_negative_entries():
    with pytest.raises(ValidationError):
        ResidualReport(max_weak_residual=-1.0, n_test_fields=3)
    with pytest.raises(ValidationError):
        ResidualReport(max_weak_residual=float("nan"), n_test_fields=3)
