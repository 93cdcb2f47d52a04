import numpy as np
import pytest
from scipy import integrate

from apps.grid.main import build_domain, node_coordinates, sample_field
from apps.grid.models import Field
from apps.operator.main import (
    apply_mixed,
    assemble,
    bilinear,
    check_m_matrix,
    dump_coo,
    embedding_ratio,
    estimate_embedding_constant,
    fractional_only,
    gagliardo_energy,
    local_only,
)
from utils.errors import DomainMismatch, ValidationFailure


def _bump(x):
    return np.where(np.abs(x) < 1.0, (1.0 - x**2) ** 2, 0.0)


def test_local_stencil_row():
    op = assemble(build_domain(1, [(-1.0, 1.0)], [3]), 0.5)
    assert op.a_loc[1] == pytest.approx([-2.0, 4.0, -2.0])


def test_local_only_is_scaled_second_difference(op_1d):
    (h,), n = op_1d.domain.h, op_1d.domain.size
    fd = (2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)) / h**2
    local = local_only(op_1d)
    assert np.array_equal(local.a_frac, np.zeros_like(op_1d.a_frac))
    assert local.matrix == pytest.approx(h * fd, abs=1e-12)
    assert fractional_only(op_1d).matrix == pytest.approx(op_1d.a_frac)


@pytest.mark.parametrize("s", [0.0, 1.0, -0.2, 1.5])
def test_invalid_s(interval, s):
    with pytest.raises(ValidationFailure):
        assemble(interval, s)


@pytest.mark.parametrize("fixture", ["op_1d", "op_2d"])
def test_m_matrix(fixture, request):
    op = request.getfixturevalue(fixture)
    check = check_m_matrix(op, with_spectrum=True)
    assert check.symmetry_defect <= 1e-12
    assert check.is_m_matrix
    assert check.min_eigenvalue > 0.0


def test_apply_agrees_with_bilinear(op_2d, rng):
    f = Field(values=rng.standard_normal(op_2d.domain.size), domain=op_2d.domain)
    g = Field(values=rng.standard_normal(op_2d.domain.size), domain=op_2d.domain)
    assert bilinear(op_2d, f, g) == pytest.approx(f.values @ apply_mixed(op_2d, g).values, rel=1e-12)
    assert bilinear(op_2d, f, g) == pytest.approx(bilinear(op_2d, g, f), rel=1e-12)


def test_gagliardo_quadratic_scaling(op_1d, rng):
    f = Field(values=rng.standard_normal(op_1d.domain.size), domain=op_1d.domain)
    assert gagliardo_energy(op_1d, 3.0 * f) == pytest.approx(9.0 * gagliardo_energy(op_1d, f))
    assert gagliardo_energy(op_1d, f) > 0.0


def test_foreign_field_rejected(op_1d):
    other = build_domain(1, [(0.0, 1.0)], [63])
    with pytest.raises(DomainMismatch):
        apply_mixed(op_1d, Field(values=np.zeros(63), domain=other))


def test_fractional_part_on_barrier_profile():
    # 2 * P.V. int (f(x) - f(y)) |x-y|^{-2} dy = 2 pi for f = sqrt(1 - x^2) on (-1, 1)
    op = assemble(build_domain(1, [(-1.0, 1.0)], [255]), 0.5)
    f = sample_field(op.domain, lambda x: np.sqrt(1.0 - x**2))
    value = op.a_frac @ f.values / op.mass
    for index in (63, 127, 191):
        assert value[index] == pytest.approx(2.0 * np.pi, rel=2e-2)


def _pv_oracle(x, s):
    end = 1.0 + abs(x)

    def integrand(t):
        return (2.0 * _bump(x) - _bump(x + t) - _bump(x - t)) * t ** (-1.0 - 2.0 * s)

    inner, _ = integrate.quad(integrand, 0.0, end, points=[1.0 - abs(x)], limit=400)
    return 2.0 * (inner + 2.0 * _bump(x) * end ** (-2.0 * s) / (2.0 * s))


def test_fractional_part_against_quadrature():
    s = 0.3
    op = assemble(build_domain(1, [(-1.0, 1.0)], [255]), s)
    f = sample_field(op.domain, _bump)
    value = op.a_frac @ f.values / op.mass
    x = node_coordinates(op.domain)[:, 0]
    for index in (63, 127, 191):
        assert value[index] == pytest.approx(_pv_oracle(x[index], s), rel=2e-2)


def test_gagliardo_energy_converges():
    energies = []
    for n in (49, 99, 199):
        op = assemble(build_domain(1, [(-1.0, 1.0)], [n]), 0.5)
        energies.append(gagliardo_energy(op, sample_field(op.domain, _bump)))
    assert abs(energies[2] - energies[1]) < abs(energies[1] - energies[0])


def test_dump_local_part(tmp_path, op_1d):
    path = dump_coo(op_1d, tmp_path / "a_loc.txt", which="local")
    lines = path.read_text().splitlines()
    assert len(lines) == 3 * op_1d.domain.size - 2
    row, col, value = lines[0].split()
    assert (int(row), int(col)) == (0, 0)
    assert float(value) == pytest.approx(op_1d.a_loc[0, 0], rel=1e-15)


def test_embedding_constant(op_1d):
    constant = estimate_embedding_constant(op_1d, n_fields=20, seed=3)
    assert constant == estimate_embedding_constant(op_1d, n_fields=20, seed=3)
    bump = sample_field(op_1d.domain, _bump)
    assert constant > 0.0
    assert embedding_ratio(op_1d, bump) > 0.0


def test_embedding_constant_stable_under_refinement():
    constants = [
        estimate_embedding_constant(
            assemble(build_domain(1, [(-1.0, 1.0)], [n]), 0.5), n_fields=10, seed=0
        )
        for n in (50, 100, 200)
    ]
    assert max(constants) / min(constants) < 2.0
