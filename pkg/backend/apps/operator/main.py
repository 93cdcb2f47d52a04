import logging
from pathlib import Path

import numpy as np
import scipy.linalg as la

from apps.grid.main import h1_semi, node_coordinates, sample_field
from apps.grid.models import Domain, Field
from apps.operator import quadrature
from apps.operator.models import MixedOperator, OperatorCheck
from apps.operator.stencil import local_stiffness
from config import DENSE_ORACLE_LIMIT, NEAR_FIELD_BAND, SRC_LOG_LEVELS
from constants import ERROR_MESSAGES, STAGES
from utils.errors import DomainMismatch, ValidationFailure
from utils.misc import seeded_rng

log = logging.getLogger(__name__)
log.setLevel(SRC_LOG_LEVELS["OPERATOR"])


############################
# Assembly
############################


def _fractional_1d(domain: Domain, s: float, band: int):
    (n,), (h,) = domain.n_interior, domain.h
    (a, b), = domain.extent

    w = quadrature.cell_weights_1d(n, h, s, band)
    c = quadrature.self_correction_1d(h, s)
    x = domain.axis_nodes(0)
    tail = quadrature.exterior_tail_1d(x, a + 0.5 * h, b - 0.5 * h, s)

    cells = la.toeplitz(w)
    diag = cells.sum(axis=1) + 2.0 * c
    coupling = cells.copy()
    coupling[np.arange(n - 1), np.arange(1, n)] += c
    coupling[np.arange(1, n), np.arange(n - 1)] += c
    return coupling, diag, tail


def _fractional_2d(domain: Domain, s: float, band: int):
    (n0, n1), (h0, h1) = domain.n_interior, domain.h
    (a0, b0), (a1, b1) = domain.extent

    table = quadrature.cell_weights_2d((n0, n1), (h0, h1), s, band)
    c0, c1 = quadrature.self_correction_2d((h0, h1), s)
    coords = node_coordinates(domain)
    box = ((a0 + 0.5 * h0, b0 - 0.5 * h0), (a1 + 0.5 * h1, b1 - 0.5 * h1))
    tail = quadrature.exterior_tail_2d(coords[:, 0], coords[:, 1], box, s)

    index = np.arange(domain.size)
    i0, i1 = index // n1, index % n1
    d0 = np.abs(np.subtract.outer(i0, i0)).astype(np.int32)
    d1 = np.abs(np.subtract.outer(i1, i1)).astype(np.int32)

    cells = table[d0, d1]
    diag = cells.sum(axis=1) + 2.0 * (c0 + c1)
    coupling = cells + c0 * ((d0 == 1) & (d1 == 0)) + c1 * ((d0 == 0) & (d1 == 1))
    return coupling, diag, tail


def assemble(domain: Domain, s: float, near_field_band: int = NEAR_FIELD_BAND) -> MixedOperator:
    if not (0.0 < s < 1.0):
        raise ValidationFailure(ERROR_MESSAGES.INVALID_S(s), stage=STAGES.OPERATOR)

    a_loc = local_stiffness(domain).toarray()

    build = _fractional_1d if domain.dim == 1 else _fractional_2d
    coupling, diag, tail = build(domain, s, near_field_band)

    measure = domain.cell_measure
    a_frac = -measure * coupling
    np.fill_diagonal(a_frac, measure * (diag + tail))
    a_frac = 0.5 * (a_frac + a_frac.T)

    log.info(
        f"assembled mixed operator: dim={domain.dim}, n={domain.n_interior}, s={s}, "
        f"band={near_field_band}"
    )
    return MixedOperator(
        domain=domain,
        s=s,
        a_loc=a_loc,
        a_frac=a_frac,
        exterior_diag=measure * tail,
        near_field_band=near_field_band,
    )


def local_only(op: MixedOperator) -> MixedOperator:
    return op.model_copy(
        update={"a_frac": np.zeros_like(op.a_frac), "exterior_diag": np.zeros(op.domain.size)}
    )


def fractional_only(op: MixedOperator) -> MixedOperator:
    return op.model_copy(update={"a_loc": np.zeros_like(op.a_loc)})


############################
# Forms
############################


def _check_domain(op: MixedOperator, *fields: Field):
    for f in fields:
        if f.domain != op.domain:
            raise DomainMismatch(ERROR_MESSAGES.DOMAIN_MISMATCH, stage=STAGES.OPERATOR)


def apply_mixed(op: MixedOperator, f: Field) -> Field:
    _check_domain(op, f)
    return f.with_values(op.a_loc @ f.values + op.a_frac @ f.values)


def bilinear(op: MixedOperator, f: Field, g: Field) -> float:
    _check_domain(op, f, g)
    return float(f.values @ (op.a_loc @ g.values) + f.values @ (op.a_frac @ g.values))


def gagliardo_energy(op: MixedOperator, f: Field) -> float:
    _check_domain(op, f)
    return float(f.values @ (op.a_frac @ f.values))


def embedding_ratio(op: MixedOperator, f: Field) -> float:
    """gagliardo_energy(f) / h1_semi(f)^2, the constant of the nonlocal-by-local bound."""
    semi = h1_semi(f)
    return gagliardo_energy(op, f) / (semi * semi)


def estimate_embedding_constant(op: MixedOperator, n_fields: int = 100, seed: int = 0) -> float:
    rng = seeded_rng(seed)
    ratios = [
        embedding_ratio(op, Field(values=rng.standard_normal(op.domain.size), domain=op.domain))
        for _ in range(n_fields)
    ]
    # smooth fields as well: random sine modes
    for mode in range(1, 6):
        f = sample_field(
            op.domain,
            lambda *x: np.prod(
                [
                    np.sin(mode * np.pi * (xi - a) / (b - a))
                    for xi, (a, b) in zip(x, op.domain.extent)
                ],
                axis=0,
            ),
        )
        ratios.append(embedding_ratio(op, f))
    constant = float(max(ratios))
    log.info(f"nonlocal/local embedding constant estimate: {constant:.6g}")
    return constant


############################
# Checks and dumps
############################


def check_m_matrix(op: MixedOperator, with_spectrum: bool = False) -> OperatorCheck:
    matrix = op.matrix
    offdiag = matrix - np.diag(np.diag(matrix))
    scale = max(np.abs(op.a_frac).max(), np.abs(op.a_loc).max())
    min_eig = None
    if with_spectrum and op.domain.size <= DENSE_ORACLE_LIMIT:
        min_eig = float(la.eigvalsh(matrix, subset_by_index=[0, 0])[0])
    return OperatorCheck(
        symmetry_defect=float(np.abs(op.a_frac - op.a_frac.T).max() / scale),
        max_offdiag=float(offdiag.max()),
        min_diag=float(np.diag(matrix).min()),
        min_eigenvalue=min_eig,
    )


def dump_coo(op: MixedOperator, path: Path, which: str = "mixed") -> Path:
    matrix = {"mixed": op.matrix, "local": op.a_loc, "fractional": op.a_frac}[which]
    rows, cols = np.nonzero(matrix)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for r, c in zip(rows, cols):
            f.write(f"{r} {c} {matrix[r, c]:.17g}\n")
    return path
