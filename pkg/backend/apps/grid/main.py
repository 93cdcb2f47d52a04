import logging
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from apps.grid.models import Domain, Field, Norms
from apps.operator.stencil import local_stiffness
from config import SRC_LOG_LEVELS
from constants import ERROR_MESSAGES, STAGES
from utils.errors import ValidationFailure

log = logging.getLogger(__name__)
log.setLevel(SRC_LOG_LEVELS["GRID"])


############################
# Construction
############################


def build_domain(
    dim: int, extent: Sequence[Sequence[float]], n_interior: Sequence[int]
) -> Domain:
    try:
        domain = Domain(
            dim=dim,
            extent=tuple(tuple(float(v) for v in interval) for interval in extent),
            n_interior=tuple(int(n) for n in n_interior),
        )
    except ValidationError as e:
        messages = "; ".join(err["msg"] for err in e.errors())
        raise ValidationFailure(messages, stage=STAGES.GRID) from e

    log.debug(f"domain {domain.extent} with {domain.n_interior} interior nodes, h={domain.h}")
    return domain


def node_coordinates(domain: Domain) -> np.ndarray:
    """(size, dim) array of interior node coordinates in lexicographic order."""
    axes = [domain.axis_nodes(axis) for axis in range(domain.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def zero_field(domain: Domain) -> Field:
    return Field(values=np.zeros(domain.size), domain=domain)


def sample_field(domain: Domain, fn) -> Field:
    """Field from a function of the coordinate columns, fn(x) or fn(x, y)."""
    coords = node_coordinates(domain)
    return Field(values=fn(*coords.T), domain=domain)


############################
# Norms
############################


def l2_norm(f: Field) -> float:
    return float(np.sqrt(np.sum(f.values**2) * f.domain.cell_measure))


def h1_semi(f: Field) -> float:
    quad = float(f.values @ (local_stiffness(f.domain) @ f.values))
    return float(np.sqrt(max(quad, 0.0)))


def norms(f: Field) -> Norms:
    return Norms(
        l2=l2_norm(f),
        linf=float(np.max(np.abs(f.values))) if f.values.size else 0.0,
        h1_semi=h1_semi(f),
    )


############################
# Symmetry
############################


def is_symmetric_domain(domain: Domain) -> bool:
    return all(np.isclose(a, -b) for a, b in domain.extent)


def reflect(f: Field) -> Field:
    """Index reversal on every axis (x -> -x on a symmetric domain)."""
    grid = f.grid_values[tuple(slice(None, None, -1) for _ in range(f.domain.dim))]
    return f.with_values(grid.ravel())


############################
# CSV
############################

AXIS_COLUMNS = ("x", "y")


def field_frame(f: Field) -> pd.DataFrame:
    coords = node_coordinates(f.domain)
    frame = pd.DataFrame(coords, columns=list(AXIS_COLUMNS[: f.domain.dim]))
    frame["value"] = f.values
    return frame


def write_field_csv(f: Field, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    field_frame(f).to_csv(path, index=False, float_format="%.17g")
    return path


def read_field_csv(path: Path, domain: Domain) -> Field:
    frame = pd.read_csv(path, float_precision="round_trip")
    expected = node_coordinates(domain)
    columns = list(AXIS_COLUMNS[: domain.dim])
    if frame.shape[0] != domain.size or not np.allclose(
        frame[columns].to_numpy(), expected, rtol=0.0, atol=1e-12
    ):
        raise ValidationFailure(
            ERROR_MESSAGES.SHAPE_MISMATCH(f"{path} does not match the domain nodes"),
            stage=STAGES.GRID,
        )
    return Field(values=frame["value"].to_numpy(), domain=domain)
