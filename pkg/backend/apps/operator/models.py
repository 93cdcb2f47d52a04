import numpy as np
from pydantic import BaseModel, ConfigDict

from apps.grid.models import Domain


class MixedOperator(BaseModel):
    """
    Dense assembled stiffness of -Laplace + (-Laplace)^s with exterior-zero data.
    `a_frac` already contains `exterior_diag` on its diagonal.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    domain: Domain
    s: float
    a_loc: np.ndarray
    a_frac: np.ndarray
    exterior_diag: np.ndarray
    near_field_band: int

    @property
    def matrix(self) -> np.ndarray:
        return self.a_loc + self.a_frac

    @property
    def mass(self) -> float:
        """Lumped mass: M = cell_measure * I."""
        return self.domain.cell_measure


class OperatorCheck(BaseModel):
    symmetry_defect: float
    max_offdiag: float
    min_diag: float
    min_eigenvalue: float | None = None

    @property
    def is_m_matrix(self) -> bool:
        return self.max_offdiag <= 0.0 and self.min_diag > 0.0
