from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from apps.grid.models import Field


class MountainPassParams(BaseModel):
    """
    Certified mountain-pass geometry of the regularized energy: rim radius R
    (in the local H1 seminorm), rim level rho, endpoint scale T on e1 and a
    lower estimate of the lambda threshold below which the geometry holds.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    e1: Field
    R: float
    rho: float
    T: float
    Lambda_est: float
    k: float
    embedding_constant: float  # C in int (v+)^(q+1) <= C theta |v|^(q+1)
    theta: float
    lambda1_local: float
    sup_bound: float  # upper bound of sup_{|v|=R} 1/(1-gamma) int |v|^(1-gamma)
    level_bound: float  # max_t I_0(t T e1), upper bound of the mountain-pass level
    rim_violations: int = 0

    @property
    def endpoint(self) -> Field:
        return self.T * self.e1

    def summary(self) -> dict:
        return self.model_dump(mode="json", exclude={"e1"})


class MountainPassResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    critical_point: Field
    path: np.ndarray
    energies: np.ndarray
    sweeps: int
    gradient_norm: float
    converged: bool


class EpsTraceEntry(BaseModel):
    eps: float
    energy_nu: float
    energy_zeta: float
    residual_nu: float
    residual_zeta: float
    h1_nu: float
    h1_zeta: float
    limit_gap_nu: Optional[float] = None  # |I_eps(nu_eps) - I_0(nu_0)|, filled after the limit
    limit_gap_zeta: Optional[float] = None


class TwoSolutions(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    lam: float
    params: MountainPassParams
    nu: Field
    zeta: Field
    xi: Field
    energy_nu: float
    energy_zeta: float
    eps_trace: List[EpsTraceEntry]
    barrier_min: float
    residual_nu: float
    residual_zeta: float
    distinctness: float  # linf(nu - zeta)
    distinct_enough: bool  # distinctness >= 0.5 linf(zeta)
    theta_observed: float
    theta_bound: float
    nehari_defect_nu: float
    nehari_defect_zeta: float
    ps_monitor_zeta: float
    energy_trace_cauchy: bool
    h1_zeta_max: float  # max of h1_semi(zeta_eps) over the schedule
    uniform_bound: bool  # h1_semi(zeta_eps) non-increasing within 10% over the last 3 points
    min_nu: float
    min_zeta: float

    def summary(self) -> dict:
        data = self.model_dump(
            mode="json", exclude={"nu": True, "zeta": True, "xi": True, "params": {"e1"}}
        )
        data["lambda"] = data.pop("lam")
        return data


class SweepPoint(BaseModel):
    lam: float
    certified: bool
    energy_nu: Optional[float] = None
    energy_zeta: Optional[float] = None
    failure: Optional[dict] = None


class LambdaSweep(BaseModel):
    Lambda_est: float
    empirical_Lambda: Optional[float]
    points: List[SweepPoint]
