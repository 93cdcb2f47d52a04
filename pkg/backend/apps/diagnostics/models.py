from typing import List

from pydantic import BaseModel, model_validator


class ResidualReport(BaseModel):
    max_weak_residual: float
    n_test_fields: int
    refinement_ratios: List[float] = []
    symmetry_defect: float = 0.0

    @model_validator(mode="after")
    def check_finite(self):
        values = [self.max_weak_residual, self.symmetry_defect, *self.refinement_ratios]
        if any(not (v >= 0.0 and v < float("inf")) for v in values):
            raise ValueError(f"residual report entries must be finite and >= 0: {values}")
        return self


class RefinementStudy(BaseModel):
    levels: List[int]
    values: List[float]
    # |v[k+2] - v[k+1]| / |v[k+1] - v[k]|, < 1 when the sequence is Cauchy
    ratios: List[float]


class GradientCheck(BaseModel):
    eps: float
    n_pairs: int
    max_error: float  # worst |<grad, d> - central difference| / (1 + |energy|)
