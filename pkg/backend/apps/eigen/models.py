from typing import Optional

from pydantic import BaseModel, ConfigDict

from apps.grid.models import Field


class EigenPair(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lambda1: float
    e1: Field  # nonnegative, discrete L2-normalized
    residual: float
    relative_residual: float
    iterations: int
    min_interior: float
    lambda2_estimate: Optional[float] = None

    def summary(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "residual": self.residual,
            "relative_residual": self.relative_residual,
            "iterations": self.iterations,
            "min_interior": self.min_interior,
            "lambda2_estimate": self.lambda2_estimate,
        }
