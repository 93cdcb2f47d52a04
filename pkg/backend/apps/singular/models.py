from typing import Callable, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PydanticField, model_validator

from apps.grid.models import Field
from constants import ERROR_MESSAGES


####################
# h functions
####################


class HFunction:
    """Nondecreasing h with h(0) > 0, vectorized, with its derivative."""

    def __init__(self, name: str, fn: Callable, derivative: Optional[Callable] = None):
        self.name = name
        self.fn = fn
        self._derivative = derivative

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.fn(np.asarray(t, dtype=float))

    def derivative(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self._derivative is not None:
            return self._derivative(t)
        step = 1e-6 * np.maximum(1.0, np.abs(t))
        return (self.fn(t + step) - self.fn(np.maximum(t - step, 0.0))) / (
            t + step - np.maximum(t - step, 0.0)
        )

    def check_h1(self, upper: float = 1e3, samples: int = 2001) -> Optional[str]:
        """Sampled check of continuity-free parts of (h1): finite, nondecreasing, h(0) > 0."""
        t = np.concatenate([[0.0], np.geomspace(1e-12, upper, samples)])
        values = self(t)
        if not np.all(np.isfinite(values)):
            return "h is not finite on [0, inf)"
        if values[0] <= 0:
            return f"h(0) = {values[0]} is not positive"
        if np.any(np.diff(values) < -1e-12 * np.abs(values[1:])):
            return "h is not nondecreasing"
        return None


H_FUNCTIONS = {
    "one": HFunction("one", lambda t: np.ones_like(t), lambda t: np.zeros_like(t)),
    "one-plus-t": HFunction("one-plus-t", lambda t: 1.0 + t, lambda t: np.ones_like(t)),
    "one-plus-log": HFunction(
        "one-plus-log",
        lambda t: 1.0 + np.log1p(np.maximum(t, 0.0)),
        lambda t: 1.0 / (1.0 + np.maximum(t, 0.0)),
    ),
}


####################
# ProblemSpec
####################


class ProblemSpec(BaseModel):
    """
    Parameters of -Lu + (-L)^s u = g(x, u). kind "g1": g = lambda h(u) u^-gamma;
    kind "g2": g = lambda u^-gamma + u^q.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    kind: Literal["g1", "g2"]
    s: float
    gamma: float
    lam: float = PydanticField(alias="lambda")
    q: Optional[float] = None
    r: Optional[float] = None
    h: Optional[str] = None

    @model_validator(mode="after")
    def check_ranges(self):
        errors = []
        if not (0.0 < self.s < 1.0):
            errors.append(ERROR_MESSAGES.INVALID_S(self.s))
        if not (0.0 < self.gamma < 1.0):
            errors.append(ERROR_MESSAGES.INVALID_GAMMA(self.gamma))
        if not self.lam > 0.0:
            errors.append(ERROR_MESSAGES.INVALID_LAMBDA(self.lam))
        if self.kind == "g2":
            if self.q is None or not self.q > 1.0:
                errors.append(ERROR_MESSAGES.INVALID_Q(f"need q > 1, got {self.q}"))
            elif not self.q + 1.0 < self.exponent_l:
                errors.append(
                    ERROR_MESSAGES.INVALID_Q(f"need q + 1 < l = {self.exponent_l}")
                )
        if self.kind == "g1":
            if self.h not in H_FUNCTIONS:
                errors.append(ERROR_MESSAGES.UNKNOWN_H(self.h))
            else:
                problem = H_FUNCTIONS[self.h].check_h1()
                if problem:
                    errors.append(ERROR_MESSAGES.INVALID_H(problem))
        if errors:
            raise ValueError("; ".join(errors))
        return self

    @property
    def exponent_l(self) -> float:
        # dimensions 1 and 2: l = r, user chosen with q < r - 1
        if self.r is not None:
            return self.r
        return (self.q or 1.0) + 2.0

    @property
    def h_fn(self) -> HFunction:
        return H_FUNCTIONS[self.h or "one"]


####################
# Reports
####################


class ContinuationStep(BaseModel):
    eps: float
    linf: float
    h1_change: float
    newton_iterations: int
    residual: float


class ContinuationTrace(BaseModel):
    steps: List[ContinuationStep] = []
    monotone_defect: float = 0.0


class NewtonResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    u: Field
    iterations: int
    residual: float
    history: List[float]


class SandwichCertificate(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sub: Field
    sup: Field
    a_lambda: float
    b_lambda: float
    solution: Field
    residual: float
    iterations: int
    min_interior: float
    linf: float
    j_energy: float
    shift_retries: int

    def summary(self) -> dict:
        return {
            "a_lambda": self.a_lambda,
            "b_lambda": self.b_lambda,
            "residual": self.residual,
            "iterations": self.iterations,
            "min_interior": self.min_interior,
            "linf": self.linf,
            "j_energy": self.j_energy,
            "shift_retries": self.shift_retries,
        }
