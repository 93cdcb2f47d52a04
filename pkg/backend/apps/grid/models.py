from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from constants import ERROR_MESSAGES


####################
# Domain
####################


class Domain(BaseModel):
    """
    Uniform tensor grid on an interval (dim=1) or rectangle (dim=2).
    Only interior nodes a_i + k*h_i, k = 1..n_i, carry unknowns; every field
    is zero on the complement of the domain.
    """

    model_config = ConfigDict(frozen=True)

    dim: int
    extent: Tuple[Tuple[float, float], ...]
    n_interior: Tuple[int, ...]

    @model_validator(mode="after")
    def check_axes(self):
        if self.dim not in (1, 2):
            raise ValueError(ERROR_MESSAGES.INVALID_DIM(self.dim))
        if len(self.extent) != self.dim or len(self.n_interior) != self.dim:
            raise ValueError(
                ERROR_MESSAGES.SHAPE_MISMATCH("need one interval and one count per axis")
            )
        for axis, ((a, b), n) in enumerate(zip(self.extent, self.n_interior)):
            if not b > a:
                raise ValueError(ERROR_MESSAGES.DEGENERATE_INTERVAL(axis))
            if n < 3:
                raise ValueError(ERROR_MESSAGES.TOO_FEW_NODES(axis))
        return self

    @property
    def h(self) -> Tuple[float, ...]:
        return tuple((b - a) / (n + 1) for (a, b), n in zip(self.extent, self.n_interior))

    @property
    def size(self) -> int:
        return int(np.prod(self.n_interior))

    @property
    def cell_measure(self) -> float:
        return float(np.prod(self.h))

    @property
    def measure(self) -> float:
        return float(np.prod([b - a for a, b in self.extent]))

    def axis_nodes(self, axis: int) -> np.ndarray:
        (a, _), n, h = self.extent[axis], self.n_interior[axis], self.h[axis]
        return a + h * np.arange(1, n + 1)


####################
# Field
####################


class Field(BaseModel):
    """Grid function on the interior nodes, lexicographic order (axis 0 slowest)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    domain: Domain

    @field_validator("values", mode="before")
    @classmethod
    def as_float_vector(cls, v):
        arr = np.array(v, dtype=float).ravel()
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_length(self):
        if self.values.shape[0] != self.domain.size:
            raise ValueError(
                ERROR_MESSAGES.SHAPE_MISMATCH(
                    f"{self.values.shape[0]} values for {self.domain.size} nodes"
                )
            )
        return self

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(values=values, domain=self.domain)

    def __add__(self, other: "Field") -> "Field":
        return self.with_values(self.values + _values_on(self, other))

    def __sub__(self, other: "Field") -> "Field":
        return self.with_values(self.values - _values_on(self, other))

    def __mul__(self, c: float) -> "Field":
        return self.with_values(float(c) * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return self.with_values(-self.values)

    def positive_part(self) -> "Field":
        return self.with_values(np.maximum(self.values, 0.0))

    @property
    def grid_values(self) -> np.ndarray:
        return self.values.reshape(self.domain.n_interior)


def _values_on(f: Field, g: Field) -> np.ndarray:
    if f.domain != g.domain:
        from utils.errors import DomainMismatch

        raise DomainMismatch(ERROR_MESSAGES.DOMAIN_MISMATCH)
    return g.values


class Norms(BaseModel):
    l2: float
    linf: float
    h1_semi: float
