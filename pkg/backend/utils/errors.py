from enum import Enum
from typing import Any, Optional

import numpy as np

from constants import ERROR_MESSAGES, STAGES


def _plain(value: Any) -> Any:
    """Converts numpy payloads into JSON-friendly python values."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "model_dump"):
        return value.model_dump(mode="json")
    return value


class SolverError(Exception):
    """
    Typed pipeline failure. `stage` names the module that failed, `detail` is
    the human readable message and `data` carries whatever the caller needs to
    inspect the failure (last iterate, residual, trace).
    """

    default_stage = STAGES.CLI

    def __init__(
        self,
        detail: Any = ERROR_MESSAGES.DEFAULT(),
        stage: Optional[STAGES] = None,
        data: Optional[dict] = None,
    ):
        self.detail = detail.value if isinstance(detail, Enum) else str(detail)
        self.stage = stage or self.default_stage
        self.data = data or {}
        super().__init__(self.detail)

    def to_report(self) -> dict:
        stage = self.stage.value if isinstance(self.stage, Enum) else str(self.stage)
        return {"stage": stage, "message": self.detail, "data": _plain(self.data)}


class ValidationFailure(SolverError, ValueError):
    default_stage = STAGES.CONFIG


class DomainMismatch(ValidationFailure):
    default_stage = STAGES.GRID


class ConvergenceFailure(SolverError):
    """Carries the last iterate and residual under data['last'] / data['residual']."""

    @property
    def last(self):
        return self.data.get("last")

    @property
    def residual(self):
        return self.data.get("residual")


class PositivityFailure(SolverError):
    default_stage = STAGES.SINGULAR


class OrderingFailure(SolverError):
    default_stage = STAGES.SINGULAR


class GeometryFailure(SolverError):
    default_stage = STAGES.MULTIPLICITY


class BarrierFailure(SolverError):
    default_stage = STAGES.MULTIPLICITY


class BranchCollapse(SolverError):
    default_stage = STAGES.MULTIPLICITY


class SizeGuardExceeded(SolverError):
    default_stage = STAGES.DIAGNOSTICS
