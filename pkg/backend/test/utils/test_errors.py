import numpy as np

from constants import ERROR_MESSAGES, STAGES
from utils.errors import (
    ConvergenceFailure,
    GeometryFailure,
    SolverError,
    ValidationFailure,
)


def test_report_is_plain():
    error = ConvergenceFailure(
        ERROR_MESSAGES.NEWTON_NOT_CONVERGED(5),
        stage=STAGES.SINGULAR,
        data={"last": np.arange(3.0), "residual": np.float64(0.5)},
    )
    report = error.to_report()
    assert report == {
        "stage": "singular_solver",
        "message": "Newton iteration did not converge after 5 iterations.",
        "data": {"last": [0.0, 1.0, 2.0], "residual": 0.5},
    }
    assert error.last.tolist() == [0.0, 1.0, 2.0]
    assert error.residual == 0.5


def test_default_stages():
    assert GeometryFailure().stage == STAGES.MULTIPLICITY
    assert ValidationFailure("bad").stage == STAGES.CONFIG
    assert SolverError("x", stage=STAGES.EIGEN).to_report()["stage"] == "eigen_solver"


def test_validation_failure_is_a_value_error():
    assert isinstance(ValidationFailure("bad"), ValueError)


def test_enum_message():
    error = SolverError(ERROR_MESSAGES.DOMAIN_MISMATCH)
    assert error.detail == "Fields/operator live on different domains."
    assert str(error) == error.detail
