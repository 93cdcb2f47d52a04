import numpy as np
import pytest

from apps.eigen.main import principal_eigenpair
from apps.grid.main import build_domain
from apps.operator.main import assemble, local_only


@pytest.fixture(scope="session")
def interval():
    return build_domain(1, [(-1.0, 1.0)], [63])


@pytest.fixture(scope="session")
def square():
    return build_domain(2, [(0.0, 1.0), (0.0, 1.0)], [11, 11])


@pytest.fixture(scope="session")
def op_1d(interval):
    return assemble(interval, 0.5)


@pytest.fixture(scope="session")
def op_127():
    return assemble(build_domain(1, [(-1.0, 1.0)], [127]), 0.5)


@pytest.fixture(scope="session")
def op_2d(square):
    return assemble(square, 0.5)


@pytest.fixture(scope="session")
def local_op_1d(op_1d):
    return local_only(op_1d)


@pytest.fixture(scope="session")
def eig_1d(op_1d):
    return principal_eigenpair(op_1d)


@pytest.fixture(scope="session")
def eig_127(op_127):
    return principal_eigenpair(op_127)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
