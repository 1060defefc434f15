import pytest

from rcmlab.grid import discretize
from rcmlab.kernels import AdjacencyKernel
from rcmlab.diagrams.certify import oz_tau


@pytest.fixture(scope="session")
def gauss2():
    """Unit gaussian kernel on a 16^2 grid of side 8."""
    return discretize(AdjacencyKernel.gaussian(2), 2, 8.0, 16)


@pytest.fixture(scope="session")
def disk2():
    return discretize(AdjacencyKernel.disk(2), 2, 4.0, 16)


@pytest.fixture(scope="session")
def gauss_tau(gauss2):
    lam = 0.6
    return gauss2, oz_tau(gauss2, lam), lam
