import pytest

from curvedheat import make_euclidean, make_gamma_model, make_hyperbolic
from curvedheat.operators import RadialGrid


@pytest.fixture(scope="session")
def euclid3():
    return make_euclidean(3)


@pytest.fixture(scope="session")
def hyp3():
    return make_hyperbolic(3, 1.0)


@pytest.fixture(scope="session")
def gamma2():
    # radial curvature -(1 + r^2)
    return make_gamma_model(3, 1.0, 2.0, 30.0, 1e-3)


@pytest.fixture(scope="session")
def gamma3():
    # radial curvature -(1 + r^3)
    return make_gamma_model(3, 1.0, 3.0, 30.0, 1e-3)


@pytest.fixture(scope="session")
def grid30():
    return RadialGrid(30.0, 900)
