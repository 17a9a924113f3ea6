import pytest

from geomomentum.geometry import PhysicalParams
from geomomentum.sphere_ops import build_operator_set


@pytest.fixture(scope="session")
def ops2():
    return build_operator_set(2, 16)


@pytest.fixture(scope="session")
def ops3():
    return build_operator_set(3, 10)


@pytest.fixture(scope="session")
def ops3_small():
    return build_operator_set(3, 8)


@pytest.fixture(scope="session")
def ops2_scaled():
    return build_operator_set(2, 12, PhysicalParams(hbar=0.7, mass=1.9, radius=2.5))


@pytest.fixture(scope="session")
def ops3_scaled():
    return build_operator_set(3, 8, PhysicalParams(hbar=1.3, mass=0.6, radius=0.5))
