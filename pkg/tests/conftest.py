import pytest

from bnlab.constants import universal_integrals
from bnlab.spectrum import compute_eigenpair


@pytest.fixture(scope="session")
def pair3():
    return compute_eigenpair(3)


@pytest.fixture(scope="session")
def pair4():
    return compute_eigenpair(4)


@pytest.fixture(scope="session")
def pair5():
    return compute_eigenpair(5)


@pytest.fixture(scope="session")
def uni4():
    return universal_integrals(4)


@pytest.fixture(scope="session")
def uni5():
    return universal_integrals(5)
