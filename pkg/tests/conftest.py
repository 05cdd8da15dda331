import pytest

from trustmesh.groups import get_backend
from trustmesh.rng import SeededRng


@pytest.fixture(scope="session")
def toy():
    return get_backend("toy")


@pytest.fixture(scope="session")
def ed25519():
    return get_backend("ed25519")


@pytest.fixture(params=["toy", "ed25519"])
def backend(request):
    return get_backend(request.param)


@pytest.fixture
def rng():
    return SeededRng(20240901)
