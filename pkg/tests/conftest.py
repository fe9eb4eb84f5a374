import pytest

from finclone._accel import numba_available
from finclone.rig import registry

BACKENDS = ["numpy"] + (["numba"] if numba_available() else [])


@pytest.fixture(scope="session")
def rigs():
    return registry()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param
