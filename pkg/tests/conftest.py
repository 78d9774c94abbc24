import numpy as np
import pytest

from curvlab.utilities.lie_core import build_so3, build_so4
from curvlab.utilities.misc import SeededRNG


@pytest.fixture(autouse=True)
def serial(monkeypatch):
    #Every test runs serially unless it sets CURVLAB_THREADS itself
    monkeypatch.delenv('CURVLAB_THREADS', raising=False)


@pytest.fixture
def so3():
    return build_so3()


@pytest.fixture
def so4():
    return build_so4()


@pytest.fixture
def rng():
    return SeededRNG(1234)


@pytest.fixture(scope='session')
def catalog():
    from curvlab.scenarios.Catalog.catalog import catalog_instances
    return catalog_instances(0, 1)


def embed(u=None, v=None):
    return np.concatenate([np.zeros(3) if u is None else np.asarray(u, dtype=float),
                           np.zeros(3) if v is None else np.asarray(v, dtype=float)])
