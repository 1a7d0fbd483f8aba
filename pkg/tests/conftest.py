import numpy as np
import pytest

from affinetoda.chevalley import build_chevalley, build_principal_sl2, coxeter_element
from affinetoda.rootdata import LieType, build_root_system

_ALG_CACHE = {}


def get_algebra(name: str):
    """Session cache of (root system, algebra, sl2, coxeter) per type."""
    if name not in _ALG_CACHE:
        rs = build_root_system(LieType.parse(name))
        alg = build_chevalley(rs)
        sl2 = build_principal_sl2(alg)
        cox = coxeter_element(alg, sl2)
        _ALG_CACHE[name] = (rs, alg, sl2, cox)
    return _ALG_CACHE[name]


@pytest.fixture(scope="session")
def algebra():
    return get_algebra


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
