import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from gmtlab.dyadic_core import DyadicSet

settings.register_profile("gmtlab", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("gmtlab")


def random_set(rng, dim, level, n, ambient="unit"):
    base = (1 << level) if ambient == "shifted" else 0
    cells = rng.integers(0, 1 << level, size=(n, dim)) + base
    return DyadicSet.from_array(dim, level, cells, ambient)


@st.composite
def dyadic_sets(draw, dim=None, max_level=6, min_size=1, max_size=40):
    d = draw(st.sampled_from([1, 2])) if dim is None else dim
    level = draw(st.integers(0, max_level))
    n = 1 << (level * d)
    cell = st.tuples(*[st.integers(0, (1 << level) - 1)] * d)
    cells = draw(st.lists(cell, min_size=min(min_size, n), max_size=min(max_size, n), unique=True))
    return DyadicSet.from_cells(d, level, cells)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
