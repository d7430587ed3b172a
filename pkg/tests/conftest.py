import numpy as np
import pytest
from hypothesis import settings

from ffavg.field import make_field
from ffavg.grid import GridFunction

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

SMALL_GRIDS = [(3, 1), (5, 1), (3, 2), (5, 2), (7, 2), (3, 3), (5, 3)]


def random_function(q, d, seed, complex_=True):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal((q,) * d)
    if complex_:
        vals = vals + 1j * rng.standard_normal((q,) * d)
    return GridFunction(make_field(q), d, vals)


@pytest.fixture
def ctx3():
    return make_field(3)


@pytest.fixture
def ctx5():
    return make_field(5)
