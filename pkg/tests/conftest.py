import random

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from k3lat.exactlinalg import Matrix

settings.register_profile(
    "exact", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("exact")


@pytest.fixture
def rng():
    return random.Random(20261016)


def int_matrices(min_size=1, max_size=6, lo=-9, hi=9, square=False):
    """Strategy for small integer matrices."""
    dims = st.tuples(st.integers(min_size, max_size), st.integers(min_size, max_size))
    if square:
        dims = st.integers(min_size, max_size).map(lambda n: (n, n))

    @st.composite
    def build(draw):
        m, n = draw(dims)
        rows = draw(st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n), min_size=m, max_size=m))
        return Matrix(rows, ncols=n)

    return build()


def nonsingular_int_matrices(size, lo=-6, hi=6):
    return int_matrices(size, size, lo, hi, square=True).filter(lambda A: A.det() != 0)
