import hypothesis
import numpy as np
import pytest
from hypothesis import strategies as st

from fixedbudget.dist_model import FiniteSupport

hypothesis.settings.register_profile("default", deadline=None, derandomize=True, max_examples=60)
hypothesis.settings.register_profile("thorough", deadline=None, max_examples=500)
hypothesis.settings.load_profile("default")


@st.composite
def finite_supports(draw, max_atoms=8):
    """Distributions on up to ``max_atoms`` well separated points of [0, 1]."""
    n = draw(st.integers(2, max_atoms))
    grid = draw(st.lists(st.integers(0, 1000), min_size=n, max_size=n, unique=True))
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    w = np.array(raw) / sum(raw)
    return FiniteSupport(tuple(g / 1000 for g in sorted(grid)), tuple(w))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
