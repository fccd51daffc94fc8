import numpy as np
from hypothesis import strategies as st

from simplexbundle import make_distribution


@st.composite
def distributions(draw, d=None, min_support=1, max_d=6):
    """Random distributions with a random (possibly defective) support."""
    d = d or draw(st.integers(2, max_d))
    mask = draw(st.lists(st.booleans(), min_size=d, max_size=d))
    if sum(mask) < min_support:
        mask = [True] * min_support + [False] * (d - min_support)
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=d, max_size=d))
    w = np.where(mask, raw, 0.0)
    return make_distribution(d, w / w.sum())


def contrasts(d):
    return st.lists(st.floats(-5, 5), min_size=d, max_size=d).map(np.array)
