import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from lrfs.distributions import LmbParams
from lrfs.state_model import Label

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

labels = st.builds(Label, st.integers(0, 4), st.integers(1, 4))


def random_pmf(rng, n, sparse=False):
    w = rng.random(n)
    if sparse:
        w[rng.random(n) < 0.5] = 0.0
        if not w.any():
            w[rng.integers(n)] = 1.0
    return w / w.sum()


def random_lmb(rng, num_labels, num_cells, sparse=False):
    labs = [Label(int(rng.integers(0, 3)), j + 1) for j in range(num_labels)]
    labs = list(dict.fromkeys(labs))
    q = {lab: float(rng.random()) for lab in labs}
    s = {lab: random_pmf(rng, num_cells, sparse) for lab in labs}
    return LmbParams(q, s)


@st.composite
def lmb_params(draw, max_labels=3, max_cells=6):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(0, max_labels))
    g = draw(st.integers(1, max_cells))
    return random_lmb(np.random.default_rng(seed), n, g)
