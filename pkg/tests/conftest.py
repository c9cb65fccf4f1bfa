import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def small_er_corpus():
    """Seeded small random graphs shared by the exactness tests."""
    from matchboost.corpus import gen_er

    out = []
    for seed in range(60):
        n = 4 + seed % 11
        p = 0.1 + (seed % 7) * 0.1
        out.append(gen_er(n, p, seed=seed))
    return out
