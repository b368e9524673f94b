import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from graphsan.graph import PrivacyGraph

settings.register_profile(
    "default",
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_graph(
    rng: np.random.Generator,
    n: int,
    p_pub: float = 0.3,
    p_pri: float = 0.2,
) -> PrivacyGraph:
    """Random graph where each pair is public w.p. p_pub, else private w.p. p_pri."""
    pub, pri = [], []
    for u in range(n):
        for v in range(u + 1, n):
            r = rng.random()
            if r < p_pub:
                pub.append((u, v))
            elif r < p_pub + p_pri:
                pri.append((u, v))
    return PrivacyGraph(n, pub_edges=pub, pri_edges=pri)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
