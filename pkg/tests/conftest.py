import numpy as np
import pytest

from gencount.rngstreams import substream


@pytest.fixture
def rng() -> np.random.Generator:
    return substream(20240817, 0)


def assert_within_se(estimate: float, truth: float, se: float, n_se: float = 3.0):
    __tracebackhide__ = True
    assert se >= 0.0
    assert abs(estimate - truth) < n_se * max(se, 1e-300), (
        f"estimate {estimate} vs {truth}: off by "
        f"{abs(estimate - truth) / max(se, 1e-300):.2f} standard errors")
