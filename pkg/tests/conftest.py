import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def within_se(value, expected, se, k=3.0):
    """``|value - expected| <= k * se``, with a tiny floor for exact zero errors."""
    return abs(value - expected) <= k * se + 1e-14 * max(1.0, abs(expected))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
