"""Shared test configuration: a bounded hypothesis profile and one rng."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "qfidyn",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("qfidyn")


@pytest.fixture
def rng():
    # One fixed seed for every test that draws its own instances; property
    # tests that need many draws go through hypothesis instead.
    return np.random.default_rng(20240811)
