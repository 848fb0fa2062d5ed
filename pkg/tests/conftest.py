import numpy as np
import pytest


class CountingRNG:
    """Wraps a generator and counts the uniforms drawn through ``random``."""

    def __init__(self, rng):
        self.rng = rng
        self.calls = 0

    def random(self):
        self.calls += 1
        return self.rng.random()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
