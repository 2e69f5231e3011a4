import numpy as np
import pytest

from wgqed.modes import FiberSpec
from wgqed.pipeline import fiber_model


@pytest.fixture(scope="session")
def model():
    return fiber_model(FiberSpec())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
