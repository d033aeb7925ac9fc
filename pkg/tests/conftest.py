import os

# Must be set before cointoss.settings is imported: selects the in-memory archive.
os.environ["COINTOSS_ENV"] = "test"

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from cointoss.config import RunConfig  # noqa: E402
from cointoss.measure import BlockSchedule, Constant, Explicit  # noqa: E402
from cointoss.spectrum import TauCurve  # noqa: E402


@pytest.fixture
def constant():
    return Constant(p=0.3)


@pytest.fixture
def alternating():
    """Blocks of p = 0.3 and p~ = 0.4 with lengths ceil(2^(k^2)); block ends
    2, 18, 530, 66066."""
    return BlockSchedule(sequences=(Constant(p=0.3), Constant(p=0.4)))


@pytest.fixture
def alternating_depths():
    return [2, 18, 530, 66066, 100000]


@pytest.fixture
def two_curve():
    return TauCurve.of([(0.5, 0.2), (0.5, 0.4)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def random_explicit(rng):
    def make(length, low=0.05, high=0.95):
        return Explicit(weights=tuple(rng.uniform(low, high, length).tolist()))
    return make


@pytest.fixture
def config():
    return RunConfig()
