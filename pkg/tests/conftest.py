import pytest

from malta.activity import CommitFilterRules
from malta.model import MaltaConfig

from synth import default_windows


@pytest.fixture
def cfg():
    return MaltaConfig()


@pytest.fixture
def windows():
    # baseline [2021-12-30, 2023-12-30) = 730 days, eval ends 2025-06-30 = 548 days
    return default_windows()


@pytest.fixture
def rules():
    return CommitFilterRules()
