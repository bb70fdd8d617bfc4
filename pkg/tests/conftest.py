import random
from pathlib import Path

import pytest

from cakefair.generators import random_valuations

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def corpus(seed, count, n, **kwargs):
    """Deterministic list of `count` n-player valuation profiles."""
    rng = random.Random(seed)
    return [random_valuations(rng, n, **kwargs) for _ in range(count)]
