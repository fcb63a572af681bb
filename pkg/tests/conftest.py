import numpy as np
import pytest

SEEDS = [0, 1, 2]


@pytest.fixture(params=SEEDS, ids=lambda s: f"seed{s}")
def rng(request):
    return np.random.default_rng(request.param)
