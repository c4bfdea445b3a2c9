import numpy as np
import pytest

try:
    import torch
    torch.set_num_threads(2)
except ImportError:
    pass


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
