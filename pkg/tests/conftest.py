import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from msrocket.kernels import Kernel  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_kernel(rng, length=9, scale=1, use_high_freq=False, bias=None):
    """Handmade kernel with centered weights for targeted tests."""
    w = rng.standard_normal(length)
    w -= w.mean()
    if bias is None:
        bias = float(rng.uniform(-1, 1))
    return Kernel(length=length, weights=w, bias=bias, scale=scale,
                  use_high_freq=use_high_freq)
