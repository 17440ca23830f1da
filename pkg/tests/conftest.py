from __future__ import annotations

import numpy as np
import pytest

from logdens.estimator import Sample


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fixture50():
    """Fixed 50-point sample on [0, inf) used by the structural equivalence checks."""
    r = np.random.default_rng(20240601)
    return Sample(r.exponential(1.0, 50))
