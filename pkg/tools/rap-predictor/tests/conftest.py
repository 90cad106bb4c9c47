import os
import sys

import numpy as np
import pytest

TOOL_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
TEST_DATA_DIR = os.path.join(TOOL_DIR, "test-data")

if TOOL_DIR not in sys.path:
    sys.path.insert(0, TOOL_DIR)

from seqgen import generate_for_ratio  # noqa: E402
from sequences import NormalizationMode  # noqa: E402


@pytest.fixture
def test_data_dir():
    return TEST_DATA_DIR


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def generated():
    """Factory for seeded generated sequences: generated(ratio, seq_len=..., seed=..., norm=...)."""

    def _make(ratio, seq_len=4096, seed=7, norm=NormalizationMode.MEAN_MAGNITUDE):
        seq, _ = generate_for_ratio(ratio, seq_len, norm, seed)
        return seq

    return _make

