"""
Shared fixtures for unit tests.

This conftest provides fixtures commonly used across unit test modules.
"""

import pytest

from scripts.pgt_modules.data_types import ProbabilityVector, WeightVector


# Inherits fixtures from root conftest.py:
# - mock_logger
# - three_at_030
# - interval
# - rng
# - project_dir


@pytest.fixture
def sorted_mixed():
    """Sorted, heterogeneous and strictly inside the admissible interval."""
    return ProbabilityVector(p=[0.30, 0.31, 0.33, 0.35, 0.37])


@pytest.fixture
def weights_three(three_at_030):
    from scripts.pgt_modules.oat import lemma2_weights

    return lemma2_weights(three_at_030)


@pytest.fixture
def textbook_weights():
    """Seven uneven leaf weights."""
    return WeightVector(w=[25.0, 20.0, 5.0, 5.0, 4.0, 16.0, 25.0])
