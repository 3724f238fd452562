"""
Root-level shared fixtures for all PGT tests.

This conftest provides common fixtures used across unit and integration tests.
"""

import logging
import math
import os
from pathlib import Path
from unittest.mock import Mock

import numpy as np
import pytest

from scripts.pgt_modules.data_types import AdmissibleInterval, ProbabilityVector

# Defect probability at which GPTA and individual testing tie
GOLDEN = (3.0 - math.sqrt(5.0)) / 2.0


@pytest.fixture
def mock_logger():
    """Create a mock logger for testing.

    Returns:
        Mock: Mock logger with logging.Logger spec
    """
    return Mock(spec=logging.Logger)


@pytest.fixture
def three_at_030():
    """Three units at p = 0.3, the running example of the cost formulas."""
    return ProbabilityVector(p=[0.3, 0.3, 0.3])


@pytest.fixture
def interval():
    return AdmissibleInterval(openness="open")


@pytest.fixture
def rng():
    """Deterministic numpy generator for randomized tests."""
    return np.random.Generator(np.random.Philox(key=12345))


@pytest.fixture
def project_dir(tmp_path, monkeypatch):
    """Empty project directory used as the working directory.

    PGT_* variables are cleared so configuration comes only from files.
    """
    for name in list(os.environ):
        if name.startswith("PGT_"):
            monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    return Path(tmp_path)
