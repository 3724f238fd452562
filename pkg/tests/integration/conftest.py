"""
Shared fixtures for integration tests.

This conftest provides fixtures commonly used across integration test modules.
"""

import pytest
from click.testing import CliRunner


# Inherits fixtures from root conftest.py:
# - three_at_030
# - rng
# - project_dir


@pytest.fixture
def runner():
    return CliRunner()
