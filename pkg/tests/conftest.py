"""
Shared pytest setup: engine sources on the path and the ``slow`` marker
"""

import os
import sys

import numpy as np
import pytest

# Add src directory to path
sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance simulation")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
