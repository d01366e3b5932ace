"""
Shared fixtures: grids, initial states and settings isolation.
"""

import numpy as np
import pytest

from discretization.grid import FieldState, build_grid
from discretization.mass import preset_example1
from harness.config import get_settings


@pytest.fixture
def grid():
    """The experiment grid: [-10, 10) with 200 nodes."""
    return build_grid(-10.0, 10.0, 200)


@pytest.fixture
def periodic_grid():
    """[0, 2 pi) with 32 nodes, where e^{ikx} is a grid function for |k| < 16."""
    return build_grid(0.0, 2.0 * np.pi, 32)


@pytest.fixture
def gaussian(grid):
    return FieldState.from_functions(grid, lambda x: np.exp(-0.5 * x**2))


@pytest.fixture
def example1():
    return preset_example1(10.0)


@pytest.fixture(autouse=True)
def clear_settings_cache(monkeypatch, tmp_path):
    """Each test sees fresh settings and no stray .env file."""
    monkeypatch.chdir(tmp_path)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
