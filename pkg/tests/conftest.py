"""Shared fixtures: coarse search settings and small optimizer configs."""
import pytest

from config import settings
from models import OptimizerConfig

FAST_SETTINGS = {
    "oracle_resolution": 9,
    "sweep_scan_points": 40,
    "refine_starts": 2,
    "threads": 1,
}


@pytest.fixture(autouse=True, scope="session")
def fast_settings():
    saved = {name: getattr(settings, name) for name in FAST_SETTINGS}
    for name, value in FAST_SETTINGS.items():
        setattr(settings, name, value)
    yield settings
    for name, value in saved.items():
        setattr(settings, name, value)


@pytest.fixture
def coarse_cfg() -> OptimizerConfig:
    return OptimizerConfig(grid_resolution=11, refine_iterations=2, refine_shrink=0.5, seed=0)


@pytest.fixture
def lattice_cfg() -> OptimizerConfig:
    """Lattice only, no refinement: maxima are exact lattice maxima."""
    return OptimizerConfig(grid_resolution=11, refine_iterations=0, refine_shrink=0.5, seed=0)
