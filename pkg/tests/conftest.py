"""Pytest configuration and shared fixtures."""

import pytest
import tempfile
from pathlib import Path

from src.mc import McConfig
from src.params import EvalConfig, ModelParams


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def square_params():
    """n = 2, m = 2 (alpha = 0) with a moderate spike."""
    return ModelParams(n=2, m=2, mu=1.0)


@pytest.fixture
def rect_params():
    """n = 2, m = 4 (alpha = 2) with a moderate spike."""
    return ModelParams(n=2, m=4, mu=1.5)


@pytest.fixture
def central_params():
    """n = 2, m = 3, no spike."""
    return ModelParams(n=2, m=3, mu=0.0)


@pytest.fixture
def fast_config():
    """Looser settings for tests that only check structure."""
    return EvalConfig(rel_tol=1e-10, quad_order=80)


@pytest.fixture
def small_mc():
    """A small reproducible Monte Carlo run."""
    return McConfig(samples=2000, seed=42, streams=2)


@pytest.fixture
def config_file(temp_dir):
    """A key=value settings file."""
    path = temp_dir / "wishart.conf"
    path.write_text("# model\nn = 2\nm = 3\nmu = 0.5\n\nrel_tol = 1e-10\n", encoding="utf-8")
    return path
