"""
Pytest configuration and fixtures
"""

import pytest

from holoflow.config import AnalysisSettings
from holoflow.field import VectorField
from holoflow.logger import Logger
from holoflow.terminal import ColorMode, Terminal


def pytest_addoption(parser):
    """Add custom command line options"""
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="Run slow tests (tract growth, family windows)"
    )


def pytest_collection_modifyitems(config, items):
    """Skip slow tests unless --runslow is given"""
    if config.getoption("--runslow"):
        return

    skip_slow = pytest.mark.skip(reason="need --runslow option to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def isolated_home(tmp_path, monkeypatch):
    """Keep config and log files out of the real home directory"""
    home = tmp_path / "holoflow-home"
    monkeypatch.setenv("HOLOFLOW_HOME", str(home))
    monkeypatch.delenv("HOLOFLOW_LOG_LEVEL", raising=False)
    monkeypatch.delenv("HOLOFLOW_WORKERS", raising=False)
    Logger._instance = None
    Logger._log_level = None
    Logger._log_file = None
    Terminal.set_color_mode(ColorMode.NEVER)
    yield home
    Logger._instance = None
    Logger._log_level = None
    Terminal.set_color_mode(ColorMode.AUTO)


@pytest.fixture
def temp_config_dir(tmp_path):
    """Create a temporary config directory"""
    config_dir = tmp_path / ".holoflow"
    config_dir.mkdir(parents=True)
    return config_dir


@pytest.fixture
def settings():
    """Default analysis settings"""
    return AnalysisSettings()


@pytest.fixture
def fast_settings():
    """Coarser probes for tests that only need verdict kinds"""
    return AnalysisSettings(probe_samples=1024, census_seeds=16, scan_spacing=0.2)


@pytest.fixture
def constant_field():
    """f = 1: translation, Psi = z"""
    return VectorField.from_source("1")


@pytest.fixture
def exp_field():
    """f = e^z: Psi = 1 - e^{-z} from the base point 0"""
    return VectorField.from_source("exp(z)")


@pytest.fixture
def sec_field():
    """f = sec z with Psi = sin z"""
    return VectorField.from_psi("sin(z)")


@pytest.fixture
def tan_field():
    """f = tan z: simple zeros with residue 1"""
    return VectorField.from_source("tan(z)")
