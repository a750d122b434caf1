import sys
from pathlib import Path

# Add project root to Python path
project_root = str(Path(__file__).parent.parent)
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import pytest

from models.drive_model import DriveParams


@pytest.fixture(scope="session")
def project_root_path():
    """Return the project root path."""
    return project_root


@pytest.fixture(scope="session")
def fast_drive():
    """Fast-passage constructive drive: g = 120 Hz, A = 13.3, f_s = 200 Hz."""
    return DriveParams.from_hz(120.0, 13.3, 200.0)


@pytest.fixture(scope="session")
def fast_destructive_drive():
    return DriveParams.from_hz(120.0, 11.55, 200.0)


@pytest.fixture(scope="session")
def slow_drive():
    """Slow-passage destructive drive: g = 320 Hz, A = 20.6, f_s = 62.5 Hz."""
    return DriveParams.from_hz(320.0, 20.6, 62.5)


@pytest.fixture(scope="session")
def rabi_drive():
    return DriveParams.from_hz(320.0, 0.0, 62.5)
