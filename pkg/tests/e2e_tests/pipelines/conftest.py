import sys
from pathlib import Path

# Add project root to Python path
project_root = str(Path(__file__).parent.parent.parent.parent)
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import pytest

import main


@pytest.fixture
def cli(tmp_path, monkeypatch):
    """Runs the lzro command line inside an empty working directory."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("LZRO_SEED", raising=False)
    monkeypatch.delenv("LZRO_JOBS", raising=False)

    def _run(*argv):
        return main.main([str(a) for a in argv])

    return _run


@pytest.fixture
def small_run_flags():
    """A one-period single-mode fast-passage scan."""
    return [
        "--g-bare", 120, "--amplitude", 13.3, "--mod-freq-hz", 200,
        "--n-periods", 1, "--samples-per-period", 20, "--single-mode",
    ]
