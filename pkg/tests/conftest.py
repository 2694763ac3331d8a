import numpy as np
import pytest

from plateau import fixtures as fx
from plateau.family import sweep
from plateau.reconstruct import ReconstructConfig, reconstruct_slice


def _slice(name):
    fam = fx.family(name)
    return reconstruct_slice(fam.slices[0])


@pytest.fixture(scope="session")
def slices():
    """Reconstructed single-slice fixtures, built once."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = _slice(name)
        return cache[name]
    return get


@pytest.fixture(scope="session")
def torus_set():
    return sweep(fx.family("torus"), ReconstructConfig())


@pytest.fixture(scope="session")
def branch_set():
    return sweep(fx.family("branch"), ReconstructConfig())


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixtures")
    fx.write_all(out)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
