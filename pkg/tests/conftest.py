import pytest

from kothe_chaos.cli import Pipeline, bundled_config_path, load_config, run_pipeline
from kothe_chaos.kothe_space import KotheSpace
from kothe_chaos.matrices import ConstantMatrix, GeometricMatrix, PowerMatrix


@pytest.fixture(scope="session")
def geo_space():
    """a_{j,k} = 2**(1-j), p = 1: every quantity has a closed form."""
    return KotheSpace(GeometricMatrix(0.5), 1.0)


@pytest.fixture(scope="session")
def power_space():
    return KotheSpace(PowerMatrix(), 1.0)


@pytest.fixture(scope="session")
def ones_space():
    return KotheSpace(ConstantMatrix(1.0), 1.0)


@pytest.fixture(scope="session")
def bundled_run() -> tuple[Pipeline, int]:
    return run_pipeline(load_config(bundled_config_path()))


_ACCEPTANCE: list[str] = []


@pytest.fixture()
def acceptance_log():
    """Criterion tests append one "criterion N: PASS|FAIL ..." line here."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
