import pytest

from edgedistill.config import RunConfig
from edgedistill.experiment import prepare

# lines recorded by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def default_cfg():
    return RunConfig()


@pytest.fixture(scope="session")
def prepared_default(default_cfg):
    """Seed-0 default dataset with trained edge and cloud models, built once per session."""
    return prepare(default_cfg)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
