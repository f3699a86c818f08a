import numpy as np
import pytest

from splitplan.model_graph import load_bundled_profile
from splitplan.wireless import bundled_networks


@pytest.fixture(scope="session")
def profile():
    return load_bundled_profile()


@pytest.fixture(scope="session")
def nets():
    return bundled_networks()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)



_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance gate criterion")


def pytest_runtest_logreport(report):
    if "test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        name = report.nodeid.rsplit("::", 1)[-1].removeprefix("test_")
        if _acceptance.get(name) != "FAIL":
            _acceptance[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        terminalreporter.write_line(f"{_acceptance[name]}  {name}")
