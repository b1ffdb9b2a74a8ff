import numpy as np
import pytest

_acceptance = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance.append(report)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for rep in _acceptance:
        name = rep.nodeid.split("::")[-1]
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        detail = dict(rep.user_properties).get("detail", "")
        terminalreporter.write_line(f"{status:4}  {name}  {detail}")
