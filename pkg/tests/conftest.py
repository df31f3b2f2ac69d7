import random

import pytest

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _ACCEPTANCE[report.nodeid.split("::")[-1]] = (report.outcome, report.duration)
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _ACCEPTANCE[report.nodeid.split("::")[-1]] = (report.outcome, 0.0)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        outcome, dt = _ACCEPTANCE[name]
        tag = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{tag}  {name}  ({dt:.2f}s)")


@pytest.fixture
def rng():
    return random.Random(12345)
