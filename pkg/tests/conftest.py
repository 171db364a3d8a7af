import re

import pytest

from cavity_toffoli.model import PhysicalParams

_ACCEPTANCE: dict[str, str] = {}
_CRITERION_RE = re.compile(r"::test_(criterion_\d+[a-z]?_[a-z0-9_]+)")


@pytest.fixture(scope="session")
def params():
    """The reference operating point: 50 kHz coupling, delta = 4 omega."""
    return PhysicalParams.from_frequency()


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    match = _CRITERION_RE.search(report.nodeid)
    if match and "test_acceptance" in report.nodeid:
        _ACCEPTANCE[match.group(1)] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        outcome = _ACCEPTANCE[name]
        label = name.replace("_", " ")
        terminalreporter.write_line(
            f"{'PASS' if outcome == 'passed' else 'FAIL'}: {label}")
