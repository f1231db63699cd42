import re

import numpy as np
import pytest

_criteria: dict[str, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = f"criterion {int(m.group(1)):>2} ({m.group(2).replace('_', ' ')})"
    if report.when == "call" or report.outcome != "passed":
        if report.outcome == "failed" or key not in _criteria:
            _criteria[key] = report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria):
        terminalreporter.write_line(f"{_criteria[key]:<7} {key}")
