import warnings

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _quiet_disorder_warning():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="epsilon=.*exceeds")
        yield


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion, then assert it."""
    config = request.config
    lines = config.stash.setdefault(ACCEPTANCE_KEY, [])
    reporter = config.pluginmanager.get_plugin("terminalreporter")

    def report(number: int, ok: bool, detail: str):
        line = f"ACCEPTANCE {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append((number, line))
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
