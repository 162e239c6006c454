import time
from contextlib import contextmanager

import pytest

from padic_selfsim.engine import default_action

ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def action():
    """n=2, p=2, vals (1,-1): m = 2, d = 48, K = 24."""
    return default_action(24)


@pytest.fixture
def criterion(request):
    """Context manager that times a criterion and records one PASS/FAIL line."""

    @contextmanager
    def run(name, limit=None):
        start = time.perf_counter()
        status = "FAIL"
        try:
            yield
            elapsed = time.perf_counter() - start
            if limit is not None:
                assert elapsed < limit, f"took {elapsed:.1f} s, limit {limit} s"
            status = "PASS"
        finally:
            elapsed = time.perf_counter() - start
            line = f"[{status}] {name} ({elapsed:.2f} s)"
            request.config.stash[ACCEPTANCE].append(line)
            print(line)

    return run
