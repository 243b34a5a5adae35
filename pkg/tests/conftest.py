import time
from contextlib import contextmanager

import pytest

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


@pytest.fixture
def criterion(request):
    """Context manager timing one acceptance criterion and logging PASS/FAIL."""
    results = request.config.stash[_RESULTS]

    @contextmanager
    def check(number, title, limit=None):
        start = time.perf_counter()
        try:
            yield
            elapsed = time.perf_counter() - start
            if limit is not None and elapsed > limit:
                raise AssertionError(f"took {elapsed:.1f} s, limit {limit} s")
        except BaseException as exc:
            reason = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            line = f"FAIL  criterion {number:>2}: {title} ({reason})"
            results.append((number, line))
            print(line)
            raise
        line = f"PASS  criterion {number:>2}: {title} [{elapsed:.2f} s]"
        results.append((number, line))
        print(line)

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, [])
    if results:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(results, key=lambda r: r[0]):
            terminalreporter.write_line(line)
