import time
from contextlib import contextmanager

import pytest

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


class Timing:
    def __init__(self):
        self.elapsed = None  # seconds; a block may set it to time only part of itself


@pytest.fixture
def criterion(request):
    """Context manager that times an acceptance block and logs a PASS/FAIL line."""
    results = request.config.stash[_RESULTS]

    @contextmanager
    def run(number: int, title: str, limit_s: float | None = None):
        timing = Timing()
        start = time.perf_counter()
        status, note = "PASS", ""
        try:
            yield timing
            elapsed = timing.elapsed if timing.elapsed is not None else time.perf_counter() - start
            note = _fmt_time(elapsed, limit_s)
            if limit_s is not None and elapsed >= limit_s:
                status = "FAIL"
                raise AssertionError(f"criterion {number} took {elapsed:.3g} s, limit {limit_s:g} s")
        except BaseException as exc:
            status = "FAIL"
            note = note or f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
            raise
        finally:
            line = f"AC-{number:02d} {status}  {title}  [{note}]"
            results.append((number, line))
            print(line)

    return run


def _fmt_time(elapsed: float, limit_s: float | None) -> str:
    shown = f"{elapsed * 1e3:.3g} ms" if elapsed < 1 else f"{elapsed:.3g} s"
    if limit_s is None:
        return shown
    limit = f"{limit_s * 1e3:g} ms" if limit_s < 1 else f"{limit_s:g} s"
    return f"{shown} < {limit}"


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, [])
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(results):
        terminalreporter.write_line(line)
