import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from waimforge.config import resolve_config  # noqa: E402
from waimforge.moments import TruncationConfig  # noqa: E402


@pytest.fixture(scope="session")
def ex1():
    return resolve_config("example1_square")


@pytest.fixture(scope="session")
def ex1_array(ex1):
    return ex1.array


@pytest.fixture(scope="session")
def small_trunc():
    return TruncationConfig(10, 10, 6)


CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Store the outcome of an acceptance criterion for the end-of-run summary."""

    def _record(n: int, ok: bool, detail: str):
        CRITERIA[n] = (bool(ok), detail)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} [PRIMARY] {'PASS' if ok else 'FAIL'}: {detail}")
