import numpy as np
import pytest

from l1drift._accel import load_backend

BACKENDS = ["numpy"]
try:
    import numba  # noqa: F401

    BACKENDS.append("numba")
except ImportError:
    pass

ROOT_SEED = 12345


@pytest.fixture(params=BACKENDS)
def backend(request):
    return load_backend(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(ROOT_SEED)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Record one summary line per acceptance criterion."""
    def _record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
