import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from eqtp import kernels  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    with kernels.use_backend(request.param):
        yield request.param


_ACCEPTANCE: list[str] = []


@pytest.fixture
def report():
    """Record one acceptance line; all lines are printed in the terminal summary."""

    def record(number: int, name: str, passed: bool, detail: str) -> bool:
        line = f"criterion {number} {name}: {'PASS' if passed else 'FAIL'} ({detail})"
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
