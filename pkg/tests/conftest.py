import numpy as np
import pytest

from netmimo.config import SystemConfig


@pytest.fixture
def config():
    return SystemConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Print a criterion's verdict and keep it for the end-of-run summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def _report(n, passed, detail):
        line = f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(line)
        lines.append(line)

    return _report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
