import os
import sys

import pytest

# keep worker count predictable in CI containers
os.environ.setdefault("MSP_THREADS", str(os.cpu_count() or 1))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo runs")


@pytest.fixture(scope="session")
def python_exe():
    return sys.executable


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""
    def record(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[n] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
