import contextlib

import numpy as np
import pytest

from planarfft import _numpy_kernels
from planarfft._accel import HAVE_NUMBA

_ACCEPTANCE_LINES = []

BACKENDS = ["numpy"]
if HAVE_NUMBA:
    BACKENDS.insert(0, "numba")


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


@pytest.fixture(params=BACKENDS)
def kernels(request):
    """Either kernel module, regardless of which one the package selected."""
    if request.param == "numba":
        from planarfft import _numba_kernels

        return _numba_kernels
    return _numpy_kernels


class AcceptanceReport:
    def __init__(self, name):
        self.name = name
        self.details = []

    def note(self, text):
        self.details.append(text)


@pytest.fixture
def criterion():
    """``with criterion("C1 ...") as r:`` logs one PASS/FAIL line for the terminal summary."""

    @contextlib.contextmanager
    def _run(name):
        report = AcceptanceReport(name)
        try:
            yield report
        except BaseException as exc:
            if isinstance(exc, pytest.skip.Exception):
                _ACCEPTANCE_LINES.append(f"SKIP  {name}: {exc}")
            else:
                _ACCEPTANCE_LINES.append(f"FAIL  {name}: {'; '.join(report.details + [str(exc).splitlines()[0] if str(exc) else type(exc).__name__])}")
            raise
        _ACCEPTANCE_LINES.append(f"PASS  {name}" + (f": {'; '.join(report.details)}" if report.details else ""))

    return _run


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
