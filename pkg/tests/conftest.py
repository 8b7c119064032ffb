import math
import sys

import pytest

from qpsl import PhaseParameter, integrate_fundamental, potential

T_SET = [0.0, 0.3, math.pi / 2, math.pi, 3 * math.pi / 2, 5.9]


def builtin_potentials():
    """One representative of each named potential."""
    return [
        potential.zero(),
        potential.mathieu(1.0),
        potential.two_mode(0.5, 0.25),
        potential.shifted(3.0, potential.mathieu(1.0)),
    ]


@pytest.fixture(scope="session", autouse=True)
def compiled_kernel():
    # first call pays the JIT compile; keep it out of timed tests
    integrate_fundamental(potential.zero(), 1.0)


@pytest.fixture(params=T_SET, ids=lambda t: f"t={t:.4f}")
def phase(request):
    return PhaseParameter(request.param)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
