from fractions import Fraction

import pytest

from clustergibbs.model import CylinderEvent, build_ising, field_for

LAMBDA0_1D = float(Fraction(1, 9600))


@pytest.fixture
def asym_ising():
    return build_ising(1, LAMBDA0_1D, 1.0, field_for(0.6))


@pytest.fixture
def sym_ising():
    return build_ising(1, LAMBDA0_1D, 1.0, 0.0)


@pytest.fixture
def up_at_origin():
    return CylinderEvent.make([(0,)], [{(0,): [1]}])


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(acceptance_log.LINES):
            terminalreporter.write_line(acceptance_log.LINES[k])
