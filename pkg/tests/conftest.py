import numpy as np
import pytest

from freefusion import MpParams, asd_p1, asd_p2, mp_density

# filled by the acceptance module, printed at the end of the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def mp_bound():
    return mp_density(MpParams())


@pytest.fixture(scope="session")
def p1_bound():
    return asd_p1(MpParams(), MpParams())


@pytest.fixture(scope="session")
def p2_bound():
    return asd_p2(MpParams(), MpParams())


@pytest.fixture
def gen():
    return np.random.default_rng(20240611)



@pytest.fixture(scope="session")
def acceptance_log():
    def record(number, passed, detail):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {status}  {detail}"
    return record
