import numpy as np
import pytest

from ddlink.core import LinkParams

ACCEPTANCE_RESULTS = []


@pytest.fixture
def p():
    """Reference link: 16 x 8 grid, 15 kHz, 0.95 GHz, one CP sample."""
    return LinkParams(M=16, N=8, delta_f=15e3, f_c=0.95e9, cp_len=1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_grid(rng, M=16, N=8):
    return rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    def order(entry):
        number = str(entry[0])
        digits = number.rstrip("abcdefghijklmnopqrstuvwxyz")
        return int(digits), number

    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS, key=order):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {str(number):>3}. {title}: {detail}")
