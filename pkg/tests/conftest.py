import mpmath
import pytest


def i0_series(z, dps=60):
    """Extended-precision power series for I0, summed until terms vanish."""
    with mpmath.workdps(dps):
        z = mpmath.mpf(z)
        q = z * z / 4
        term = total = mpmath.mpf(1)
        k = 0
        while True:
            k += 1
            term *= q / (k * k)
            total += term
            if term < total * mpmath.mpf(10) ** (-dps + 5):
                return total


@pytest.fixture
def series_log_i0():
    def f(z):
        dps = 60 if z < 100 else 400
        with mpmath.workdps(dps):
            return float(mpmath.log(i0_series(z, dps)))

    return f


_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one acceptance outcome; the summary prints one line per criterion."""

    def record(number, passed, detail):
        _ACCEPTANCE[number] = (bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")
