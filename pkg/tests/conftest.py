from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dfderiv.carriers import CarrierDescriptor, Matrix, Modular, Polynomial, Product, make_carrier  # noqa: E402
from dfderiv.scalars import INTEGERS, RATIONALS, modular  # noqa: E402


def ring(n: int, id_: str | None = None):
    return make_carrier(CarrierDescriptor(id_ or f"Z{n}", "Ring", Modular(n)))


def matrix_algebra(n: int = 3):
    return make_carrier(CarrierDescriptor(f"M2(Z{n})", "Algebra", Matrix(2, modular(n)), scalar_action=modular(n)))


def poly_pair():
    """Z[x] and the componentwise module Q[x] × Q[x] over it."""
    R = make_carrier(CarrierDescriptor("R", "Ring", Polynomial(INTEGERS)))
    M = make_carrier(CarrierDescriptor("M", "RightModule", Product(Polynomial(RATIONALS), Polynomial(RATIONALS)),
                                       ring=R, action="componentwise"))
    return R, M


@pytest.fixture(scope="session")
def m2z3():
    return matrix_algebra(3)


@pytest.fixture(scope="session")
def m2q():
    return make_carrier(CarrierDescriptor("M2(Q)", "Algebra", Matrix(2, RATIONALS), scalar_action=RATIONALS))


@pytest.fixture(scope="session")
def polys():
    return poly_pair()


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion-marked test

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None or rep.when != "call":
        return
    n, title = m.args
    _CRITERIA[n] = (title, "PASS" if rep.passed else "FAIL", rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, verdict, dur = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2}: {verdict}  {title}  ({dur:.1f}s)")
