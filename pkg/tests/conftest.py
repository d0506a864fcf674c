"""Shared fixtures.

Everything numeric in this suite runs at 256-bit mantissas; the autouse
fixture pins that so a stray test cannot leak precision into the next one.
Expensive renormalization histories are built once per session.
"""

import re

import pytest
from mpmath import mp

from giet import builtin_maps
from giet.giem import renormalize

PREC = 256


@pytest.fixture(autouse=True)
def _fixed_precision():
    old = mp.prec
    mp.prec = PREC
    yield
    mp.prec = old


def _at_prec(fn, *args, **kwargs):
    old = mp.prec
    mp.prec = PREC
    try:
        return fn(*args, **kwargs)
    finally:
        mp.prec = old


@pytest.fixture(scope="session")
def brisk_maps():
    return _at_prec(builtin_maps.brisk_pair)


@pytest.fixture(scope="session")
def brisk_histories(brisk_maps):
    f, g = brisk_maps
    return _at_prec(renormalize, f, 100), _at_prec(renormalize, g, 100)


@pytest.fixture(scope="session")
def bump_history():
    # 36 steps is the deepest prefix on which the bump fixture provably
    # shadows the periodic itinerary; past ~40 it wanders off.
    return _at_prec(renormalize, builtin_maps.bump_map(), 36)


@pytest.fixture(scope="session")
def golden_history():
    return _at_prec(renormalize, builtin_maps.golden_iet(), 40)


# ---------------------------------------------------------------------------
# acceptance summary: one PASS/FAIL line per criterion at the end of the run

_CRITERION = re.compile(r"test_criterion_(\d+)")
_outcomes = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    num = int(m.group(1))
    if report.when == "call":
        _outcomes[num] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.failed:
        _outcomes[num] = "FAIL (setup)"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_outcomes):
        terminalreporter.write_line(f"criterion {num:2d}: {_outcomes[num]}")
