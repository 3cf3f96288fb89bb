import math

import mpmath
import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


def ulp_distance(a, b) -> float:
    """Distance between two floats in units of the larger one's ulp."""
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    return abs(a - b) / math.ulp(max(abs(a), abs(b)))


@pytest.fixture
def hp():
    """mpmath at 120 decimal digits, restored afterwards."""
    with mpmath.workdps(120):
        yield mpmath


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


_CRITERIA: dict[str, tuple[str, bool, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.module.__name__ != "test_acceptance":
        return
    title = (item.function.__doc__ or item.name).strip().splitlines()[0]
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        detail = dict(item.user_properties).get("criterion_detail", "")
        _CRITERIA[item.nodeid] = (title, rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for title, ok, extra in _CRITERIA.values():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {title}" + (f"  [{extra}]" if extra else ""))
