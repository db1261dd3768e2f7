import math

import pytest
from hypothesis import HealthCheck, settings

from gaussphoton.params import AtomCavityParams, PulseSpec, resolve_from_ratios

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

C_REF, ETA_REF = 10.0, 0.95

# representative coupling points at C = 10, eta_esc = 0.95, keyed by g/kappa
POINTS = {
    "purcell": 0.1,
    "intermediate": 1.0,
    "strong": 10.0,
    "weak": 100.0,
}

# pulse widths (in units of the critical width) where the bound reaches 0.99 and 0.5 of ps_ub
NEAR_ADIABATIC_WIDTH = {"purcell": 1.3, "intermediate": 2.0, "strong": 2.0, "weak": 2.0}
HALF_BOUND_WIDTH = {"purcell": 0.19, "intermediate": 0.57, "strong": 0.24, "weak": 0.24}


def point(name: str) -> AtomCavityParams:
    return resolve_from_ratios(POINTS[name], C_REF, ETA_REF)


def pulse_at(p: AtomCavityParams, multiple: float) -> PulseSpec:
    return PulseSpec(multiple * max(1.0 / p.kappa, p.kappa / p.g**2))


@pytest.fixture(params=sorted(POINTS))
def regime_point(request):
    return request.param, point(request.param)


def log_uniform(lo: float, hi: float):
    from hypothesis import strategies as st

    return st.floats(math.log(lo), math.log(hi)).map(math.exp)


# -- acceptance reporting -------------------------------------------------------
# Tests marked ``criterion(n, title)`` are grouped; one PASS/FAIL line per group is
# printed in the terminal summary whether or not output capture is on.

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion the test belongs to")
    config.stash[_CRITERIA] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call") or (rep.when == "setup" and rep.passed):
        return
    number, title = mark.args
    entry = item.config.stash[_CRITERIA].setdefault(number, {"title": title, "outcomes": []})
    entry["outcomes"].append(rep.passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_CRITERIA, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        entry = results[number]
        status = "PASS" if entry["outcomes"] and all(entry["outcomes"]) else "FAIL"
        n_ok = sum(entry["outcomes"])
        terminalreporter.write_line(
            f"criterion {number} ({entry['title']}): {status} [{n_ok}/{len(entry['outcomes'])} checks]"
        )
