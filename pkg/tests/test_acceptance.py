"""Acceptance criteria 1-6.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion (see ``conftest.py``).  Run with
``pytest tests/test_acceptance.py -v``.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import C_REF, ETA_REF, HALF_BOUND_WIDTH, NEAR_ADIABATIC_WIDTH, POINTS, log_uniform, point, pulse_at
from gaussphoton import analytic, drive, optimize, simulate
from gaussphoton.params import AtomCavityParams, Detunings, PulseSpec, classify_regime, resolve_from_ratios

ROOT401 = math.sqrt(401)
PS_OPT_200 = 0.904875
NAMES = sorted(POINTS)

c1 = pytest.mark.criterion(1, "adiabatic bound")
c2 = pytest.mark.criterion(2, "nonadiabatic anchors")
c3 = pytest.mark.criterion(3, "optimization anchors")
c4 = pytest.mark.criterion(4, "oracle round trip")
c5 = pytest.mark.criterion(5, "closed-form cross-checks")
c6 = pytest.mark.criterion(6, "property suites")


def random_valid_params(rng):
    g = math.exp(rng.uniform(math.log(1e-2), math.log(1e3)))
    kappa_in = 0.0 if rng.random() < 0.2 else math.exp(rng.uniform(math.log(1e-3), math.log(1e3)))
    kappa_ex = math.exp(rng.uniform(math.log(1e-2), math.log(1e3)))
    return AtomCavityParams(g, 1.0, kappa_in, kappa_ex)


def params_strategy():
    return st.builds(
        AtomCavityParams,
        g=log_uniform(1e-2, 1e3),
        gamma=st.just(1.0),
        kappa_in=st.one_of(st.just(0.0), log_uniform(1e-3, 1e3)),
        kappa_ex=log_uniform(1e-2, 1e3),
    )


# -- 1 --------------------------------------------------------------------------


@c1
def test_adiabatic_bound_value():
    p = resolve_from_ratios(1.0, C_REF, ETA_REF)
    assert abs(analytic.ps_ub(p) - 0.904762) <= 1e-6


@c1
@pytest.mark.parametrize("name", NAMES)
def test_long_pulse_reaches_bound(name):
    p = point(name)
    ps = analytic.ps_max(p, pulse_at(p, 1e3))
    assert abs(ps - analytic.ps_ub(p)) <= 1e-3


# -- 2 --------------------------------------------------------------------------


@c2
@pytest.mark.parametrize("name", NAMES)
def test_near_adiabatic_anchor(name):
    p = point(name)
    ratio = analytic.ps_max(p, pulse_at(p, NEAR_ADIABATIC_WIDTH[name])) / analytic.ps_ub(p)
    assert abs(ratio - 0.99) <= 0.01


@c2
@pytest.mark.parametrize("name", NAMES)
def test_half_bound_anchor(name):
    p = point(name)
    ratio = analytic.ps_max(p, pulse_at(p, HALF_BOUND_WIDTH[name])) / analytic.ps_ub(p)
    assert abs(ratio - 0.5) <= 0.05


# -- 3 --------------------------------------------------------------------------


def _c200(kin):
    g = math.sqrt(2 * 200 * kin)
    kappa = kin * (1 + ROOT401)
    return g, max(1 / kappa, kappa / g**2)


@c3
def test_closed_form_optimum():
    o = optimize.kex_opt_adiabatic(1.0, 200.0)
    assert abs(o.kappa_ex_opt / ROOT401 - 1) <= 0.02
    assert abs(o.ps_opt - PS_OPT_200) <= 1e-3


@c3
@pytest.mark.parametrize("kin", [100.0, 1.0, 0.01])
def test_numeric_optimum_in_adiabatic_region(kin):
    g, tau_c = _c200(kin)
    o = optimize.kex_opt_numeric(g, 1.0, kin, PulseSpec(10 * tau_c), (0.1 * kin, 1e3 * kin))
    assert abs(o.kappa_ex_opt / (kin * ROOT401) - 1) <= 0.02
    assert abs(o.ps_opt - PS_OPT_200) <= 1e-3


@c3
@pytest.mark.parametrize("kin, direction", [(100.0, "below"), (0.01, "above")])
def test_short_pulse_shift(kin, direction):
    g, tau_c = _c200(kin)
    o = optimize.kex_opt_numeric(g, 1.0, kin, PulseSpec(0.05 * tau_c), (0.1 * kin, 1e3 * kin))
    ratio = o.kappa_ex_opt / (kin * ROOT401)
    assert ratio < 1 if direction == "below" else ratio > 1
    assert not o.boundary_hit


# -- 4 --------------------------------------------------------------------------


def _round_trip(p, pulse, ps, d):
    dw = drive.drive_resonant(p, pulse, ps) if d.resonant else drive.drive_detuned(p, pulse, ps, d)
    traj = simulate.integrate(p, d, dw, tol=1e-10)
    got = simulate.success_probability(traj, p.kappa_ex)
    target = analytic.waveform_w0(traj.grid, pulse)
    overlap = simulate.mode_overlap(simulate.output_waveform(traj, p.kappa_ex), target, traj.grid)
    return got, overlap


@c4
@pytest.mark.parametrize("name", NAMES)
def test_round_trip(name):
    p = point(name)
    pulse = pulse_at(p, NEAR_ADIABATIC_WIDTH[name])
    ps = 0.99 * analytic.ps_max(p, pulse)

    got, overlap = _round_trip(p, pulse, ps, Detunings())
    assert abs(got - ps) / ps <= 1e-3
    assert overlap >= 0.999

    got_d, overlap_d = _round_trip(p, pulse, ps, Detunings(0.5, 2.0))
    assert abs(got_d - ps) / ps <= 1e-3
    assert abs(got_d - got) / got <= 1e-3
    assert overlap_d >= 0.999


# -- 5 --------------------------------------------------------------------------


@c5
def test_closed_form_against_integral_form():
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for _ in range(1000):
        p = random_valid_params(rng)
        pulse = PulseSpec(math.exp(rng.uniform(math.log(1e-3), math.log(1e3))))
        ps = rng.uniform(0.01, 1.0) * analytic.ps_max(p, pulse)
        t = rng.uniform(-3, 6) * pulse.tau
        err = abs(analytic.rho_uu_integral_form(t, p, pulse, ps) - analytic.rho_uu(t, p, pulse, ps))
        worst = max(worst, err)
    assert worst < 1e-8


@c5
def test_late_time_residual():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        p = random_valid_params(rng)
        tau = math.exp(rng.uniform(0, math.log(1e3))) / p.kappa  # kappa tau >= 1
        pulse = PulseSpec(tau)
        ps = rng.uniform(0.01, 1.0) * analytic.ps_max(p, pulse)
        err = abs(analytic.rho_uu(6 * tau, p, pulse, ps) - analytic.rho_uu_infinity(p, pulse, ps))
        worst = max(worst, err)
    assert worst < 1e-6


def _b3(p, rho_inf):
    c = p.cooperativity
    return p.eta_esc * (1 - rho_inf) * 2 * c / (2 * c + 1)


@c5
@pytest.mark.parametrize("multiple", [10.0, 31.7, 100.0, 1000.0])
@pytest.mark.parametrize("name", NAMES)
def test_finite_width_success_matches_long_pulse_form(name, multiple):
    # multiples of 1 / (kappa sqrt(2 (2C + 1))), from the stated threshold upward
    p = point(name)
    tau = multiple / (p.kappa * math.sqrt(2 * (2 * p.cooperativity + 1)))
    pulse = PulseSpec(tau)
    for rho_inf in (0.0, 0.25, 0.5):
        exact = analytic.ps_finite_tau(p, pulse, rho_inf)
        approx = _b3(p, rho_inf)
        assert abs(exact - approx) / approx <= 1e-3


@c5
@pytest.mark.parametrize("eta", [0.5, 0.95])
def test_large_cooperativity_limit(eta):
    errors = []
    for c in (1e2, 1e4, 1e6):
        p = resolve_from_ratios(1.0, c, eta)
        pulse = PulseSpec(1.0 / p.kappa)
        rho_inf = 0.2
        limit = p.kappa_ex / p.kappa * (1 - rho_inf)
        errors.append(abs(analytic.ps_finite_tau(p, pulse, rho_inf) - limit) / limit)
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] <= 1e-6


# -- 6 --------------------------------------------------------------------------


@c6
@given(params_strategy(), log_uniform(1e-3, 1e3))
def test_bound_ordering(p, tau):
    ps = analytic.ps_max(p, PulseSpec(tau))
    ub = analytic.ps_ub(p)
    assert 0 < ps <= ub <= p.eta_esc


@c6
@given(params_strategy(), log_uniform(1e-3, 1e3))
def test_starts_in_initial_state(p, tau):
    pulse = PulseSpec(tau)
    ps = analytic.ps_max(p, pulse)
    assert abs(analytic.rho_uu(pulse.t_start, p, pulse, ps) - 1.0) <= 1e-9


@c6
@given(params_strategy(), log_uniform(1e-3, 1e3))
def test_minimum_residual_at_bound(p, tau):
    pulse = PulseSpec(tau)
    det = analytic.ps_max_details(p, pulse)
    if det.clamped:
        return  # the adiabatic cap binds and rho_uu stays strictly positive
    assert abs(analytic.rho_uu(det.t_m, p, pulse, det.value)) <= 1e-9


@c6
@settings(max_examples=12)
@given(st.sampled_from(NAMES), st.floats(0.5, 5.0), st.floats(0.1, 0.99), st.booleans())
def test_norm_dissipation_identity(name, multiple, frac, detuned):
    p = point(name)
    pulse = pulse_at(p, multiple)
    ps = frac * analytic.ps_max(p, pulse)
    d = Detunings(0.5, 2.0) if detuned else Detunings()
    dw = drive.drive_resonant(p, pulse, ps, n=2049) if d.resonant else drive.drive_detuned(p, pulse, ps, d, n=2049)
    traj = simulate.integrate(p, d, dw, tol=1e-10)
    assert np.max(np.abs(traj.norm_budget() - 1.0)) <= 1e-5
    assert simulate.dissipation_residual(traj) <= 1e-5


@c6
@given(log_uniform(1e-3, 1e3), log_uniform(1e-3, 1e3), log_uniform(1e-3, 1e3), st.integers(-30, 30))
def test_regime_scale_invariance(g, gamma, kappa, k):
    p = AtomCavityParams(g, gamma, 0.0, kappa)
    assert classify_regime(p.scaled(2.0**k)) is classify_regime(p)


@c6
@pytest.mark.parametrize("which", ["fig2", "fig6", "fig7"])
def test_sweep_determinism(tmp_path, which):
    def build(workers):
        if which == "fig2":
            return optimize.sweep_fig2(grid=optimize.default_fig2_grid(10))
        if which == "fig6":
            return optimize.sweep_fig6(grid=optimize.default_fig6_grid(10), workers=workers)
        return optimize.sweep_fig7(grid=optimize.default_fig7_grid(1e-3, per_decade=5), workers=workers)

    blobs = []
    for i, workers in enumerate((1, 1, 3)):
        sw = build(workers)
        sw.to_csv(tmp_path / f"{i}.csv")
        sw.write_metadata(tmp_path / f"{i}.json")
        blobs.append(((tmp_path / f"{i}.csv").read_bytes(), (tmp_path / f"{i}.json").read_bytes()))
    assert blobs[0] == blobs[1] == blobs[2]
