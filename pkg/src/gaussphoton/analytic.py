"""Closed-form populations and success-probability bounds for a Gaussian photon.

Everything here assumes the emitted temporal mode is

    w0(t) = (sqrt(pi) tau)^(-1/2) exp(-t^2 / (2 tau^2)),

so the cavity and excited-state populations follow from the cavity
equation alone, and the remaining |u> population from the norm balance.
The largest success probability compatible with ``rho_uu >= 0`` is obtained
by evaluating that balance at the stationary points of ``rho_uu``.

Functions whose names end in ``_array`` broadcast over numpy arrays of
rates and widths; the others take the dataclasses from :mod:`.params`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import erfc

from .errors import DomainError
from .params import AtomCavityParams, PulseSpec

SQRT_PI = math.sqrt(math.pi)
ERF_SATURATION = 9.0
LOG_SPACE_THRESHOLD = 1e300
DEDUP_RTOL = 1e-12
PS_RTOL = 1e-10  # slack on the ps <= ps_max precondition for round-off


def _erf_plus_one(x):
    """Erf(x) + 1 without cancellation for negative x."""
    x = np.asarray(x, dtype=float)
    out = erfc(-x)
    out = np.where(x > ERF_SATURATION, 2.0, out)
    return np.where(x < -ERF_SATURATION, 0.0, out)


def _gauss_weighted(pref, poly, x):
    """``pref * poly * exp(-x**2)``, switching to log space for huge prefactors."""
    pref, poly, x = np.broadcast_arrays(
        np.asarray(pref, dtype=float), np.asarray(poly, dtype=float), np.asarray(x, dtype=float)
    )
    with np.errstate(over="ignore", invalid="ignore"):
        coef = pref * poly
        out = coef * np.exp(-x * x)
    big = ~np.isfinite(coef) | (np.abs(coef) > LOG_SPACE_THRESHOLD)
    if np.any(big):
        p, q, xb = pref[big], poly[big], x[big]
        with np.errstate(divide="ignore"):
            logmag = np.log(np.abs(p)) + np.log(np.abs(q)) - xb * xb
        out = np.array(out, dtype=float)
        out[big] = np.sign(p) * np.sign(q) * np.exp(logmag)
    return out if out.ndim else float(out)


# -- target waveform and populations ------------------------------------------


def waveform_w0(t, pulse: PulseSpec):
    """Normalised Gaussian output mode sampled at ``t``."""
    tau = pulse.tau
    t = np.asarray(t, dtype=float)
    out = np.exp(-(t * t) / (2 * tau * tau)) / math.sqrt(SQRT_PI * tau)
    return out if out.ndim else float(out)


def _rho_gg_array(t, kappa_ex, tau, ps):
    return _gauss_weighted(ps / (2 * SQRT_PI * kappa_ex * tau), 1.0, t / tau)


def _rho_ee_array(t, g, kappa, kappa_ex, tau, ps):
    lever = kappa - t / tau**2
    return _gauss_weighted(ps / (2 * SQRT_PI * kappa_ex * g * g * tau), lever * lever, t / tau)


def _rho_uu_array(t, g, gamma, kappa, kappa_ex, tau, ps):
    t = np.asarray(t, dtype=float)
    x = t / tau
    rate_sum = gamma + 2 * kappa * tau**2 * (g * g + gamma * kappa)
    step = ps * rate_sum * _erf_plus_one(x) / (4 * g * g * kappa_ex * tau**2)
    poly = t * t - t * (gamma + 2 * kappa) * tau**2 + (g * g + kappa * (2 * gamma + kappa)) * tau**4
    bump = _gauss_weighted(ps / (2 * SQRT_PI * kappa_ex * g * g * tau**5), poly, x)
    return 1.0 - step - bump


def _check_ps(p: AtomCavityParams, pulse: PulseSpec, ps: float) -> None:
    if not (ps > 0):
        raise DomainError(f"success probability must be positive, got {ps}")
    bound = ps_max(p, pulse)
    if ps > bound * (1 + PS_RTOL):
        raise DomainError(f"success probability {ps:.6g} exceeds ps_max = {bound:.6g}")


def rho_gg(t, p: AtomCavityParams, pulse: PulseSpec, ps: float):
    """Cavity-photon population |alpha_g|^2 forced by the Gaussian output mode."""
    _check_ps(p, pulse, ps)
    return _rho_gg_array(t, p.kappa_ex, pulse.tau, ps)


def rho_ee(t, p: AtomCavityParams, pulse: PulseSpec, ps: float):
    """Excited-state population; vanishes at t0 = kappa tau^2."""
    _check_ps(p, pulse, ps)
    return _rho_ee_array(t, p.g, p.kappa, p.kappa_ex, pulse.tau, ps)


def rho_uu(t, p: AtomCavityParams, pulse: PulseSpec, ps: float):
    """Population remaining in the uncoupled ground state (closed form)."""
    _check_ps(p, pulse, ps)
    return _rho_uu_array(t, p.g, p.gamma, p.kappa, p.kappa_ex, pulse.tau, ps)


def rho_uu_dot(t, p: AtomCavityParams, pulse: PulseSpec, ps: float):
    """Time derivative of :func:`rho_uu` in factored form.

    The quadratic factor is written as ``(t - a)^2 - tau^2 D`` when the
    discriminant ``D`` is negative, which keeps it real.
    """
    _check_ps(p, pulse, ps)
    return _rho_uu_dot_array(t, p.g, p.gamma, p.kappa, p.kappa_ex, pulse.tau, ps)


def _quadratic_factor(t, g, gamma, kappa, tau):
    """(t - t_+)(t - t_-), real for either sign of the discriminant."""
    t = np.asarray(t, dtype=float)
    disc = _discriminant(g, gamma, kappa, tau)
    centre = 0.5 * (kappa + gamma) * tau**2
    if disc >= 0:
        root = tau * math.sqrt(disc)
        return (t - centre - root) * (t - centre + root)
    return (t - centre) ** 2 - tau * tau * disc


def _rho_uu_dot_array(t, g, gamma, kappa, kappa_ex, tau, ps):
    t = np.asarray(t, dtype=float)
    poly = (t - kappa * tau**2) * _quadratic_factor(t, g, gamma, kappa, tau)
    return _gauss_weighted(ps / (g * g * kappa_ex * tau**7 * SQRT_PI), poly, t / tau)


def rho_uu_integral_form(t, p: AtomCavityParams, pulse: PulseSpec, ps: float, epsabs: float = 1e-13):
    """``rho_uu`` from the norm balance, integrating the loss terms numerically.

    Independent of the closed form in :func:`rho_uu`; used to cross-check it.
    """
    _check_ps(p, pulse, ps)
    g, gamma, kappa, kex, tau = p.g, p.gamma, p.kappa, p.kappa_ex, pulse.tau

    def loss_rate(s):
        return 2.0 * (
            gamma * _rho_ee_array(s, g, kappa, kex, tau, ps) + kappa * _rho_gg_array(s, kex, tau, ps)
        )

    def one(tt):
        # both loss terms carry exp(-t^2/tau^2); beyond 12 tau they are below 1e-60
        lower = min(-12.0 * tau, tt)
        upper = min(tt, 12.0 * tau)
        pts = [s for s in (-tau, 0.0, tau, kappa * tau**2) if lower < s < upper]
        lost, _ = integrate.quad(
            loss_rate, lower, upper, points=pts or None, epsabs=epsabs, epsrel=1e-13, limit=400
        )
        return 1.0 - _rho_ee_array(tt, g, kappa, kex, tau, ps) - _rho_gg_array(tt, kex, tau, ps) - lost

    t_arr = np.asarray(t, dtype=float)
    if t_arr.ndim == 0:
        return one(float(t_arr))
    return np.array([one(float(tt)) for tt in t_arr.ravel()]).reshape(t_arr.shape)


def rho_uu_infinity(p: AtomCavityParams, pulse: PulseSpec, ps: float) -> float:
    """Limit of ``rho_uu`` as t -> infinity."""
    C, kappa, tau = p.cooperativity, p.kappa, pulse.tau
    return 1.0 - ps * (1 / kappa + 4 * C * kappa * tau**2 + 2 * kappa * tau**2) / (
        4 * C * p.kappa_ex * tau**2
    )


# -- stationary points of rho_uu ----------------------------------------------


def _discriminant(g, gamma, kappa, tau):
    return 1.0 - tau**2 * (g * g - (0.5 * (kappa - gamma)) ** 2)


@dataclass(frozen=True)
class CriticalTimes:
    """Stationary points of ``rho_uu``; ``t_plus``/``t_minus`` exist when real."""

    t0: float
    t_plus: float | None
    t_minus: float | None
    discriminant: float

    def candidates(self) -> list[float]:
        out = [self.t0]
        if self.t_plus is not None:
            out += [self.t_plus, self.t_minus]
        return out


def critical_times(p: AtomCavityParams, pulse: PulseSpec) -> CriticalTimes:
    tau, kappa, gamma = pulse.tau, p.kappa, p.gamma
    disc = _discriminant(p.g, gamma, kappa, tau)
    t0 = kappa * tau**2
    if disc < 0:
        return CriticalTimes(t0, None, None, disc)
    centre = 0.5 * (kappa + gamma) * tau**2
    root = tau * math.sqrt(disc)
    return CriticalTimes(t0, centre + root, centre - root, disc)


# -- success-probability bounds -----------------------------------------------


def _ps_at_candidate(t_m, g, gamma, kappa, kappa_ex, tau):
    """Largest ps keeping rho_uu(t_m) >= 0; NaN where t_m is NaN."""
    C = g * g / (2 * kappa * gamma)
    x = t_m / tau
    step = (2 * C + 1 + 1 / (2 * kappa**2 * tau**2)) * 0.5 * _erf_plus_one(x)
    poly = (t_m / tau**2 - gamma - 2 * kappa) * t_m + kappa**2 * tau**2 + 2 * kappa * gamma * tau**2 * (C + 1)
    bump = _gauss_weighted(1.0 / (2 * SQRT_PI * kappa**2 * gamma * tau**3), poly, x)
    return (kappa_ex / kappa) * 2 * C / (step + bump)


def ps_ub_array(g, gamma, kappa_in, kappa_ex):
    kappa = kappa_in + kappa_ex
    C = g * g / (2 * kappa * gamma)
    return (kappa_ex / kappa) * 2 * C / (2 * C + 1)


def ps_max_array(g, gamma, kappa_in, kappa_ex, tau):
    """Vectorised :func:`ps_max`; all arguments broadcast together.

    Values above the adiabatic bound (round-off only) are clamped to it.
    """
    g, gamma, kappa_in, kappa_ex, tau = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (g, gamma, kappa_in, kappa_ex, tau))
    )
    kappa = kappa_in + kappa_ex
    disc = _discriminant(g, gamma, kappa, tau)
    real = disc >= 0
    root = tau * np.sqrt(np.where(real, disc, 0.0))
    centre = 0.5 * (kappa + gamma) * tau**2
    best = _ps_at_candidate(kappa * tau**2, g, gamma, kappa, kappa_ex, tau)
    for sign in (1.0, -1.0):
        cand = _ps_at_candidate(centre + sign * root, g, gamma, kappa, kappa_ex, tau)
        best = np.where(real, np.minimum(best, cand), best)
    out = np.minimum(best, ps_ub_array(g, gamma, kappa_in, kappa_ex))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PsMaxResult:
    """Diagnostics of the bound evaluation.

    ``value`` is the bound actually reported; ``raw`` the unclamped minimum
    over candidates. ``clamped`` marks a raw value above the adiabatic bound,
    ``degenerate`` marks candidates that coincided and were merged.
    """

    value: float
    raw: float
    t_m: float
    candidates: tuple[float, ...]
    per_candidate: tuple[float, ...]
    clamped: bool
    degenerate: bool


def ps_max_details(p: AtomCavityParams, pulse: PulseSpec) -> PsMaxResult:
    tau = pulse.tau
    cands: list[float] = []
    degenerate = False
    for c in critical_times(p, pulse).candidates():
        if any(abs(c - k) <= DEDUP_RTOL * tau for k in cands):
            degenerate = True
            continue
        cands.append(c)
    values = [float(_ps_at_candidate(c, p.g, p.gamma, p.kappa, p.kappa_ex, tau)) for c in cands]
    i = int(np.argmin(values))
    raw = values[i]
    bound = ps_ub(p)
    return PsMaxResult(
        value=min(raw, bound),
        raw=raw,
        t_m=cands[i],
        candidates=tuple(cands),
        per_candidate=tuple(values),
        clamped=raw > bound,
        degenerate=degenerate,
    )


def ps_max(p: AtomCavityParams, pulse: PulseSpec) -> float:
    """Upper bound on the success probability for a Gaussian photon of width tau."""
    return ps_max_details(p, pulse).value


def ps_ub(p: AtomCavityParams) -> float:
    """Adiabatic (tau -> infinity) bound eta_esc * 2C / (2C + 1)."""
    return float(ps_ub_array(p.g, p.gamma, p.kappa_in, p.kappa_ex))


def ps_finite_tau(p: AtomCavityParams, pulse: PulseSpec, rho_uu_inf: float) -> float:
    """Success probability implied by a residual |u> population at t -> infinity."""
    if not (0 <= rho_uu_inf < 1):
        raise DomainError(f"rho_uu(inf) must lie in [0, 1), got {rho_uu_inf}")
    C, kappa, tau = p.cooperativity, p.kappa, pulse.tau
    return (1 - rho_uu_inf) * 2 * C * p.kappa_ex * tau**2 / (1 / (2 * kappa) + (2 * C + 1) * kappa * tau**2)


def tau_critical_array(g, kappa):
    return np.maximum(1.0 / kappa, kappa / (g * g))


def tau_critical(p: AtomCavityParams) -> float:
    """Shortest pulse width compatible with a near-adiabatic success probability."""
    return max(1.0 / p.kappa, p.kappa / p.g**2)


def monotonicity_violations(p: AtomCavityParams, taus, atol: float = 1e-10) -> list[tuple[float, float]]:
    """Pairs ``(tau, drop)`` where ps_max decreases along increasing ``taus``."""
    taus = np.asarray(taus, dtype=float)
    vals = ps_max_array(p.g, p.gamma, p.kappa_in, p.kappa_ex, taus)
    drops = vals[:-1] - vals[1:]
    bad = np.nonzero(drops > atol)[0]
    return [(float(taus[i + 1]), float(drops[i])) for i in bad]
