"""Control-field synthesis for a prescribed output photon.

Given the output mode, the cavity amplitude is fixed by the input-output
relation, the excited-state amplitude by the cavity equation, and the |u>
population by the norm balance. The drive then follows from the
excited-state equation: ``z = Omega * alpha_u`` with

    z = d(alpha_e)/dt + (gamma + i delta_e) alpha_e - g alpha_g.

Its modulus gives ``|Omega| = |z| / sqrt(rho_uu)``; the phase needs the
phase of ``alpha_u``, obtained by integrating the |u> equation.

Conventions
-----------
The global phase of the drive is free (it only rotates the |e>, |g>
amplitudes and the output mode). Synthesised drives are normalised so that
the phase is zero on the leading edge, i.e. a resonant drive starts
non-negative. The phase integral starts at the first grid sample.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_simpson

from . import analytic
from ._quadrature import cumulative_integral
from .errors import ConsistencyError, DivergenceError, DomainError
from .params import AtomCavityParams, Detunings, PulseSpec

SAFETY_FACTOR = 0.99
DEFAULT_SAMPLES = 4096
CLAMP_RTOL = 1e-14
PHASE_ATOL = 1e-10


@dataclass(frozen=True)
class DriveWaveform:
    """Complex Rabi frequency ``omega_mag * exp(i omega_phase)`` on a grid.

    ``phi_u`` is the phase of the |u> amplitude the drive was designed for.
    Both phases are continuous along the grid (no 2 pi wrapping).
    """

    grid: np.ndarray
    omega_mag: np.ndarray
    omega_phase: np.ndarray
    phi_u: np.ndarray
    ps: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = len(self.grid)
        if n < 4 or np.any(np.diff(self.grid) <= 0):
            raise DomainError("drive grid must be strictly increasing with at least 4 samples")
        for name in ("omega_mag", "omega_phase", "phi_u"):
            if len(getattr(self, name)) != n:
                raise DomainError(f"{name} has {len(getattr(self, name))} samples, grid has {n}")
        if not np.all(np.isfinite(self.omega_mag)) or np.any(self.omega_mag < 0):
            raise ConsistencyError("drive magnitude must be finite and non-negative")

    @property
    def omega(self) -> np.ndarray:
        return self.omega_mag * np.exp(1j * self.omega_phase)

    def rotated(self, theta: float) -> DriveWaveform:
        """Same drive times the constant phase factor ``exp(i theta)``."""
        return DriveWaveform(self.grid, self.omega_mag, self.omega_phase + theta, self.phi_u, self.ps, self.meta)

    @classmethod
    def from_complex(cls, grid, omega, phi_u=None, ps=None) -> DriveWaveform:
        grid = np.asarray(grid, dtype=float)
        omega = np.asarray(omega, dtype=complex)
        phase = np.unwrap(np.angle(omega))
        phi_u = np.zeros_like(grid) if phi_u is None else np.asarray(phi_u, dtype=float)
        return cls(grid, np.abs(omega), phase, phi_u, ps)

    def to_csv(self, path: str | Path) -> None:
        write_drive_csv(self, path)


@dataclass(frozen=True)
class AmplitudeTriple:
    """Target amplitudes on a grid for a given output mode and success probability.

    ``alpha_u`` carries the phase ``phi_u`` when it is known (zero for the
    resonant case).
    """

    grid: np.ndarray
    alpha_u: np.ndarray
    alpha_e: np.ndarray
    alpha_g: np.ndarray
    alpha_e_dot: np.ndarray
    alpha_g_dot: np.ndarray
    rho_uu: np.ndarray
    rho_uu_dot: np.ndarray
    z: np.ndarray
    y: np.ndarray


def _check_fraction(p: AtomCavityParams, pulse: PulseSpec, ps: float, safety: float) -> float:
    if not 0 < safety < 1:
        raise DomainError(f"safety factor must lie in (0, 1), got {safety}")
    bound = analytic.ps_max(p, pulse)
    if not ps > 0:
        raise DomainError(f"success probability must be positive, got {ps}")
    if ps > safety * bound * (1 + 1e-12):
        raise DivergenceError(
            f"ps = {ps:.6g} exceeds {safety:g} * ps_max = {safety * bound:.6g}; at ps_max the |u> "
            "population touches zero and the required drive diverges there"
        )
    return bound


def _grid_for(pulse: PulseSpec, grid, n: int) -> np.ndarray:
    return pulse.grid(n) if grid is None else np.asarray(grid, dtype=float)


def _gaussian_amplitudes(p: AtomCavityParams, pulse: PulseSpec, ps: float, t):
    """alpha_g, alpha_e and their derivatives for the Gaussian mode (analytic)."""
    tau = pulse.tau
    amp = math.sqrt(ps / (2 * p.kappa_ex))
    alpha_g = amp * analytic.waveform_w0(t, pulse)
    s = t / tau**2
    alpha_g_dot = -s * alpha_g
    lever = p.kappa - s
    alpha_e = -alpha_g * lever / p.g
    alpha_e_dot = alpha_g * (s * lever + 1 / tau**2) / p.g
    return alpha_g, alpha_g_dot, alpha_e, alpha_e_dot


def _gaussian_targets(p: AtomCavityParams, pulse: PulseSpec, ps: float, d: Detunings, t):
    alpha_g, alpha_g_dot, alpha_e, alpha_e_dot = _gaussian_amplitudes(p, pulse, ps, t)
    args = (p.g, p.gamma, p.kappa, p.kappa_ex, pulse.tau, ps)
    rho = analytic._rho_uu_array(t, *args)
    rho_dot = analytic._rho_uu_dot_array(t, *args)
    # Re z = alpha_e' + gamma alpha_e - g alpha_g collapses to a product with the
    # same quadratic factor as rho_uu'; the unfactored sum cancels near t_+-
    quad = analytic._quadratic_factor(t, p.g, p.gamma, p.kappa, pulse.tau)
    z = -alpha_g * quad / (p.g * pulse.tau**4) + 1j * d.delta_e * alpha_e
    y = 1j * d.delta_u + rho_dot / (2 * rho)
    return alpha_g, alpha_g_dot, alpha_e, alpha_e_dot, rho, rho_dot, z, y


def amplitude_targets(
    p: AtomCavityParams,
    pulse: PulseSpec,
    ps: float,
    detunings: Detunings = Detunings(),
    grid=None,
    n: int = DEFAULT_SAMPLES,
) -> AmplitudeTriple:
    """Target amplitudes for the Gaussian output mode.

    Derivatives are analytic. ``alpha_u`` uses the closed-form phase of
    the |u> amplitude for a real output mode.
    """
    analytic._check_ps(p, pulse, ps)
    t = _grid_for(pulse, grid, n)
    alpha_g, alpha_g_dot, alpha_e, alpha_e_dot, rho, rho_dot, z, y = _gaussian_targets(p, pulse, ps, detunings, t)
    if np.any(rho <= 0):
        raise ConsistencyError(f"rho_uu <= 0 at t = {t[np.argmin(rho)]:.6g}")
    phi_u = np.zeros_like(t) if detunings.resonant else phase_u_closed(p, pulse, ps, detunings, t)
    return AmplitudeTriple(
        grid=t,
        alpha_u=np.sqrt(rho) * np.exp(1j * phi_u),
        alpha_e=alpha_e.astype(complex),
        alpha_g=alpha_g.astype(complex),
        alpha_e_dot=alpha_e_dot.astype(complex),
        alpha_g_dot=alpha_g_dot.astype(complex),
        rho_uu=rho,
        rho_uu_dot=rho_dot,
        z=z,
        y=y,
    )


def drive_resonant(
    p: AtomCavityParams,
    pulse: PulseSpec,
    ps: float,
    grid=None,
    n: int = DEFAULT_SAMPLES,
    safety: float = SAFETY_FACTOR,
) -> DriveWaveform:
    """Real drive producing the Gaussian photon on resonance.

    The quadratic factor vanishes at the real stationary points t_+ and
    t_-, where the drive changes sign.
    """
    _check_fraction(p, pulse, ps, safety)
    t = _grid_for(pulse, grid, n)
    tau = pulse.tau
    args = (p.g, p.gamma, p.kappa, p.kappa_ex, tau, ps)
    rho = analytic._rho_uu_array(t, *args)
    if np.any(rho <= 0):
        raise ConsistencyError(f"rho_uu <= 0 at t = {t[np.argmin(rho)]:.6g}")
    pref = math.sqrt(ps) / (p.g * tau**4.5 * math.sqrt(2 * p.kappa_ex * analytic.SQRT_PI))
    quad = analytic._quadratic_factor(t, p.g, p.gamma, p.kappa, tau)
    omega = analytic._gauss_weighted(pref, quad, t / (math.sqrt(2) * tau)) / np.sqrt(rho)
    omega = np.where(np.abs(omega) < CLAMP_RTOL * np.max(np.abs(omega)), 0.0, omega)
    phase = np.where(omega < 0, math.pi, 0.0)
    return DriveWaveform(
        grid=t,
        omega_mag=np.abs(omega),
        omega_phase=phase,
        phi_u=np.zeros_like(t),
        ps=ps,
        meta={"kind": "resonant", "safety": safety},
    )


def phase_u_closed(p: AtomCavityParams, pulse: PulseSpec, ps: float, detunings: Detunings, grid) -> np.ndarray:
    """Phase of alpha_u for a real output mode, from the reduced integral.

    ``phi_u(t) = -delta_u (t - t_st) + delta_e * integral alpha_e^2 / rho_uu``.
    """
    t = np.asarray(grid, dtype=float)
    args = (p.g, p.gamma, p.kappa, p.kappa_ex, pulse.tau, ps)

    def integrand(s):
        _, _, alpha_e, _ = _gaussian_amplitudes(p, pulse, ps, s)
        return alpha_e**2 / analytic._rho_uu_array(s, *args)

    if detunings.delta_e == 0:
        acc = np.zeros_like(t)
    else:
        acc, _ = cumulative_integral(integrand, t, atol=PHASE_ATOL / abs(detunings.delta_e))
    return -detunings.delta_u * (t - t[0]) + detunings.delta_e * acc


def _phase_rate_general(alpha_e, z, y):
    """Phase velocity of alpha_u, ``-Im[alpha_e* y z] / Re[alpha_e* z]``, and its denominator."""
    den = np.real(np.conj(alpha_e) * z)
    num = np.imag(np.conj(alpha_e) * y * z)
    return -num / den, den


def _diff4(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central first derivative with one-sided edge stencils."""
    f = np.asarray(values)
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    out[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    out[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    return out


def _sampled_amplitudes(p: AtomCavityParams, ps: float, detunings: Detunings, t, w0):
    """Targets for a user-supplied mode sampled on a uniform grid."""
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=0):
        raise DomainError("sampled waveforms must be on a uniform grid")
    norm = float(np.real(cumulative_simpson(np.abs(w0) ** 2, x=t)[-1]))
    if not abs(norm - 1) < 1e-3:
        raise DomainError(f"waveform is not normalised: integral |w0|^2 = {norm:.6g}")
    alpha_g = math.sqrt(ps / (2 * p.kappa_ex)) * np.asarray(w0, dtype=complex)
    alpha_g_dot = _diff4(alpha_g, h)
    alpha_g_ddot = _diff4(alpha_g_dot, h)
    alpha_e = -(alpha_g_dot + p.kappa * alpha_g) / p.g
    alpha_e_dot = -(alpha_g_ddot + p.kappa * alpha_g_dot) / p.g
    rho_ee, rho_gg = np.abs(alpha_e) ** 2, np.abs(alpha_g) ** 2
    lost = 2 * cumulative_simpson(p.gamma * rho_ee + p.kappa * rho_gg, x=t, initial=0.0)
    rho = 1 - rho_ee - rho_gg - lost
    if np.any(rho <= 0):
        raise ConsistencyError(f"rho_uu <= 0 at t = {t[np.argmin(rho)]:.6g}; lower ps")
    rho_dot = (
        -2 * np.real(np.conj(alpha_e) * alpha_e_dot + np.conj(alpha_g) * alpha_g_dot)
        - 2 * p.gamma * rho_ee
        - 2 * p.kappa * rho_gg
    )
    z = alpha_e_dot + (p.gamma + 1j * detunings.delta_e) * alpha_e - p.g * alpha_g
    y = 1j * detunings.delta_u + rho_dot / (2 * rho)
    return alpha_e, z, y, rho


def drive_detuned(
    p: AtomCavityParams,
    pulse: PulseSpec,
    ps: float,
    d: Detunings,
    w0=None,
    t_st: float | None = None,
    grid=None,
    n: int = DEFAULT_SAMPLES,
    safety: float = SAFETY_FACTOR,
) -> DriveWaveform:
    """Complex drive for arbitrary detunings and, optionally, a sampled output mode.

    Parameters
    ----------
    w0 : array_like, optional
        Complex output mode sampled on ``grid`` (normalised). Defaults to the
        Gaussian of width ``pulse.tau``, for which all derivatives and the
        phase integral are evaluated analytically/adaptively rather than
        from samples.
    t_st : float, optional
        Start of emission, where the phase of alpha_u is zero. Defaults to
        the first grid sample.
    """
    _check_fraction(p, pulse, ps, safety)
    t = _grid_for(pulse, grid, n)
    if t_st is not None and not np.isclose(t_st, t[0], rtol=0, atol=1e-12 * pulse.tau):
        if t_st > t[0]:
            raise DomainError("t_st must not lie after the first grid sample")
        t = np.concatenate([[t_st], t])
        trim = 1
    else:
        trim = 0

    if w0 is None:
        _, _, alpha_e, _, rho, _, z, y = _gaussian_targets(p, pulse, ps, d, t)
        if np.any(rho <= 0):
            raise ConsistencyError(f"rho_uu <= 0 at t = {t[np.argmin(rho)]:.6g}")

        # alpha_e is real for a real mode, so it cancels from the phase rate;
        # this removes the 0/0 at t0 where alpha_e vanishes
        def rate(s):
            _, _, _, _, _, _, zz, yy = _gaussian_targets(p, pulse, ps, d, s)
            return _phase_rate_general(1.0, zz, yy)[0]

        _, den = _phase_rate_general(1.0, z, y)
        _raise_on_singular(t, den)
        try:
            phi_u, _ = cumulative_integral(rate, t, atol=PHASE_ATOL)
        except FloatingPointError as exc:
            raise DomainError(f"phase integrand is singular: {exc}") from None
    else:
        w0 = np.asarray(w0, dtype=complex)
        if trim:
            raise DomainError("t_st before the grid is only supported for the default Gaussian mode")
        if w0.shape != t.shape:
            raise DomainError(f"w0 has {w0.size} samples, grid has {t.size}")
        alpha_e, z, y, rho = _sampled_amplitudes(p, ps, d, t, w0)
        rate, den = _phase_rate_general(alpha_e, z, y)
        _raise_on_singular(t, den)
        phi_u = cumulative_simpson(rate, x=t, initial=0.0)

    magnitude = np.abs(z) / np.sqrt(rho)
    magnitude = np.where(magnitude < CLAMP_RTOL * magnitude.max(), 0.0, magnitude)
    phase = -phi_u + np.unwrap(np.angle(z))
    phase = phase - phase[0]
    sl = slice(trim, None)
    return DriveWaveform(
        grid=t[sl],
        omega_mag=magnitude[sl],
        omega_phase=phase[sl],
        phi_u=phi_u[sl],
        ps=ps,
        meta={"kind": "detuned", "delta_u": d.delta_u, "delta_e": d.delta_e, "safety": safety},
    )


def _raise_on_singular(t, den):
    zero = np.nonzero(den == 0)[0]
    if zero.size:
        i = int(zero[0])
        raise DomainError(
            f"phase-rate denominator Re[conj(alpha_e) z] vanishes at sample {i} (t = {t[i]:.12g}); "
            "shift or resize the grid"
        )


# -- CSV interchange -------------------------------------------------------------

DRIVE_COLUMNS = ("t", "omega_mag", "omega_phase", "re_omega", "im_omega")


def write_drive_csv(drive: DriveWaveform, path: str | Path, units: tuple[str, str] = ("time", "rate")) -> None:
    tu, ru = units
    om = drive.omega
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"t [{tu}]", f"omega_mag [{ru}]", "omega_phase [rad]", f"re_omega [{ru}]", f"im_omega [{ru}]"])
        for row in zip(drive.grid, drive.omega_mag, drive.omega_phase, om.real, om.imag):
            w.writerow([f"{v:.17g}" for v in row])


def read_waveform_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``(t, value)`` or ``(t, re, im)`` columns; a non-numeric first row is a header."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                vals = [float(x) for x in row]
            except ValueError:
                if not rows and lineno == 1:
                    continue
                raise DomainError(f"{path}:{lineno}: non-numeric row {row!r}") from None
            if len(vals) not in (2, 3):
                raise DomainError(f"{path}:{lineno}: expected 2 or 3 columns, got {len(vals)}")
            rows.append(vals)
    if not rows:
        raise DomainError(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DomainError(f"{path}: mixed column counts {sorted(widths)}")
    arr = np.array(rows)
    t = arr[:, 0]
    w = arr[:, 1] if arr.shape[1] == 2 else arr[:, 1] + 1j * arr[:, 2]
    return t, w.astype(complex)
