"""Forward integration of the single-excitation amplitude equations.

    d alpha_u/dt = -i delta_u alpha_u - conj(Omega) alpha_e
    d alpha_e/dt = -(gamma + i delta_e) alpha_e + Omega alpha_u + g alpha_g
    d alpha_g/dt = -kappa alpha_g - g alpha_e

The output field is not evolved; it is reconstructed from the cavity
amplitude through ``w_out = sqrt(2 kappa_ex) alpha_g``. This module knows
nothing about the closed forms and serves as the brute-force check for them.
"""

from __future__ import annotations

import bisect
import cmath
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.interpolate import CubicSpline

from .drive import DriveWaveform
from .errors import DomainError, StiffnessError
from .params import AtomCavityParams, Detunings

TOL_RANGE = (1e-12, 1e-4)


@dataclass(frozen=True)
class Trajectory:
    """Sampled amplitudes plus running emitted/decayed probabilities.

    ``emitted`` is 2 kappa_ex times the running integral of |alpha_g|^2 and
    ``decayed`` 2 gamma times that of |alpha_e|^2; both are integrated
    alongside the amplitudes. Internal cavity loss is
    ``emitted * kappa_in / kappa_ex``.
    """

    grid: np.ndarray
    alpha_u: np.ndarray
    alpha_e: np.ndarray
    alpha_g: np.ndarray
    emitted: np.ndarray
    decayed: np.ndarray
    params: AtomCavityParams
    detunings: Detunings
    nfev: int = 0

    @property
    def rho_uu(self) -> np.ndarray:
        return np.abs(self.alpha_u) ** 2

    @property
    def rho_ee(self) -> np.ndarray:
        return np.abs(self.alpha_e) ** 2

    @property
    def rho_gg(self) -> np.ndarray:
        return np.abs(self.alpha_g) ** 2

    def norm_budget(self) -> np.ndarray:
        """Populations plus everything lost so far; identically 1 for exact dynamics."""
        p = self.params
        return self.rho_uu + self.rho_ee + self.rho_gg + self.emitted * p.kappa / p.kappa_ex + self.decayed

    def to_csv(self, path: str | Path, units: tuple[str, str] = ("time", "rate")) -> None:
        cols = {
            f"t [{units[0]}]": self.grid,
            "re_alpha_u [1]": self.alpha_u.real,
            "im_alpha_u [1]": self.alpha_u.imag,
            "re_alpha_e [1]": self.alpha_e.real,
            "im_alpha_e [1]": self.alpha_e.imag,
            "re_alpha_g [1]": self.alpha_g.real,
            "im_alpha_g [1]": self.alpha_g.imag,
            "rho_uu [1]": self.rho_uu,
            "rho_ee [1]": self.rho_ee,
            "rho_gg [1]": self.rho_gg,
            "emitted [1]": self.emitted,
            "decayed [1]": self.decayed,
        }
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for row in zip(*cols.values()):
                w.writerow([f"{v:.17g}" for v in row])


class _DriveInterpolant:
    """Cubic interpolation of a complex drive with its mean phase ramp removed.

    A drive whose phase winds linearly (a two-photon detuning) would alias
    on a coarse grid if Re/Im were splined directly, so the spline is taken
    of ``Omega * exp(-i w t)`` and the carrier is restored on evaluation.
    Evaluation returns the drive seen in a frame rotating at ``frame_rate``
    about ``frame_origin``: ``Omega(t) * exp(-i frame_rate (t - frame_origin))``.
    """

    def __init__(self, drive: DriveWaveform, frame_rate: float = 0.0, frame_origin: float = 0.0):
        t = drive.grid
        # the drive phase winds opposite to the |u> phase
        carrier = -float(drive.phi_u[-1] - drive.phi_u[0]) / float(t[-1] - t[0])
        self.t0 = float(t[0])
        env = drive.omega_mag * np.exp(1j * (drive.omega_phase - carrier * (t - self.t0)))
        spline = CubicSpline(t, env)
        self.knots = t.tolist()
        self.coef = [spline.c[k].tolist() for k in range(4)]
        self.last = len(self.knots) - 2
        self.residual = carrier - frame_rate
        self.offset = cmath.exp(-1j * frame_rate * (self.t0 - frame_origin))

    def __call__(self, t: float) -> complex:
        i = bisect.bisect_right(self.knots, t) - 1
        i = 0 if i < 0 else (self.last if i > self.last else i)
        dx = t - self.knots[i]
        c0, c1, c2, c3 = (c[i] for c in self.coef)
        env = ((c0 * dx + c1) * dx + c2) * dx + c3
        if self.residual:
            env *= cmath.exp(1j * self.residual * (t - self.t0))
        return env * self.offset


def integrate(
    p: AtomCavityParams,
    d: Detunings,
    drive: DriveWaveform,
    t_span: tuple[float, float] | None = None,
    tol: float = 1e-10,
    initial: tuple[complex, complex, complex] = (1.0, 0.0, 0.0),
    t_eval=None,
) -> Trajectory:
    """Integrate the amplitude equations under ``drive``.

    Uses an embedded 8(5,3) Runge-Kutta pair with relative tolerance ``tol``
    (absolute ``tol * 1e-2``). Output is sampled on the drive grid inside
    ``t_span`` unless ``t_eval`` is given.

    Raises
    ------
    StiffnessError
        If the step size collapses before reaching the end of ``t_span``.
    """
    lo, hi = TOL_RANGE
    if not lo <= tol <= hi:
        raise DomainError(f"tol must lie in [{lo:g}, {hi:g}], got {tol:g}")
    grid = drive.grid
    if t_span is None:
        t_span = (float(grid[0]), float(grid[-1]))
    t_a, t_b = t_span
    if not (grid[0] <= t_a < t_b <= grid[-1]):
        raise DomainError(f"t_span {t_span} not inside the drive grid [{grid[0]:g}, {grid[-1]:g}]")
    if t_eval is None:
        inside = grid[(grid >= t_a) & (grid <= t_b)]
        t_eval = np.unique(np.concatenate([[t_a], inside, [t_b]]))

    # alpha_u is carried in a frame rotating with the two-photon detuning,
    # which removes its free precession from the step-size control
    omega = _DriveInterpolant(drive, frame_rate=d.delta_u, frame_origin=t_a)
    g, gamma, kappa = p.g, p.gamma, p.kappa
    two_kex, two_gamma = 2.0 * p.kappa_ex, 2.0 * gamma
    de = gamma + 1j * d.delta_e

    def rhs(t, y):
        a_u, a_e, a_g = y[0], y[1], y[2]
        om = omega(t)
        return np.array(
            [
                -om.conjugate() * a_e,
                -de * a_e + om * a_u + g * a_g,
                -kappa * a_g - g * a_e,
                two_kex * (a_g.real**2 + a_g.imag**2),
                two_gamma * (a_e.real**2 + a_e.imag**2),
            ]
        )

    y0 = np.array([*initial, 0.0, 0.0], dtype=complex)
    sol = solve_ivp(rhs, (t_a, t_b), y0, method="DOP853", t_eval=t_eval, rtol=tol, atol=tol * 1e-2)
    if sol.status != 0:
        t_fail = float(sol.t[-1]) if sol.t.size else t_a
        raise StiffnessError(f"integration failed: {sol.message}", t_fail)
    y = sol.y
    return Trajectory(
        grid=sol.t,
        alpha_u=y[0] * np.exp(-1j * d.delta_u * (sol.t - t_a)),
        alpha_e=y[1],
        alpha_g=y[2],
        emitted=y[3].real,
        decayed=y[4].real,
        params=p,
        detunings=d,
        nfev=sol.nfev,
    )


def success_probability(traj: Trajectory, kappa_ex: float) -> float:
    """2 kappa_ex times the integral of |alpha_g|^2 over the sampled window."""
    return float(2.0 * kappa_ex * simpson(np.abs(traj.alpha_g) ** 2, x=traj.grid))


def output_waveform(traj: Trajectory, kappa_ex: float) -> np.ndarray:
    """Emitted temporal mode sqrt(2 kappa_ex) alpha_g; its squared norm is P_S."""
    return np.sqrt(2.0 * kappa_ex) * traj.alpha_g


def mode_overlap(a, b, t=None) -> float:
    """|<a|b>|^2 / (<a|a><b|b>) for sampled waveforms on a common grid.

    Without ``t`` the samples are taken as uniformly spaced.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DomainError(f"waveforms must share a grid, got shapes {a.shape} and {b.shape}")

    def integral(f):
        return simpson(f, x=t) if t is not None else simpson(f)

    na = integral(np.abs(a) ** 2)
    nb = integral(np.abs(b) ** 2)
    if na <= 0 or nb <= 0:
        raise DomainError("mode overlap undefined for a zero-norm waveform")
    cross = integral(np.conj(a) * b)
    return float(min(1.0, abs(cross) ** 2 / (na * nb)))


def derivative4(values, t) -> np.ndarray:
    """Fourth-order finite-difference derivative on a uniform grid."""
    from .drive import _diff4

    t = np.asarray(t, dtype=float)
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=0):
        raise DomainError("derivative4 needs a uniform grid")
    return _diff4(np.asarray(values), h)


def dissipation_residual(traj: Trajectory) -> float:
    """Relative mismatch of d/dt(total population) against the loss rates.

    Finite differences are taken on the stored samples, so the grid must be
    uniform.
    """
    p = traj.params
    total = traj.rho_uu + traj.rho_ee + traj.rho_gg
    lhs = derivative4(total, traj.grid)
    rhs = -2 * p.gamma * traj.rho_ee - 2 * p.kappa * traj.rho_gg
    scale = np.max(np.abs(rhs))
    if scale == 0:
        return float(np.max(np.abs(lhs)))
    return float(np.max(np.abs(lhs - rhs)) / scale)
