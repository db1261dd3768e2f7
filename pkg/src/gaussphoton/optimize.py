"""Output-coupler optimisation and two-dimensional parameter sweeps.

In the long-pulse limit the best external decay rate has a closed form in
the internal cooperativity. At finite pulse widths the Gaussian bound is
maximised numerically: a log-spaced scan over ``kappa_ex`` locates the best
sample, and golden-section search refines inside the neighbouring bracket.
The scan does not rely on the bound being unimodal.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import analytic
from .errors import DomainError
from .params import (
    AtomCavityParams,
    PhysicalCavity,
    PulseSpec,
    Regime,
    classify_regime,
    physical_to_rates,
    regime_labels,
)

GOLDEN = (math.sqrt(5) - 1) / 2
CELLS_PER_DECADE = 50
SCAN_POINTS = 200
REFINE_RTOL = 1e-6
RIDGE_JUMP = 0.5  # relative change between adjacent ridge cells flagged as a jump
TRANSMITTANCE_TOL = 1.5  # accepted factor between actual and recommended T_ex


# -- optimum of the external decay rate ---------------------------------------


@dataclass(frozen=True)
class Optimum:
    """Best external decay rate and how it was found.

    For numeric optima ``bracket`` holds the scan samples around the best
    one and ``ps_at_bracket`` the bound there; ``boundary_hit`` is set when
    the best scan sample sits on an end of ``bounds``.
    """

    kappa_ex_opt: float
    ps_opt: float
    method: str
    bounds: tuple[float, float] | None = None
    bracket: tuple[float, float] | None = None
    ps_at_bracket: tuple[float, float] | None = None
    iterations: int = 0
    boundary_hit: bool = False


def kex_opt_adiabatic(kappa_in: float, c_in: float) -> Optimum:
    """Closed-form optimum ``kappa_in * sqrt(2 C_in + 1)`` of the long-pulse bound."""
    if not kappa_in > 0:
        raise DomainError(f"kappa_in must be positive (C_in is unbounded otherwise), got {kappa_in}")
    if not c_in > 0:
        raise DomainError(f"c_in must be positive, got {c_in}")
    root = math.sqrt(2 * c_in + 1)
    return Optimum(kappa_ex_opt=kappa_in * root, ps_opt=1 - 2 / (1 + root), method="closed_form")


def golden_section_max(f, lo, hi, width: float, max_iter: int = 200):
    """Elementwise golden-section maximisation of a vectorised ``f``.

    ``lo`` and ``hi`` are arrays of bracket ends. Iterates until every
    bracket is narrower than ``width``. Returns ``(x, f(x), iterations)``.
    """
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while it < max_iter and np.max(b - a) > width:
        left = fc >= fd
        # the maximum lies in [a, d] when the left probe wins, else in [c, b]
        a, b = np.where(left, a, c), np.where(left, d, b)
        c_new = np.where(left, b - GOLDEN * (b - a), d)
        d_new = np.where(left, c, a + GOLDEN * (b - a))
        fp = f(np.where(left, c_new, d_new))
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        c, d = c_new, d_new
        it += 1
    take_c = fc >= fd
    return np.where(take_c, c, d), np.where(take_c, fc, fd), it


@dataclass(frozen=True)
class _KexScan:
    kappa_ex: np.ndarray
    ps: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    ps_lo: np.ndarray
    ps_hi: np.ndarray
    boundary: np.ndarray
    iterations: int


def _optimize_kex(g, gamma, kappa_in, tau, lo, hi, n_scan=SCAN_POINTS, rtol=REFINE_RTOL) -> _KexScan:
    """Vectorised scan-then-refine over arrays of problems (flattened)."""
    g, gamma, kappa_in, tau, lo, hi = (
        a.ravel() for a in np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (g, gamma, kappa_in, tau, lo, hi)))
    )
    rows = np.arange(g.size)
    x_lo, x_hi = np.log(lo), np.log(hi)
    xs = x_lo[:, None] + np.linspace(0.0, 1.0, n_scan)[None, :] * (x_hi - x_lo)[:, None]
    col = (g[:, None], gamma[:, None], kappa_in[:, None])
    ps = analytic.ps_max_array(*col, np.exp(xs), tau[:, None])
    best = np.argmax(ps, axis=1)
    il, ir = np.maximum(best - 1, 0), np.minimum(best + 1, n_scan - 1)
    a, b = xs[rows, il], xs[rows, ir]

    def f(x):
        return analytic.ps_max_array(g, gamma, kappa_in, np.exp(x), tau)

    x_ref, ps_ref, iters = golden_section_max(f, a, b, width=math.log1p(rtol))
    x_best, ps_best = xs[rows, best], ps[rows, best]
    use_ref = ps_ref >= ps_best
    x_best, ps_best = np.where(use_ref, x_ref, x_best), np.where(use_ref, ps_ref, ps_best)
    # the long-pulse optimum competes too, so the result never falls below it
    with np.errstate(divide="ignore", invalid="ignore"):
        x_seed = np.log(kappa_in * np.sqrt(g * g / (kappa_in * gamma) + 1.0))
    inside = (kappa_in > 0) & (x_seed >= x_lo) & (x_seed <= x_hi)
    ps_seed = np.where(inside, f(np.where(inside, x_seed, x_lo)), -np.inf)
    use_seed = ps_seed > ps_best
    return _KexScan(
        kappa_ex=np.exp(np.where(use_seed, x_seed, x_best)),
        ps=np.where(use_seed, ps_seed, ps_best),
        lo=np.exp(a),
        hi=np.exp(b),
        ps_lo=ps[rows, il],
        ps_hi=ps[rows, ir],
        boundary=(best == 0) | (best == n_scan - 1),
        iterations=iters,
    )


def kex_opt_numeric(
    g: float,
    gamma: float,
    kappa_in: float,
    pulse: PulseSpec,
    bounds: tuple[float, float],
    n_scan: int = SCAN_POINTS,
    rtol: float = REFINE_RTOL,
) -> Optimum:
    """Maximise the Gaussian success-probability bound over ``kappa_ex``.

    A log-spaced scan of ``n_scan`` points over ``bounds`` picks the best
    sample; golden-section search then narrows the bracket formed by its
    neighbours to relative width ``rtol``.
    """
    lo, hi = (float(x) for x in bounds)
    if not (math.isfinite(lo) and math.isfinite(hi) and 0 < lo < hi):
        raise DomainError(f"bounds must satisfy 0 < lo < hi, got {bounds}")
    if n_scan < 3:
        raise DomainError(f"n_scan must be at least 3, got {n_scan}")
    # validates the remaining rates
    AtomCavityParams(g, gamma, kappa_in, lo)
    s = _optimize_kex(g, gamma, kappa_in, pulse.tau, lo, hi, n_scan, rtol)
    return Optimum(
        kappa_ex_opt=float(s.kappa_ex[0]),
        ps_opt=float(s.ps[0]),
        method="numeric",
        bounds=(lo, hi),
        bracket=(float(s.lo[0]), float(s.hi[0])),
        ps_at_bracket=(float(s.ps_lo[0]), float(s.ps_hi[0])),
        iterations=s.iterations,
        boundary_hit=bool(s.boundary[0]),
    )


# -- sweep grids --------------------------------------------------------------


@dataclass(frozen=True)
class AxisSpec:
    """One sweep axis: ``count`` samples from ``min`` to ``max`` on a linear or log scale."""

    name: str
    scale: str
    min: float
    max: float
    count: int
    unit: str = "1"

    def __post_init__(self):
        if self.scale not in ("linear", "log"):
            raise DomainError(f"axis {self.name}: scale must be 'linear' or 'log', got {self.scale!r}")
        if self.count < 2:
            raise DomainError(f"axis {self.name}: count must be at least 2, got {self.count}")
        if not (math.isfinite(self.min) and math.isfinite(self.max) and self.min < self.max):
            raise DomainError(f"axis {self.name}: need finite min < max, got {self.min}, {self.max}")
        if self.scale == "log" and self.min <= 0:
            raise DomainError(f"axis {self.name}: log axes need positive bounds")

    @classmethod
    def per_decade(cls, name, lo, hi, per_decade=CELLS_PER_DECADE, unit="1") -> AxisSpec:
        count = max(2, int(round(per_decade * math.log10(hi / lo))) + 1)
        return cls(name, "log", lo, hi, count, unit)

    @classmethod
    def parse(cls, text: str) -> AxisSpec:
        """Build from ``name:scale:min:max:count``."""
        parts = text.split(":")
        if len(parts) != 5:
            raise DomainError(f"axis spec must be name:scale:min:max:count, got {text!r}")
        name, scale, lo, hi, count = parts
        try:
            return cls(name, scale, float(lo), float(hi), int(count))
        except ValueError:
            raise DomainError(f"axis spec has a non-numeric field: {text!r}") from None

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)

    def as_dict(self) -> dict:
        return {"name": self.name, "scale": self.scale, "min": self.min, "max": self.max,
                "count": self.count, "unit": self.unit}


@dataclass
class SweepGrid:
    """Results of a two-axis sweep, indexed ``[i_axis1, i_axis2]``.

    ``extra`` holds further per-cell arrays, ``overlays`` reference curves
    and ``diagnostics`` anything noteworthy found while sweeping.
    """

    name: str
    axis1: AxisSpec
    axis2: AxisSpec
    fixed: dict
    ps_max: np.ndarray
    regime: np.ndarray
    kappa_ex_opt: np.ndarray | None = None
    extra: dict = field(default_factory=dict)
    overlays: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    rate_unit: str = "gamma"

    def __post_init__(self):
        shape = (self.axis1.count, self.axis2.count)
        arrays = {"ps_max": self.ps_max, "regime": self.regime, **self.extra}
        if self.kappa_ex_opt is not None:
            arrays["kappa_ex_opt"] = self.kappa_ex_opt
        for key, arr in arrays.items():
            if np.shape(arr) != shape:
                raise DomainError(f"sweep result {key!r} has shape {np.shape(arr)}, expected {shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.axis1.count, self.axis2.count)

    def column_units(self) -> dict[str, str]:
        units = {
            self.axis1.name: self.axis1.unit,
            self.axis2.name: self.axis2.unit,
            "ps_max": "1",
            "kappa_ex_opt": self.rate_unit,
            "regime": "",
        }
        for key in self.extra:
            units[key] = "1" if not key.startswith("kappa") else self.rate_unit
        return units

    def rows(self):
        """Yield long-format rows in axis1-major order."""
        v1, v2 = self.axis1.values(), self.axis2.values()
        kex = self.kappa_ex_opt
        for i in range(self.shape[0]):
            for j in range(self.shape[1]):
                row = [v1[i], v2[j], self.ps_max[i, j], np.nan if kex is None else kex[i, j], self.regime[i, j]]
                row += [self.extra[k][i, j] for k in self.extra]
                yield row

    def to_csv(self, path: str | Path) -> None:
        units = self.column_units()
        names = [self.axis1.name, self.axis2.name, "ps_max", "kappa_ex_opt", "regime", *self.extra]
        header = [f"{n} [{units[n]}]" if units[n] else n for n in names]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in self.rows():
                w.writerow([v if isinstance(v, str) else f"{float(v):.17g}" for v in row])

    def metadata(self) -> dict:
        return {
            "sweep": self.name,
            "axis1": self.axis1.as_dict(),
            "axis2": self.axis2.as_dict(),
            "fixed": self.fixed,
            "rate_unit": self.rate_unit,
            "overlays": {k: _jsonable(v) for k, v in self.overlays.items()},
            "diagnostics": {k: _jsonable(v) for k, v in self.diagnostics.items()},
        }

    def write_metadata(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _map_rows(fn, n_rows: int, workers: int):
    """Apply ``fn`` to each row index; results come back in row order."""
    if workers <= 1:
        return [fn(i) for i in range(n_rows)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_rows)))


def _ridge_jumps(kex: np.ndarray, axis_values: np.ndarray) -> list[dict]:
    rel = np.abs(np.diff(kex)) / np.minimum(kex[:-1], kex[1:])
    return [
        {"between": [float(axis_values[i]), float(axis_values[i + 1])], "relative_change": float(rel[i])}
        for i in np.nonzero(rel >= RIDGE_JUMP)[0]
    ]


# -- figure sweeps ------------------------------------------------------------


def default_fig2_grid(per_decade: int = CELLS_PER_DECADE) -> tuple[AxisSpec, AxisSpec]:
    return (
        AxisSpec.per_decade("gamma_tau", 1e-3, 1e4, per_decade),
        AxisSpec.per_decade("g_over_kappa", 1e-2, 1e2, per_decade),
    )


def sweep_fig2(
    c: float = 10.0,
    eta_esc: float = 0.95,
    grid: tuple[AxisSpec, AxisSpec] | None = None,
    gamma: float = 1.0,
) -> SweepGrid:
    """Bound over (gamma*tau, g/kappa) at fixed cooperativity and escape efficiency.

    Overlays give the two pulse widths ``1/kappa`` and ``kappa/g^2`` (times
    gamma) along the g/kappa axis.
    """
    if not (c > 0 and 0 < eta_esc <= 1):
        raise DomainError(f"need c > 0 and 0 < eta_esc <= 1, got {c}, {eta_esc}")
    ax1, ax2 = grid or default_fig2_grid()
    tau = ax1.values()[:, None] / gamma
    r = ax2.values()
    g = 2.0 * c * gamma / r
    kappa = g / r
    kappa_ex = eta_esc * kappa
    kappa_in = kappa - kappa_ex
    ps = analytic.ps_max_array(g[None, :], gamma, kappa_in[None, :], kappa_ex[None, :], tau)
    regime = np.broadcast_to(regime_labels(g, gamma, kappa)[None, :], ps.shape).copy()
    return SweepGrid(
        name="fig2",
        axis1=ax1,
        axis2=ax2,
        fixed={"c": c, "eta_esc": eta_esc, "gamma": gamma},
        ps_max=ps,
        regime=regime,
        overlays={
            "g_over_kappa": r,
            "gamma_tau_one_over_kappa": gamma / kappa,
            "gamma_tau_kappa_over_g2": gamma * kappa / g**2,
            "ps_ub": float(analytic.ps_ub_array(g[0], gamma, kappa_in[0], kappa_ex[0])),
        },
    )


def default_fig6_grid(per_decade: int = CELLS_PER_DECADE) -> tuple[AxisSpec, AxisSpec]:
    return (
        AxisSpec.per_decade("gamma_tau", 1e-3, 1e3, per_decade),
        AxisSpec.per_decade("kex_over_kin", 1e-1, 1e3, per_decade),
    )


def _ub_opt_rates(c_in: float, kappa_in: float, gamma: float) -> tuple[float, float]:
    """Coupling and total decay rate at the adiabatic optimum."""
    g = math.sqrt(2.0 * c_in * kappa_in * gamma)
    kappa = kappa_in * (1.0 + math.sqrt(2.0 * c_in + 1.0))
    return g, kappa


def sweep_fig6(
    c_in: float = 200.0,
    kappa_in_over_gamma: float = 1.0,
    grid: tuple[AxisSpec, AxisSpec] | None = None,
    gamma: float = 1.0,
    workers: int = 1,
) -> SweepGrid:
    """Bound over (gamma*tau, kappa_ex/kappa_in) at fixed internal cooperativity.

    The per-tau ridge is refined beyond the grid with :func:`kex_opt_numeric`
    restricted to the kappa_ex range of the grid and stored per cell in
    ``kappa_ex_opt``. Jumps in the ridge are reported as diagnostics.
    """
    if not (c_in > 0 and kappa_in_over_gamma > 0):
        raise DomainError(f"need c_in > 0 and kappa_in/gamma > 0, got {c_in}, {kappa_in_over_gamma}")
    ax1, ax2 = grid or default_fig6_grid()
    kappa_in = kappa_in_over_gamma * gamma
    g = math.sqrt(2.0 * c_in * kappa_in * gamma)
    taus = ax1.values() / gamma
    ratios = ax2.values()
    kex = ratios * kappa_in

    def row(i):
        return analytic.ps_max_array(g, gamma, kappa_in, kex, taus[i])

    ps = np.vstack(_map_rows(row, ax1.count, workers))
    scan = _optimize_kex(g, gamma, kappa_in, taus, kex[0], kex[-1])
    ridge = scan.kappa_ex
    regime = np.broadcast_to(regime_labels(g, gamma, kappa_in + kex)[None, :], ps.shape).copy()
    g_ub, kappa_ub = _ub_opt_rates(c_in, kappa_in, gamma)
    root = math.sqrt(2.0 * c_in + 1.0)
    ps_at_ub = analytic.ps_max_array(g, gamma, kappa_in, root * kappa_in, taus)
    return SweepGrid(
        name="fig6",
        axis1=ax1,
        axis2=ax2,
        fixed={"c_in": c_in, "kappa_in_over_gamma": kappa_in_over_gamma, "gamma": gamma, "g": g, "kappa_in": kappa_in},
        ps_max=ps,
        regime=regime,
        kappa_ex_opt=np.broadcast_to(ridge[:, None], ps.shape).copy(),
        extra={"ps_opt": np.broadcast_to(scan.ps[:, None], ps.shape).copy()},
        overlays={
            "ridge_kex_over_kin": ridge / kappa_in,
            "ridge_ps": scan.ps,
            "ps_at_closed_form_kex": ps_at_ub,
            "closed_form_kex_over_kin": root,
            "gamma_tau_c": gamma * max(1.0 / kappa_ub, kappa_ub / g_ub**2),
        },
        diagnostics={
            "ridge_jumps": _ridge_jumps(ridge, ax1.values()),
            "ridge_boundary_hits": [float(x) for x in ax1.values()[scan.boundary]],
        },
    )


def default_fig7_grid(alpha_loss: float, gamma: float = 1.0, per_decade: int = CELLS_PER_DECADE):
    """tau from 1e-3 to 1e3 over gamma, L_cav covering kappa_in/gamma from 100 to 0.01."""
    return (
        AxisSpec.per_decade("gamma_tau", 1e-3, 1e3, per_decade),
        AxisSpec.per_decade("gamma_l_cav", alpha_loss / (4 * 100.0), alpha_loss / (4 * 0.01), per_decade),
    )


def sweep_fig7(
    c_in: float = 200.0,
    grid: tuple[AxisSpec, AxisSpec] | None = None,
    alpha_loss: float = 1e-3,
    gamma: float = 1.0,
    t_ex_min: float = 1e-9,
    workers: int = 1,
) -> SweepGrid:
    """Transmittance optimum over (gamma*tau, gamma*L_cav) at fixed C_in.

    The mode area follows from ``A_eff * alpha_loss = 1/C_in``. Each cell
    maximises the bound over ``T_ex`` in ``[t_ex_min, 1]``; the optimum is
    stored as ``t_ex_opt`` and ``ps_opt`` (identical to ``ps_max`` here).
    """
    if not c_in > 0:
        raise DomainError(f"c_in must be positive, got {c_in}")
    if not 0 < alpha_loss < 1:
        raise DomainError(f"alpha_loss must lie in (0, 1), got {alpha_loss}")
    ax1, ax2 = grid or default_fig7_grid(alpha_loss, gamma)
    a_eff = 1.0 / (c_in * alpha_loss)
    taus = ax1.values() / gamma
    lengths = ax2.values() / gamma
    g = np.sqrt(gamma / (2.0 * a_eff * lengths))
    kappa_in = alpha_loss / (4.0 * lengths)

    def row(i):
        return _optimize_kex(g, gamma, kappa_in, taus[i], t_ex_min / (4.0 * lengths), 1.0 / (4.0 * lengths))

    scans = _map_rows(row, ax1.count, workers)
    kex = np.vstack([s.kappa_ex for s in scans])
    ps = np.vstack([s.ps for s in scans])
    boundary = np.vstack([s.boundary for s in scans])
    t_ex = kex * 4.0 * lengths[None, :]
    regime = regime_labels(g[None, :], gamma, kappa_in[None, :] + kex)
    kappa_ub = kappa_in * (1.0 + math.sqrt(2.0 * c_in + 1.0))
    return SweepGrid(
        name="fig7",
        axis1=ax1,
        axis2=ax2,
        fixed={"c_in": c_in, "alpha_loss": alpha_loss, "a_eff_tilde": a_eff, "gamma": gamma, "t_ex_min": t_ex_min},
        ps_max=ps,
        regime=regime,
        kappa_ex_opt=kex,
        extra={"t_ex_opt": t_ex, "ps_opt": ps.copy()},
        overlays={
            "gamma_l_cav": ax2.values(),
            "gamma_tau_one_over_kappa_ub_opt": gamma / kappa_ub,
            "gamma_tau_kappa_ub_opt_over_g2": gamma * kappa_ub / g**2,
            "gamma_tau_one_over_g": gamma / g,
            "ps_ub_opt": 1 - 2 / (1 + math.sqrt(2 * c_in + 1)),
        },
        diagnostics={"boundary_cells": int(boundary.sum())},
    )


def sweep_custom(
    axis1: AxisSpec,
    axis2: AxisSpec,
    base: dict[str, float],
    gamma: float = 1.0,
) -> SweepGrid:
    """Bound over two of ``tau, g, gamma, kappa_in, kappa_ex`` with the rest from ``base``.

    Rates are taken in units of ``gamma`` unless ``gamma`` itself is swept.
    """
    names = ("tau", "g", "gamma", "kappa_in", "kappa_ex")
    for ax in (axis1, axis2):
        if ax.name not in names:
            raise DomainError(f"custom axis {ax.name!r} must be one of {', '.join(names)}")
    if axis1.name == axis2.name:
        raise DomainError("custom axes must differ")
    axis1, axis2 = (replace(ax, unit="time" if ax.name == "tau" else "rate") for ax in (axis1, axis2))
    vals = {k: np.asarray(float(base[k])) for k in names if k in base}
    vals.setdefault("gamma", np.asarray(gamma))
    vals[axis1.name] = axis1.values()[:, None]
    vals[axis2.name] = axis2.values()[None, :]
    missing = [k for k in names if k not in vals]
    if missing:
        raise DomainError(f"custom sweep needs values for {', '.join(missing)}")
    if np.any(vals["g"] <= 0) or np.any(vals["gamma"] <= 0) or np.any(vals["kappa_ex"] <= 0) \
            or np.any(vals["kappa_in"] < 0) or np.any(vals["tau"] <= 0):
        raise DomainError("custom sweep reaches non-physical rates or pulse widths")
    ps = analytic.ps_max_array(vals["g"], vals["gamma"], vals["kappa_in"], vals["kappa_ex"], vals["tau"])
    shape = (axis1.count, axis2.count)
    ps = np.broadcast_to(ps, shape).copy()
    regime = np.broadcast_to(
        regime_labels(vals["g"], vals["gamma"], vals["kappa_in"] + vals["kappa_ex"]), shape
    ).copy()
    fixed = {k: float(v) for k, v in vals.items() if np.ndim(v) == 0}
    return SweepGrid(
        name="custom", axis1=axis1, axis2=axis2, fixed=fixed, ps_max=ps, regime=regime, rate_unit="rate"
    )


# -- design conditions for a physical cavity ----------------------------------


@dataclass(frozen=True)
class Condition:
    """One design rule; ``margin`` is a ratio, and ``passed`` its verdict."""

    name: str
    passed: bool
    margin: float
    detail: str


@dataclass(frozen=True)
class DesignReport:
    cavity: PhysicalCavity
    rates: AtomCavityParams
    regime: Regime
    t_ex_recommended: float
    t_ex_exact_opt: float
    tau_c: float
    tau_c_branch: str
    conditions: tuple[Condition, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.conditions)


def design_conditions(cav: PhysicalCavity, gamma: float = 1.0, tau: float | None = None) -> DesignReport:
    """Check a cavity against the three high-efficiency, short-pulse design rules.

    (i) output coupler near ``sqrt(2 alpha_loss / A_eff)``; (ii) cavity
    short enough that ``L_cav <= alpha_loss / (4 gamma)``; (iii) pulse width
    above the critical width, using the branch that matches the coupling
    regime. Rule (iii) is reported as not evaluated when ``tau`` is None.
    """
    rates = physical_to_rates(cav, gamma)
    c_in = cav.internal_cooperativity
    t_rec = math.sqrt(2.0 * cav.alpha_loss / cav.a_eff_tilde)
    t_exact = cav.alpha_loss * math.sqrt(2.0 * c_in + 1.0)
    ratio = cav.t_ex / t_rec
    cond1 = Condition(
        "output_coupler",
        1.0 / TRANSMITTANCE_TOL <= ratio <= TRANSMITTANCE_TOL,
        ratio,
        f"T_ex / sqrt(2 alpha_loss / A_eff) = {ratio:.6g} (accepted within a factor {TRANSMITTANCE_TOL:g})",
    )
    l_max = cav.alpha_loss / (4.0 * gamma)
    cond2 = Condition(
        "cavity_length",
        cav.l_cav <= l_max,
        l_max / cav.l_cav,
        f"(alpha_loss / (4 gamma)) / L_cav = {l_max / cav.l_cav:.6g}",
    )
    regime = classify_regime(rates)
    inv_kappa, kappa_g2 = 1.0 / rates.kappa, rates.kappa / rates.g**2
    if regime is Regime.PURCELL:
        branch, tau_c = "kappa/g^2", kappa_g2
    elif regime in (Regime.STRONG, Regime.WEAK_HIGH_C):
        branch, tau_c = "1/kappa", inv_kappa
    else:
        branch, tau_c = ("1/kappa", inv_kappa) if inv_kappa >= kappa_g2 else ("kappa/g^2", kappa_g2)
    if tau is None:
        cond3 = Condition("pulse_width", False, math.nan, "no pulse width given; not evaluated")
    else:
        if not (math.isfinite(tau) and tau > 0):
            raise DomainError(f"tau must be positive, got {tau}")
        cond3 = Condition(
            "pulse_width", tau > tau_c, tau / tau_c, f"tau / tau_c = {tau / tau_c:.6g} with tau_c = {branch}"
        )
    return DesignReport(
        cavity=cav,
        rates=rates,
        regime=regime,
        t_ex_recommended=t_rec,
        t_ex_exact_opt=t_exact,
        tau_c=tau_c,
        tau_c_branch=branch,
        conditions=(cond1, cond2, cond3),
    )
