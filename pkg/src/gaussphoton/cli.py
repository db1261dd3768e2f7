"""Command-line front end.

Every command writes plain CSV/JSON files into ``--out`` together with a
``run_manifest.json`` listing them with SHA-256 digests, and prints a short
summary on stdout.

Exit codes: 0 success, 1 usage error, 2 domain or numerical error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, analytic, drive, optimize, simulate
from .errors import DomainError, StiffnessError
from .params import (
    AtomCavityParams,
    Detunings,
    PhysicalCavity,
    PulseSpec,
    classify_regime,
    load_config,
    resolve_from_ratios,
)

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3
INTEGRATOR_TOL = 1e-10
VERIFY_TOL = 1e-3
DENSIFY = 4

# representative points at C = 10, eta_esc = 0.95, named after their regime
PRESETS = {
    "purcell": 0.1,
    "intermediate": 1.0,
    "strong": 10.0,
    "weak": 100.0,
}
PRESET_C, PRESET_ETA = 10.0, 0.95


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return "nan"
    return f"{float(v):.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class Run:
    """Output directory, unit labels and the manifest of one invocation."""

    def __init__(self, command: str, args: argparse.Namespace, argv: list[str]):
        self.command = command
        self.argv = argv
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: list[Path] = []
        self.resolved: dict = {}
        self.gamma_units = bool(getattr(args, "gamma_units", False))
        self.time_unit = "1/gamma" if self.gamma_units else "time"
        self.rate_unit = "gamma" if self.gamma_units else "rate"

    def path(self, name: str) -> Path:
        p = self.out / name
        self.files.append(p)
        return p

    def write_manifest(self) -> Path:
        manifest = {
            "command": self.command,
            "argv": self.argv,
            "parameters": self.resolved,
            "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "files": [
                {"path": f.name, "sha256": _sha256(f), "bytes": f.stat().st_size} for f in self.files
            ],
        }
        path = self.out / "run_manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


# -- parameter resolution -------------------------------------------------------


def _parse_taus(text: str) -> list[float]:
    """``a,b,c`` or a geometric range ``lo:hi:count``."""
    try:
        if ":" in text:
            lo, hi, count = text.split(":")
            lo, hi, n = float(lo), float(hi), int(count)
            if not (lo > 0 and hi > lo and n >= 2):
                raise UsageError(f"--tau range needs 0 < lo < hi and count >= 2, got {text!r}")
            return list(np.geomspace(lo, hi, n))
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--tau must be a comma list or lo:hi:count, got {text!r}") from None


def _values(args) -> dict[str, float]:
    """Preset, then config file, then explicit flags; later sources win."""
    vals: dict[str, float] = {}
    if getattr(args, "preset", None):
        p = resolve_from_ratios(PRESETS[args.preset], PRESET_C, PRESET_ETA)
        vals.update(g=p.g, gamma=p.gamma, kappa_in=p.kappa_in, kappa_ex=p.kappa_ex)
    if getattr(args, "config", None):
        vals.update(load_config(args.config))
    for key in ("g", "gamma", "kappa_in", "kappa_ex", "a_eff_tilde", "l_cav", "alpha_loss", "t_ex"):
        v = getattr(args, key, None)
        if v is not None:
            vals[key] = v
    if getattr(args, "detuning_u", None) is not None:
        vals["delta_u"] = args.detuning_u
    if getattr(args, "detuning_e", None) is not None:
        vals["delta_e"] = args.detuning_e
    vals.setdefault("gamma", 1.0)
    return vals


def _rates(vals: dict[str, float], run: Run) -> AtomCavityParams:
    missing = [k for k in ("g", "kappa_in", "kappa_ex") if k not in vals]
    if missing:
        raise UsageError(f"missing parameter(s) {', '.join(missing)}: use --preset, --config or flags")
    p = AtomCavityParams(vals["g"], vals["gamma"], vals["kappa_in"], vals["kappa_ex"])
    if run.gamma_units:
        p = p.scaled(1.0 / p.gamma)
    run.resolved.update(g=p.g, gamma=p.gamma, kappa_in=p.kappa_in, kappa_ex=p.kappa_ex)
    return p


def _taus(args, vals, p: AtomCavityParams, run: Run, single: bool = False) -> list[float]:
    if args.tau is not None:
        taus = _parse_taus(args.tau)
    elif "tau" in vals:
        taus = [vals["tau"]]
    else:
        raise UsageError("missing pulse width: give --tau or tau in the config file")
    if not taus:
        raise UsageError("--tau is empty")
    if args.tau_scale == "tau_c":
        taus = [t * analytic.tau_critical(p) for t in taus]
    elif run.gamma_units and args.tau is None:
        taus = [t * vals["gamma"] for t in taus]
    if single and len(taus) != 1:
        raise UsageError("this command takes a single pulse width")
    for t in taus:
        if not (math.isfinite(t) and t > 0):
            raise DomainError(f"pulse width must be positive, got {t}")
    run.resolved["tau"] = taus if len(taus) > 1 else taus[0]
    run.resolved["tau_scale"] = args.tau_scale
    return taus


def _detunings(vals, p_gamma_abs: float, run: Run) -> Detunings:
    du, de = vals.get("delta_u", 0.0), vals.get("delta_e", 0.0)
    if run.gamma_units:
        du, de = du / p_gamma_abs, de / p_gamma_abs
    run.resolved.update(delta_u=du, delta_e=de)
    return Detunings(du, de)


def _ps_fraction(args, run: Run) -> float:
    f = args.ps_fraction
    if not 0 < f < 1:
        raise DivergenceRefusal(f"--ps-fraction must lie in (0, 1); at 1 the drive diverges (got {f})")
    run.resolved["ps_fraction"] = f
    return f


class DivergenceRefusal(DomainError):
    pass


def _synthesize(p, pulse, ps, d, n):
    if d.resonant:
        return drive.drive_resonant(p, pulse, ps, n=n)
    return drive.drive_detuned(p, pulse, ps, d, n=n)


# -- commands -----------------------------------------------------------------


def cmd_psmax(args, run: Run) -> int:
    vals = _values(args)
    p = _rates(vals, run)
    taus = _taus(args, vals, p, run)
    tu, regime, tau_c = run.time_unit, classify_regime(p).value, analytic.tau_critical(p)
    ub = analytic.ps_ub(p)
    rows = []
    for tau in taus:
        det = analytic.ps_max_details(p, PulseSpec(tau))
        rows.append([tau, det.value, ub, det.value / ub, regime, tau_c, det.t_m])
    header = [f"tau [{tu}]", "ps_max [1]", "ps_ub [1]", "ratio [1]", "regime", f"tau_c [{tu}]", f"t_m [{tu}]"]
    _write_csv(run.path("psmax.csv"), header, rows)
    print(f"regime {regime}, tau_c = {tau_c:.6g}, ps_ub = {ub:.6f}")
    for r in rows:
        print(f"tau = {r[0]:.6g}: ps_max = {r[1]:.6f} (ratio {r[3]:.6f}, t_m = {r[6]:.6g})")
    return EXIT_OK


def cmd_dynamics(args, run: Run) -> int:
    vals = _values(args)
    p = _rates(vals, run)
    (tau,) = _taus(args, vals, p, run, single=True)
    d = _detunings(vals, vals["gamma"], run)
    frac = _ps_fraction(args, run)
    pulse = PulseSpec(tau)
    ps = frac * analytic.ps_max(p, pulse)
    run.resolved.update(ps=ps, grid=args.grid)
    dw = _synthesize(p, pulse, ps, d, args.grid)
    t = dw.grid
    cols = [
        t,
        analytic.rho_uu(t, p, pulse, ps),
        analytic.rho_ee(t, p, pulse, ps),
        analytic.rho_gg(t, p, pulse, ps),
        dw.omega.real,
        dw.omega.imag,
        dw.omega_mag,
    ]
    tu, ru = run.time_unit, run.rate_unit
    header = [f"t [{tu}]", "rho_uu [1]", "rho_ee [1]", "rho_gg [1]",
              f"re_omega [{ru}]", f"im_omega [{ru}]", f"abs_omega [{ru}]"]
    if args.simulate:
        traj = simulate.integrate(p, d, dw, tol=INTEGRATOR_TOL)
        cols += [traj.rho_uu, traj.rho_ee, traj.rho_gg]
        header += ["sim_rho_uu [1]", "sim_rho_ee [1]", "sim_rho_gg [1]"]
    _write_csv(run.path("dynamics.csv"), header, zip(*cols))
    print(f"ps = {ps:.6f} ({frac:g} of ps_max), rho_uu at end = {cols[1][-1]:.6g}, "
          f"max |Omega| = {np.max(dw.omega_mag):.6g} {ru}")
    return EXIT_OK


def cmd_drive(args, run: Run) -> int:
    vals = _values(args)
    p = _rates(vals, run)
    (tau,) = _taus(args, vals, p, run, single=True)
    d = _detunings(vals, vals["gamma"], run)
    frac = _ps_fraction(args, run)
    pulse = PulseSpec(tau)
    ps = frac * analytic.ps_max(p, pulse)
    run.resolved.update(ps=ps, grid=args.grid)
    if args.waveform:
        t_w, w0 = drive.read_waveform_csv(args.waveform)
        run.resolved["waveform"] = str(args.waveform)
        dw = drive.drive_detuned(p, pulse, ps, d, w0=w0, grid=t_w)
    else:
        dw = _synthesize(p, pulse, ps, d, args.grid)
    drive.write_drive_csv(dw, run.path("drive.csv"), units=(run.time_unit, run.rate_unit))
    print(f"drive for ps = {ps:.6f}: {dw.grid.size} samples, max |Omega| = {np.max(dw.omega_mag):.6g}")
    return EXIT_OK


def _verify_one(p, pulse, ps, d, n):
    dw = _synthesize(p, pulse, ps, d, n)
    traj = simulate.integrate(p, d, dw, tol=INTEGRATOR_TOL)
    got = simulate.success_probability(traj, p.kappa_ex)
    target = np.sqrt(ps) * analytic.waveform_w0(traj.grid, pulse)
    overlap = simulate.mode_overlap(simulate.output_waveform(traj, p.kappa_ex), target, traj.grid)
    norm = float(np.max(np.abs(traj.norm_budget() - 1.0)))
    return traj, {"ps_recovered": got, "ps_rel_error": abs(got - ps) / ps, "overlap": overlap,
                  "norm_residual": norm}


def cmd_verify(args, run: Run) -> int:
    vals = _values(args)
    p = _rates(vals, run)
    (tau,) = _taus(args, vals, p, run, single=True)
    d = _detunings(vals, vals["gamma"], run)
    frac = _ps_fraction(args, run)
    tol = VERIFY_TOL if args.tol is None else args.tol
    if not tol > 0:
        raise UsageError(f"--tol must be positive, got {tol}")
    pulse = PulseSpec(tau)
    ps = frac * analytic.ps_max(p, pulse)
    run.resolved.update(ps=ps, grid=args.grid, tol=tol, integrator_tol=INTEGRATOR_TOL)
    n = args.grid
    try:
        traj, res = _verify_one(p, pulse, ps, d, n)
        if 1.0 - res["overlap"] > tol or res["ps_rel_error"] > tol:
            # one retry on a grid four times denser
            n *= DENSIFY
            traj, res = _verify_one(p, pulse, ps, d, n)
    except StiffnessError as exc:
        raise StiffnessError(f"verification run failed: {exc}", exc.t_fail) from None
    run.resolved["grid_used"] = n
    report = {"ps_requested": ps, "grid_used": n, **res}
    checks = {
        "ps_rel_error": res["ps_rel_error"] <= tol,
        "overlap": 1.0 - res["overlap"] <= tol,
        "norm_residual": res["norm_residual"] <= tol,
    }
    if not d.resonant:
        _, ref = _verify_one(p, pulse, ps, Detunings(), n)
        rel = abs(res["ps_recovered"] - ref["ps_recovered"]) / ref["ps_recovered"]
        report["ps_resonant"] = ref["ps_recovered"]
        report["detuned_vs_resonant_rel"] = rel
        checks["detuning_independence"] = rel <= tol
    report["checks"] = checks
    report["passed"] = all(checks.values())
    traj.to_csv(run.path("trajectory.csv"), units=(run.time_unit, run.rate_unit))
    run.path("verify.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for key in ("ps_requested", "ps_recovered", "ps_rel_error", "overlap", "norm_residual"):
        print(f"{key:>24s} = {report[key]:.12g}")
    if "detuned_vs_resonant_rel" in report:
        print(f"{'detuned_vs_resonant_rel':>24s} = {report['detuned_vs_resonant_rel']:.3g}")
    print(("PASS" if report["passed"] else "FAIL") + f" at tolerance {tol:g}")
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def cmd_sweep(args, run: Run) -> int:
    per_decade = args.grid if args.grid is not None else optimize.CELLS_PER_DECADE
    if per_decade < 1:
        raise UsageError("--grid (cells per decade) must be at least 1")
    name = args.name
    run.resolved.update(sweep=name, cells_per_decade=per_decade)
    if name == "fig2":
        grid = optimize.default_fig2_grid(per_decade)
        sw = optimize.sweep_fig2(args.c, args.eta_esc, grid)
    elif name == "fig6":
        grid = optimize.default_fig6_grid(per_decade)
        sw = optimize.sweep_fig6(args.c_in, args.kappa_in_over_gamma, grid, workers=args.workers)
    elif name == "fig7":
        grid = optimize.default_fig7_grid(args.alpha_loss_sweep, per_decade=per_decade)
        sw = optimize.sweep_fig7(args.c_in, grid, alpha_loss=args.alpha_loss_sweep, workers=args.workers)
    else:
        if not (args.axis1 and args.axis2):
            raise UsageError("custom sweeps need --axis1 and --axis2 (name:scale:min:max:count)")
        vals = _values(args)
        base = {k: vals[k] for k in ("g", "gamma", "kappa_in", "kappa_ex", "tau") if k in vals}
        if args.tau is not None:
            taus = _parse_taus(args.tau)
            if len(taus) != 1:
                raise UsageError("custom sweeps take a single --tau")
            base["tau"] = taus[0]
        sw = optimize.sweep_custom(optimize.AxisSpec.parse(args.axis1), optimize.AxisSpec.parse(args.axis2), base)
    run.resolved.update(fixed=sw.fixed, axis1=sw.axis1.as_dict(), axis2=sw.axis2.as_dict())
    sw.to_csv(run.path(f"sweep_{name}.csv"))
    sw.write_metadata(run.path(f"sweep_{name}.json"))
    print(f"{name}: {sw.shape[0]} x {sw.shape[1]} cells, max ps = {np.max(sw.ps_max):.6f}")
    if name == "fig6":
        ridge = sw.overlays["ridge_kex_over_kin"]
        print(f"ridge kappa_ex/kappa_in at largest tau = {ridge[-1]:.6g} "
              f"(closed form {sw.overlays['closed_form_kex_over_kin']:.6g}), "
              f"{len(sw.diagnostics['ridge_jumps'])} ridge jump(s)")
    return EXIT_OK


def cmd_design(args, run: Run) -> int:
    vals = _values(args)
    missing = [k for k in ("a_eff_tilde", "l_cav", "alpha_loss", "t_ex") if k not in vals]
    if missing:
        raise UsageError(f"missing cavity parameter(s): {', '.join(missing)}")
    cav = PhysicalCavity(vals["a_eff_tilde"], vals["l_cav"], vals["alpha_loss"], vals["t_ex"])
    gamma = vals["gamma"]
    tau = None
    if args.tau is not None or "tau" in vals:
        taus = _parse_taus(args.tau) if args.tau is not None else [vals["tau"]]
        if len(taus) != 1:
            raise UsageError("design takes a single --tau")
        tau = taus[0]
    rep = optimize.design_conditions(cav, gamma, tau)
    r = rep.rates
    run.resolved.update(a_eff_tilde=cav.a_eff_tilde, l_cav=cav.l_cav, alpha_loss=cav.alpha_loss,
                        t_ex=cav.t_ex, gamma=gamma, tau=tau)
    report = {
        "t_ex_recommended": rep.t_ex_recommended,
        "t_ex_exact_opt": rep.t_ex_exact_opt,
        "rates": {"g": r.g, "gamma": r.gamma, "kappa_in": r.kappa_in, "kappa_ex": r.kappa_ex},
        "internal_cooperativity": cav.internal_cooperativity,
        "regime": rep.regime.value,
        "tau_c": rep.tau_c,
        "tau_c_branch": rep.tau_c_branch,
        "conditions": [
            {"name": c.name, "passed": c.passed, "margin": None if math.isnan(c.margin) else c.margin,
             "detail": c.detail}
            for c in rep.conditions
        ],
    }
    run.path("design.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"recommended T_ex = {rep.t_ex_recommended:.6g} (exact optimum {rep.t_ex_exact_opt:.6g})")
    print(f"rates: g = {r.g:.6g}, kappa_in = {r.kappa_in:.6g}, kappa_ex = {r.kappa_ex:.6g}, "
          f"gamma = {r.gamma:.6g}; regime {rep.regime.value}")
    for c in rep.conditions:
        status = "PASS" if c.passed else ("SKIP" if math.isnan(c.margin) else "FAIL")
        print(f"  {status} {c.name}: {c.detail}")
    return EXIT_OK


def cmd_optimize_kex(args, run: Run) -> int:
    vals = _values(args)
    vals.setdefault("kappa_ex", 1.0)  # placeholder; only kappa_in and g matter here
    p = _rates(vals, run)
    run.resolved.pop("kappa_ex", None)
    taus = _taus(args, vals, p, run)
    if not p.kappa_in > 0:
        raise DomainError("kappa_in must be positive to optimise the output coupler")
    c_in = p.internal_cooperativity
    closed = optimize.kex_opt_adiabatic(p.kappa_in, c_in)
    lo = args.kex_min if args.kex_min is not None else 1e-1 * p.kappa_in
    hi = args.kex_max if args.kex_max is not None else 1e3 * p.kappa_in
    run.resolved.update(kex_bounds=[lo, hi], c_in=c_in)
    tu, ru = run.time_unit, run.rate_unit
    rows = []
    for tau in taus:
        o = optimize.kex_opt_numeric(p.g, p.gamma, p.kappa_in, PulseSpec(tau), (lo, hi))
        at_closed = analytic.ps_max(p.with_kappa_ex(closed.kappa_ex_opt), PulseSpec(tau))
        rows.append([tau, o.kappa_ex_opt, o.kappa_ex_opt / p.kappa_in, o.ps_opt, closed.kappa_ex_opt,
                     at_closed, int(o.boundary_hit), o.iterations])
    header = [f"tau [{tu}]", f"kappa_ex_opt [{ru}]", "kex_over_kin [1]", "ps_opt [1]",
              f"kappa_ex_closed_form [{ru}]", "ps_at_closed_form [1]", "boundary_hit", "iterations"]
    _write_csv(run.path("optimize_kex.csv"), header, rows)
    print(f"C_in = {c_in:.6g}: closed form kappa_ex/kappa_in = {closed.kappa_ex_opt / p.kappa_in:.6g}, "
          f"ps = {closed.ps_opt:.6f}")
    for r in rows:
        flag = " (at search bound)" if r[6] else ""
        print(f"tau = {r[0]:.6g}: kappa_ex/kappa_in = {r[2]:.6g}, ps_opt = {r[3]:.6f}{flag}")
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------


def _common(sp: argparse.ArgumentParser, rates=True, pulse=True, drive_opts=False) -> None:
    sp.add_argument("--config", help="key = value parameter file")
    sp.add_argument("--out", default=".", help="output directory (default: current)")
    sp.add_argument("--gamma-units", action="store_true",
                    help="report rates in units of gamma and times in units of 1/gamma")
    if rates:
        sp.add_argument("--preset", choices=sorted(PRESETS), help="C = 10, eta_esc = 0.95 point by regime")
        for key in ("g", "gamma", "kappa_in", "kappa_ex"):
            sp.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)
    if pulse:
        sp.add_argument("--tau", help="pulse width(s): a,b,c or lo:hi:count (geometric)")
        sp.add_argument("--tau-scale", choices=("abs", "tau_c"), default="abs",
                        help="interpret --tau as absolute or in units of the critical width")
    if drive_opts:
        sp.add_argument("--ps-fraction", type=float, default=0.99,
                        help="requested success probability as a fraction of ps_max (default 0.99)")
        sp.add_argument("--detuning-u", type=float, help="two-photon detuning delta_u")
        sp.add_argument("--detuning-e", type=float, help="one-photon detuning delta_e")
        sp.add_argument("--grid", type=int, default=drive.DEFAULT_SAMPLES, help="time samples")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gaussphoton", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("psmax", help="success-probability bound for one or more pulse widths")
    _common(sp)

    sp = sub.add_parser("dynamics", help="populations and drive for one pulse width")
    _common(sp, drive_opts=True)
    sp.add_argument("--simulate", action="store_true", help="also integrate the amplitude equations")

    sp = sub.add_parser("drive", help="synthesize the drive field")
    _common(sp, drive_opts=True)
    sp.add_argument("--waveform", help="CSV of a custom output mode (t, w) or (t, re, im) on a uniform grid")

    sp = sub.add_parser("verify", help="drive -> integrate -> compare round trip")
    _common(sp, drive_opts=True)
    sp.add_argument("--tol", type=float, help=f"verification tolerance (default {VERIFY_TOL:g})")

    sp = sub.add_parser("sweep", help="two-axis parameter sweeps")
    _common(sp)
    sp.add_argument("name", choices=("fig2", "fig6", "fig7", "custom"))
    sp.add_argument("--grid", type=int, help=f"cells per decade (default {optimize.CELLS_PER_DECADE})")
    sp.add_argument("--c", type=float, default=10.0, help="cooperativity for fig2")
    sp.add_argument("--eta-esc", type=float, default=0.95, help="escape efficiency for fig2")
    sp.add_argument("--c-in", type=float, default=200.0, help="internal cooperativity for fig6/fig7")
    sp.add_argument("--kappa-in-over-gamma", type=float, default=1.0, help="fig6 internal loss rate")
    sp.add_argument("--alpha-loss", dest="alpha_loss_sweep", type=float, default=1e-3,
                    help="round-trip loss for fig7")
    sp.add_argument("--axis1", help="custom axis name:scale:min:max:count")
    sp.add_argument("--axis2", help="custom axis name:scale:min:max:count")
    sp.add_argument("--workers", type=int, default=1, help="threads for fig6/fig7 rows")

    sp = sub.add_parser("design", help="check a physical cavity against the design rules")
    _common(sp, rates=False, pulse=False)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--tau", help="pulse width to test against the critical width")
    for key in ("a_eff_tilde", "l_cav", "alpha_loss", "t_ex"):
        sp.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)

    sp = sub.add_parser("optimize-kex", help="best output-coupling rate per pulse width")
    _common(sp)
    sp.add_argument("--kex-min", type=float, help="lower search bound (default 0.1 kappa_in)")
    sp.add_argument("--kex-max", type=float, help="upper search bound (default 1000 kappa_in)")
    return ap


COMMANDS = {
    "psmax": cmd_psmax,
    "dynamics": cmd_dynamics,
    "drive": cmd_drive,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "design": cmd_design,
    "optimize-kex": cmd_optimize_kex,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        run = Run(args.command, args, argv)
        code = COMMANDS[args.command](args, run)
        run.write_manifest()
        return code
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, StiffnessError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
