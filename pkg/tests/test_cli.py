import csv
import hashlib
import json
import math

import numpy as np
import pytest

from gaussphoton import analytic
from gaussphoton.params import AtomCavityParams, PulseSpec
from gaussphoton.cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main

ROOT401 = math.sqrt(401)


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def read(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def column(path, name):
    header, rows = read(path)
    i = next(k for k, h in enumerate(header) if h.split(" [")[0] == name)
    return np.array([float(r[i]) for r in rows])


def numeric_headers_have_units(path):
    header, rows = read(path)
    for i, h in enumerate(header):
        try:
            float(rows[0][i])
        except ValueError:
            continue
        if h in ("boundary_hit", "iterations"):
            continue
        assert h.endswith("]") and " [" in h, h


class TestExitCodes:
    def test_missing_tau_is_usage(self, tmp_path):
        assert run(tmp_path, "psmax", "--preset", "strong") == EXIT_USAGE

    def test_unknown_command(self, tmp_path):
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_unknown_sweep(self, tmp_path):
        assert run(tmp_path, "sweep", "fig9") == EXIT_USAGE

    def test_missing_rates(self, tmp_path):
        assert run(tmp_path, "psmax", "--tau", "1", "--g", "1") == EXIT_USAGE

    def test_invalid_rate_is_domain(self, tmp_path):
        assert run(tmp_path, "psmax", "--tau", "1", "--g", "-1", "--kappa-in", "0", "--kappa-ex", "1") == EXIT_DOMAIN

    @pytest.mark.parametrize("frac", ["1", "1.2", "0"])
    def test_refuses_divergent_fraction(self, tmp_path, frac, capsys):
        assert run(tmp_path, "drive", "--preset", "strong", "--tau", "1", "--tau-scale", "tau_c",
                   "--ps-fraction", frac) == EXIT_DOMAIN
        assert "diverges" in capsys.readouterr().err

    def test_config_error_names_line(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("g = 1\nkappa_in = 0.1\nkappa_exx = 1\n")
        assert run(tmp_path, "psmax", "--config", str(cfg), "--tau", "1") == EXIT_DOMAIN
        err = capsys.readouterr().err
        assert ":3:" in err and "kappa_exx" in err


class TestManifest:
    def test_digests_match(self, tmp_path):
        assert run(tmp_path, "dynamics", "--preset", "intermediate", "--tau", "2", "--tau-scale", "tau_c",
                   "--grid", "257") == EXIT_OK
        man = json.loads((tmp_path / "run_manifest.json").read_text())
        assert man["command"] == "dynamics"
        assert man["parameters"]["ps_fraction"] == 0.99
        for f in man["files"]:
            data = (tmp_path / f["path"]).read_bytes()
            assert hashlib.sha256(data).hexdigest() == f["sha256"] and len(data) == f["bytes"]

    def test_repeat_runs_identical(self, tmp_path):
        for sub in ("a", "b"):
            assert run(tmp_path / sub, "drive", "--preset", "purcell", "--tau", "1.3", "--tau-scale", "tau_c",
                       "--detuning-u", "0.5", "--detuning-e", "2", "--grid", "513") == EXIT_OK
        assert (tmp_path / "a/drive.csv").read_bytes() == (tmp_path / "b/drive.csv").read_bytes()


class TestPsmax:
    def test_adiabatic_purcell(self, tmp_path):
        assert run(tmp_path, "psmax", "--preset", "purcell", "--tau", "10", "--tau-scale", "tau_c") == EXIT_OK
        ratio = column(tmp_path / "psmax.csv", "ratio")
        assert ratio[0] == pytest.approx(0.99, abs=0.01)
        numeric_headers_have_units(tmp_path / "psmax.csv")
        header, rows = read(tmp_path / "psmax.csv")
        assert rows[0][header.index("regime")] == "Purcell"

    def test_monotone_over_three_decades(self, tmp_path):
        assert run(tmp_path, "psmax", "--preset", "intermediate", "--tau", "0.01:10:31", "--tau-scale", "tau_c") == EXIT_OK
        ps = column(tmp_path / "psmax.csv", "ps_max")
        assert ps.size == 31 and np.all(np.diff(ps) >= 0)

    def test_gamma_units(self, tmp_path):
        assert run(tmp_path, "psmax", "--g", "4", "--gamma", "2", "--kappa-in", "0.02", "--kappa-ex", "0.38",
                   "--tau", "5", "--gamma-units") == EXIT_OK
        header, _ = read(tmp_path / "psmax.csv")
        assert header[0] == "tau [1/gamma]"
        man = json.loads((tmp_path / "run_manifest.json").read_text())
        assert man["parameters"]["gamma"] == 1.0 and man["parameters"]["g"] == pytest.approx(2.0)

    def test_config_then_flags(self, tmp_path):
        cfg = tmp_path / "p.cfg"
        cfg.write_text("g = 2\nkappa_in = 0.01\nkappa_ex = 0.19\ntau = 7\n")
        assert run(tmp_path, "psmax", "--config", str(cfg), "--g", "3") == EXIT_OK
        man = json.loads((tmp_path / "run_manifest.json").read_text())
        assert man["parameters"]["g"] == 3.0 and man["parameters"]["tau"] == 7.0


class TestDynamics:
    def test_purcell_sign_flip(self, tmp_path):
        assert run(tmp_path, "dynamics", "--preset", "purcell", "--tau", "1.3", "--tau-scale", "tau_c") == EXIT_OK
        path = tmp_path / "dynamics.csv"
        re_om = column(path, "re_omega")
        assert re_om.max() > 0 and re_om.min() < 0
        assert column(path, "rho_uu")[0] == pytest.approx(1.0, abs=1e-9)
        numeric_headers_have_units(path)

    @pytest.mark.parametrize("preset, width", [("purcell", 1.3), ("intermediate", 2.0), ("strong", 0.24), ("weak", 2.0)])
    def test_final_ground_population(self, tmp_path, preset, width):
        assert run(tmp_path, "dynamics", "--preset", preset, "--tau", str(width), "--tau-scale", "tau_c",
                   "--grid", "1025") == EXIT_OK
        man = json.loads((tmp_path / "run_manifest.json").read_text())
        ps = man["parameters"]["ps"]
        rho = column(tmp_path / "dynamics.csv", "rho_uu")
        assert rho[-1] > 0
        q = man["parameters"]
        p = AtomCavityParams(q["g"], q["gamma"], q["kappa_in"], q["kappa_ex"])
        assert analytic.ps_finite_tau(p, PulseSpec(q["tau"]), rho[-1]) == pytest.approx(ps, rel=1e-6)

    def test_simulated_columns(self, tmp_path):
        assert run(tmp_path, "dynamics", "--preset", "strong", "--tau", "2", "--tau-scale", "tau_c",
                   "--grid", "1025", "--simulate") == EXIT_OK
        path = tmp_path / "dynamics.csv"
        assert np.max(np.abs(column(path, "sim_rho_uu") - column(path, "rho_uu"))) < 1e-6


class TestVerify:
    def test_detuned_intermediate_passes(self, tmp_path):
        assert run(tmp_path, "verify", "--preset", "intermediate", "--tau", "2", "--tau-scale", "tau_c",
                   "--detuning-u", "0.5", "--detuning-e", "2") == EXIT_OK
        rep = json.loads((tmp_path / "verify.json").read_text())
        assert rep["passed"] and rep["checks"]["detuning_independence"]
        assert rep["ps_rel_error"] <= 1e-3 and 1 - rep["overlap"] <= 1e-3
        numeric_headers_have_units(tmp_path / "trajectory.csv")

    def test_coarse_grid_is_densified(self, tmp_path):
        assert run(tmp_path, "verify", "--preset", "strong", "--tau", "2", "--tau-scale", "tau_c",
                   "--grid", "9") == EXIT_OK
        assert json.loads((tmp_path / "verify.json").read_text())["grid_used"] == 36

    def test_impossible_tolerance_fails(self, tmp_path):
        assert run(tmp_path, "verify", "--preset", "strong", "--tau", "2", "--tau-scale", "tau_c",
                   "--tol", "1e-15") == EXIT_VERIFY
        assert (tmp_path / "run_manifest.json").exists()
        assert not json.loads((tmp_path / "verify.json").read_text())["passed"]


class TestSweep:
    def test_fig6_ridge(self, tmp_path):
        assert run(tmp_path, "sweep", "fig6", "--grid", "10") == EXIT_OK
        meta = json.loads((tmp_path / "sweep_fig6.json").read_text())
        ridge = meta["overlays"]["ridge_kex_over_kin"]
        assert ridge[-1] == pytest.approx(ROOT401, rel=0.02)
        assert meta["fixed"]["c_in"] == 200
        numeric_headers_have_units(tmp_path / "sweep_fig6.csv")

    def test_fig2_defaults(self, tmp_path):
        assert run(tmp_path, "sweep", "fig2", "--grid", "4") == EXIT_OK
        meta = json.loads((tmp_path / "sweep_fig2.json").read_text())
        assert meta["fixed"]["c"] == 10 and meta["fixed"]["eta_esc"] == 0.95
        assert np.all(column(tmp_path / "sweep_fig2.csv", "ps_max") <= 0.95 * 20 / 21 + 1e-12)

    def test_custom(self, tmp_path):
        assert run(tmp_path, "sweep", "custom", "--axis1", "tau:log:1:10:2", "--axis2", "g:log:1:10:2",
                   "--kappa-in", "0.1", "--kappa-ex", "1") == EXIT_OK
        header, rows = read(tmp_path / "sweep_custom.csv")
        assert len(rows) == 4
        assert header[:2] == ["tau [time]", "g [rate]"]

    def test_custom_needs_axes(self, tmp_path):
        assert run(tmp_path, "sweep", "custom") == EXIT_USAGE

    def test_fig7_workers_identical(self, tmp_path):
        assert run(tmp_path / "a", "sweep", "fig7", "--grid", "3") == EXIT_OK
        assert run(tmp_path / "b", "sweep", "fig7", "--grid", "3", "--workers", "2") == EXIT_OK
        assert (tmp_path / "a/sweep_fig7.csv").read_bytes() == (tmp_path / "b/sweep_fig7.csv").read_bytes()


class TestDesign:
    def test_reference_cavity(self, tmp_path):
        assert run(tmp_path, "design", "--a-eff-tilde", "5", "--l-cav", str(1e-3 / 8), "--alpha-loss", "1e-3",
                   "--t-ex", "0.02", "--tau", "0.01") == EXIT_OK
        rep = json.loads((tmp_path / "design.json").read_text())
        assert rep["t_ex_recommended"] == pytest.approx(0.02)
        cond = {c["name"]: c for c in rep["conditions"]}
        assert cond["output_coupler"]["passed"]
        assert cond["cavity_length"]["margin"] == pytest.approx(2.0)
        assert not cond["pulse_width"]["passed"]

    def test_missing_geometry(self, tmp_path):
        assert run(tmp_path, "design", "--a-eff-tilde", "5") == EXIT_USAGE


class TestOptimizeKex:
    def test_long_pulse_near_closed_form(self, tmp_path):
        assert run(tmp_path, "optimize-kex", "--g", "20", "--kappa-in", "1", "--tau", "10,20") == EXIT_OK
        path = tmp_path / "optimize_kex.csv"
        assert np.allclose(column(path, "kex_over_kin"), ROOT401, rtol=0.02)
        assert np.all(column(path, "ps_opt") >= column(path, "ps_at_closed_form"))
        numeric_headers_have_units(path)
