"""Exercises the five subcommands through main(), checking artifacts and exit codes."""

import os
import shutil
import subprocess
import sys

import numpy as np
import pytest

from chemofront import config_io
from chemofront.cli import main


TINY_CFG = """\
[model]
m = 2.0
mu = 1.0
delta = 1.0

[grid]
dim = 1
cells = 16
extent = 2.0
origin = -1.0

[solver]
t_end = 0.05
output_stride = 100

[initial]
u = bump 0.0 0.25 0.5
w = constant 1.0

[output]
seed = 3
"""

LATTICE_CFG = """\
[model]
m = 2.0

[grid]
dim = 1
cells = 16
extent = 2.0

[solver]
t_end = 0.05

[initial]
u = constant 0.0

[lattice]
sites = 20
u_max = 50
particles = 150
t_end = 0.05
seeds = 2
cells_per_bin = 2
"""


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("tiny")
    cfg = base / "tiny.cfg"
    cfg.write_text(TINY_CFG)
    out = base / "out"
    code = main(["run", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    return {"cfg": cfg, "out": out}


# --- run --------------------------------------------------------------------


class TestRunCommand:
    def test_artifacts_written(self, tiny_run):
        out = tiny_run["out"]
        names = sorted(os.listdir(out))
        assert "config.cfg" in names
        assert "history.csv" in names
        snaps = [n for n in names if n.startswith("snap_") and n.endswith(".bin")]
        assert len(snaps) >= 2  # at least initial and final
        assert snaps[0] == "snap_00000000.bin"

    def test_history_and_snapshots_agree_on_times(self, tiny_run):
        out = tiny_run["out"]
        history = config_io.read_history_csv(str(out / "history.csv"))
        snaps = sorted(p for p in os.listdir(out) if p.startswith("snap_"))
        times = [config_io.read_snapshot(str(out / p)).t for p in snaps]
        hist_t = np.asarray(history.rows)[:, 0]
        assert len(times) == len(hist_t)
        assert np.allclose(times, hist_t, rtol=0, atol=1e-12)
        assert hist_t[0] == 0.0
        assert hist_t[-1] == pytest.approx(0.05, abs=1e-9)

    def test_written_config_round_trips(self, tiny_run):
        cfg = config_io.parse_config_file(str(tiny_run["out"] / "config.cfg"))
        assert cfg.model.m == 2.0
        assert cfg.seed == 3

    def test_seed_override_lands_in_config(self, tmp_path):
        cfg = tmp_path / "tiny.cfg"
        cfg.write_text(TINY_CFG)
        out = tmp_path / "seeded"
        assert main(["run", "--config", str(cfg), "--out", str(out), "--seed", "99"]) == 0
        assert config_io.parse_config_file(str(out / "config.cfg")).seed == 99

    def test_run_prints_summary_line(self, tiny_run, tmp_path, capsys):
        out = tmp_path / "again"
        assert main(["run", "--config", str(tiny_run["cfg"]), "--out", str(out)]) == 0
        captured = capsys.readouterr().out
        assert captured.startswith("run: ")
        assert "snapshots" in captured

    def test_missing_config_file_is_usage_error(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.cfg")]) == 1

    def test_broken_config_is_usage_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[model]\nm = fast\n")
        assert main(["run", "--config", str(cfg)]) == 1
        assert "config error" in capsys.readouterr().err


# --- verify -----------------------------------------------------------------


class TestVerifyCommand:
    def test_clean_run_passes(self, cli_run_dir, capsys):
        code = main(["verify", "--out", str(cli_run_dir["out"])])
        captured = capsys.readouterr().out
        assert code == 0
        assert "mass drift" in captured
        assert "sandwich" in captured

    def test_report_csv_written(self, cli_run_dir):
        assert main(["verify", "--out", str(cli_run_dir["out"])]) == 0
        lines = (cli_run_dir["out"] / "verify_report.csv").read_text().splitlines()
        assert lines[0] == "metric,value"
        metrics = {ln.split(",")[0] for ln in lines[1:]}
        assert {"mass_drift", "c1", "c2", "lower_amplitude", "upper_valid_until",
                "max_lower_violation", "violation_count"} <= metrics

    def test_corrupted_snapshot_fails_with_exit_3(self, cli_run_dir, tmp_path, capsys):
        src = cli_run_dir["out"]
        dst = tmp_path / "broken"
        shutil.copytree(src, dst)
        snaps = sorted(p for p in os.listdir(dst) if p.startswith("snap_"))
        victim = str(dst / snaps[len(snaps) // 2])
        state = config_io.read_snapshot(victim, origin=(-1.0,))
        crushed = state.__class__(
            state.u.__class__(state.u.grid, state.u.values * 1e-6),
            state.v,
            state.w,
            state.z,
            t=state.t,
        )
        config_io.write_snapshot(victim, crushed)
        code = main(["verify", "--out", str(dst)])
        captured = capsys.readouterr().out
        assert code == 3
        assert "FAIL" in captured
        report = dict(
            ln.split(",") for ln in (dst / "verify_report.csv").read_text().splitlines()[1:]
        )
        assert float(report["violation_count"]) > 0
        assert float(report["max_lower_violation"]) > 1e-8

    def test_non_run_directory_is_usage_error(self, tmp_path):
        assert main(["verify", "--out", str(tmp_path)]) == 1


# --- fit --------------------------------------------------------------------


class TestFitCommand:
    def test_fits_history_and_writes_csv(self, cli_run_dir, tmp_path, capsys):
        history = cli_run_dir["out"] / "history.csv"
        out = tmp_path / "fits"
        code = main(["fit", str(history), "--out", str(out)])
        captured = capsys.readouterr().out
        assert code == 0
        lines = captured.strip().splitlines()
        assert lines[0] == "column,kind,exponent_or_rate,prefactor,r_squared,stderr,samples"
        kinds = {ln.split(",")[0]: ln.split(",")[1] for ln in lines[1:]}
        assert kinds.get("support_radius") == "power_law"
        assert all(v == "exponential" for k, v in kinds.items() if k.startswith("norm_"))
        written = (out / "fits.csv").read_text().strip().splitlines()
        assert written == lines

    def test_too_short_history_is_numeric_failure(self, tmp_path, capsys):
        path = tmp_path / "short.csv"
        path.write_text("t,support_radius\n0,1\n1,2\n2,3\n")
        assert main(["fit", str(path)]) == 2
        assert "usable" in capsys.readouterr().err

    def test_missing_time_column_is_usage_error(self, tmp_path):
        path = tmp_path / "no_t.csv"
        path.write_text("x,support_radius\n0,1\n")
        assert main(["fit", str(path)]) == 1


# --- sweep ------------------------------------------------------------------


SWEEP_CFG = TINY_CFG.replace("t_end = 0.05", "t_end = 0.02") + "\n[sweep]\nmodel.m = 2.0, 3.0\n"


class TestSweepCommand:
    def test_cases_and_manifest(self, tmp_path, capsys):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(SWEEP_CFG)
        out = tmp_path / "sweep_out"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        assert "2 cases" in capsys.readouterr().out
        lines = (out / "manifest.csv").read_text().splitlines()
        assert lines[0] == "case,dir,model.m,final_t,steps,final_sup_u"
        rows = [ln.split(",") for ln in lines[1:]]
        assert [r[1] for r in rows] == ["case_0000", "case_0001"]
        assert [float(r[2]) for r in rows] == [2.0, 3.0]
        for idx, row in enumerate(rows):
            case_cfg = config_io.parse_config_file(str(out / row[1] / "config.cfg"))
            assert case_cfg.model.m == float(row[2])
            assert case_cfg.sweep == {}
            assert case_cfg.seed == 3 + idx  # base seed plus case index
            assert (out / row[1] / "history.csv").exists()

    def test_parallel_workers_give_same_manifest(self, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(SWEEP_CFG)
        serial = tmp_path / "serial"
        parallel = tmp_path / "parallel"
        assert main(["sweep", "--config", str(cfg), "--out", str(serial)]) == 0
        assert main(["sweep", "--config", str(cfg), "--out", str(parallel), "--workers", "2"]) == 0
        keep = lambda text: text.replace(str(serial), "X").replace(str(parallel), "X")
        assert keep((serial / "manifest.csv").read_text()) == keep((parallel / "manifest.csv").read_text())

    def test_sweepless_config_is_usage_error(self, tmp_path, capsys):
        cfg = tmp_path / "plain.cfg"
        cfg.write_text(TINY_CFG)
        assert main(["sweep", "--config", str(cfg)]) == 1
        assert "no [sweep]" in capsys.readouterr().err


# --- lattice ----------------------------------------------------------------


class TestLatticeCommand:
    def test_ensemble_csv(self, tmp_path, capsys):
        cfg = tmp_path / "lat.cfg"
        cfg.write_text(LATTICE_CFG)
        out = tmp_path / "lat_out"
        assert main(["lattice", "--config", str(cfg), "--out", str(out)]) == 0
        assert "2 seeds" in capsys.readouterr().out
        lines = (out / "ensemble.csv").read_text().splitlines()
        assert lines[0] == "seed,time,bin,center,density"
        assert len(lines) == 1 + 2 * (20 // 2)  # seeds times bins
        # every recorded density is a multiple of one particle per bin
        for ln in lines[1:]:
            val = float(ln.split(",")[4])
            assert val >= 0.0

    def test_compare_writes_distance_table(self, tmp_path, capsys):
        cfg = tmp_path / "lat.cfg"
        cfg.write_text(LATTICE_CFG + "compare_pde = on\n")
        out = tmp_path / "lat_cmp"
        assert main(["lattice", "--config", str(cfg), "--out", str(out)]) == 0
        assert "L1 distance" in capsys.readouterr().out
        lines = (out / "compare.csv").read_text().splitlines()
        assert lines[0] == "bin,center,lattice_mean,continuum,abs_diff"
        assert len(lines) == 1 + 10

    def test_impossible_tolerance_fails_with_exit_3(self, tmp_path, capsys):
        cfg = tmp_path / "lat.cfg"
        cfg.write_text(LATTICE_CFG)
        out = tmp_path / "lat_tol"
        code = main(["lattice", "--config", str(cfg), "--out", str(out), "--tol-l1", "1e-12"])
        assert code == 3
        assert "exceeds tolerance" in capsys.readouterr().err

    def test_latticeless_config_is_usage_error(self, tmp_path, capsys):
        cfg = tmp_path / "plain.cfg"
        cfg.write_text(TINY_CFG)
        assert main(["lattice", "--config", str(cfg)]) == 1
        assert "no [lattice]" in capsys.readouterr().err


# --- argument handling ------------------------------------------------------


class TestUsage:
    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["frobnicate"],
            ["run"],  # missing --config
            ["verify"],  # missing --out
        ],
    )
    def test_bad_invocations_exit_1(self, argv, capsys):
        assert main(argv) == 1
        assert "error" in capsys.readouterr().err

    def test_console_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "chemofront", "--help"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        for name in ("run", "verify", "sweep", "fit", "lattice"):
            assert name in proc.stdout
