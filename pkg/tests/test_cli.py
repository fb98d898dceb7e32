import json
import math

import numpy as np
import pytest

from dephase_walk import cli
from dephase_walk.ensemble import InvalidRunError


def run_cli(*argv):
    return cli.main(list(argv))


def read_table(path):
    return cli.read_csv(str(path))


def first_comment(path):
    with open(path) as fh:
        return fh.readline().rstrip("\n")


class TestCoherentMode:
    def test_writes_csv_sidecar_and_theory_columns(self, tmp_path):
        out = tmp_path / "coh.csv"
        code = run_cli("coherent", "--J", "1.0", "--t-max", "2.0",
                       "--n-samples", "20", "--out", str(out))
        assert code == 0

        table = read_table(out)
        assert set(table) == {"t", "mean_n", "n2", "theory_n2"}
        assert np.allclose(table["theory_n2"], 2.0 * table["t"] ** 2)
        assert np.allclose(table["n2"], table["theory_n2"], rtol=1e-6)
        assert np.allclose(table["mean_n"], 0.0, atol=1e-12)

        head = first_comment(out)
        assert head.startswith("# dephase-walk")
        assert "mode=coherent" in head
        assert "seed=" in head

        sidecar = json.loads((tmp_path / "coh.json").read_text())
        assert sidecar["mode"] == "coherent"
        assert sidecar["config"]["J"] == 1.0
        assert sidecar["config"]["t_max"] == 2.0
        assert sidecar["n_invalid"] == 0
        assert sidecar["flagged"] is False
        assert sidecar["version"]


class TestConfigHandling:
    def test_sidecar_round_trip_is_bit_identical(self, tmp_path):
        first = tmp_path / "run1.csv"
        code = run_cli("dephased", "--J", "1.0", "--dt-kick", "0.5",
                       "--t-max", "4.0", "--n-traj", "6", "--seed", "3",
                       "--out", str(first))
        assert code == 0

        second = tmp_path / "run2.csv"
        code = run_cli("dephased", "--config", str(tmp_path / "run1.json"),
                       "--out", str(second))
        assert code == 0
        assert first.read_bytes() == second.read_bytes()

    def test_flags_override_config_file(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text(
            "# comment line\n"
            "J = 1.0\n"
            "t_max = 2.0\n"
            "n_samples = 10\n"
        )
        out = tmp_path / "coh.csv"
        code = run_cli("coherent", "--config", str(conf), "--t-max", "3.0",
                       "--out", str(out))
        assert code == 0
        sidecar = json.loads((tmp_path / "coh.json").read_text())
        assert sidecar["config"]["t_max"] == 3.0
        assert sidecar["config"]["J"] == 1.0

    def test_unknown_config_key_is_an_error(self, tmp_path, capsys):
        conf = tmp_path / "run.conf"
        conf.write_text("J = 1.0\nt_max = 2.0\nbogus = 7\n")
        code = run_cli("coherent", "--config", str(conf),
                       "--out", str(tmp_path / "x.csv"))
        assert code == 1
        assert "bogus" in capsys.readouterr().err

    def test_missing_required_setting_exits_1(self, tmp_path, capsys):
        code = run_cli("dephased", "--J", "1.0", "--dt-kick", "0.5",
                       "--t-max", "4.0", "--seed", "3",
                       "--out", str(tmp_path / "x.csv"))
        assert code == 1
        err = capsys.readouterr().err
        assert "n_traj" in err

    def test_nonpositive_rate_exits_1(self, tmp_path, capsys):
        code = run_cli("coherent", "--J", "-2.0", "--t-max", "1.0",
                       "--out", str(tmp_path / "x.csv"))
        assert code == 1
        assert "J" in capsys.readouterr().err

    def test_beta_frac_outside_unit_interval_exits_1(self, tmp_path):
        code = run_cli("fiberloop", "--beta-frac", "1.2", "--m-max", "10",
                       "--n-traj", "2", "--seed", "1",
                       "--out", str(tmp_path / "x.csv"))
        assert code == 1

    def test_mode_mismatch_between_file_and_command_exits_1(self, tmp_path, capsys):
        out = tmp_path / "coh.csv"
        assert run_cli("coherent", "--J", "1.0", "--t-max", "1.0",
                       "--out", str(out)) == 0
        code = run_cli("master1d", "--config", str(tmp_path / "coh.json"),
                       "--out", str(tmp_path / "y.csv"))
        assert code == 1
        assert "mode" in capsys.readouterr().err

    def test_unreadable_config_exits_1(self, tmp_path):
        code = run_cli("coherent", "--config", str(tmp_path / "absent.conf"),
                       "--out", str(tmp_path / "x.csv"))
        assert code == 1

    def test_missing_subcommand_exits_1(self):
        assert run_cli() == 1

    def test_threads_env_fallback_keeps_results_identical(self, tmp_path, monkeypatch):
        args = ("dephased", "--J", "1.0", "--dt-kick", "0.5", "--t-max", "3.0",
                "--n-traj", "5", "--seed", "9")
        one = tmp_path / "one.csv"
        monkeypatch.delenv("DEPHASE_WALK_THREADS", raising=False)
        assert run_cli(*args, "--threads", "1", "--out", str(one)) == 0
        two = tmp_path / "two.csv"
        monkeypatch.setenv("DEPHASE_WALK_THREADS", "2")
        assert run_cli(*args, "--out", str(two)) == 0
        assert one.read_bytes() == two.read_bytes()

    def test_bad_threads_env_exits_1(self, tmp_path, monkeypatch):
        monkeypatch.setenv("DEPHASE_WALK_THREADS", "much")
        code = run_cli("coherent", "--J", "1.0", "--t-max", "1.0",
                       "--out", str(tmp_path / "x.csv"))
        assert code == 1


class TestEnsembleModes:
    def test_dephased_columns_and_theory(self, tmp_path):
        out = tmp_path / "deph.csv"
        code = run_cli("dephased", "--J", "1.0", "--dt-kick", "0.5",
                       "--t-max", "5.0", "--n-traj", "8", "--seed", "4",
                       "--sample-stride", "2", "--out", str(out))
        assert code == 0
        table = read_table(out)
        assert list(table) == ["t", "mean_n2", "mean_n2_stderr", "mean_com2",
                               "mean_com2_stderr", "theory_n2", "theory_com2"]
        J_e = 1.0**2 * 0.5
        assert np.allclose(table["theory_n2"], 2.0 * J_e * table["t"])
        assert np.allclose(table["theory_com2"], 0.72 * np.sqrt(J_e * table["t"]))
        # stride 2 on 10 kicks of 0.5 leaves samples at t = 1, 2, ..., 5
        assert table["t"].tolist() == [1.0, 2.0, 3.0, 4.0, 5.0]

    def test_fiberloop_theory_columns(self, tmp_path):
        out = tmp_path / "loop.csv"
        code = run_cli("fiberloop", "--beta-frac", "0.8", "--m-max", "40",
                       "--n-traj", "5", "--seed", "1", "--sample-stride", "10",
                       "--out", str(out))
        assert code == 0
        table = read_table(out)
        beta = 0.8 * math.pi / 2.0
        J_e = 0.5 * math.cos(beta) ** 2
        assert np.allclose(table["theory_n2"], 2.0 * J_e * table["m"])
        assert np.allclose(table["theory_com2"], 0.72 * np.sqrt(J_e * table["m"]))
        sidecar = json.loads((tmp_path / "loop.json").read_text())
        assert sidecar["config"]["beta_frac"] == 0.8
        assert sidecar["seed"] == 1

    def test_fiberloop_coherent_needs_no_seed(self, tmp_path):
        out = tmp_path / "loopcoh.csv"
        code = run_cli("fiberloop", "--beta-frac", "0.8", "--m-max", "40",
                       "--coherent", "--sample-stride", "40", "--out", str(out))
        assert code == 0
        table = read_table(out)
        assert table["var"][-1] == pytest.approx(table["theory_var"][-1], rel=0.10)


class TestDeterministicModes:
    def test_master1d_mass_and_theory(self, tmp_path):
        out = tmp_path / "m1.csv"
        code = run_cli("master1d", "--Je", "0.5", "--t-max", "4.0",
                       "--n-samples", "8", "--out", str(out))
        assert code == 0
        table = read_table(out)
        assert np.allclose(table["total_mass"], 1.0, atol=1e-9)
        assert np.allclose(table["n2"], table["theory_n2"], rtol=1e-5)

    def test_corr2d_snapshots_and_moments(self, tmp_path):
        out = tmp_path / "corr.csv"
        code = run_cli("corr2d", "--Je", "0.5", "--t-max", "1.0",
                       "--n-samples", "4", "--snapshot-times", "0.5,1",
                       "--out", str(out))
        assert code == 0
        table = read_table(out)
        assert np.all(np.diff(table["com2"]) > 0.0)
        assert np.allclose(table["total_mass"], 1.0, atol=1e-9)

        for tag in ("0p5", "1"):
            snap = tmp_path / f"corr_snap_t{tag}.csv"
            assert snap.exists()
            with open(snap) as fh:
                lines = fh.read().splitlines()
            assert lines[0].startswith("# dephase-walk")
            header_at = next(i for i, l in enumerate(lines) if not l.startswith("#"))
            assert lines[header_at] == "n,m,C"

    def test_snapshot_beyond_horizon_exits_1(self, tmp_path):
        code = run_cli("corr2d", "--Je", "0.5", "--t-max", "1.0",
                       "--snapshot-times", "2", "--out", str(tmp_path / "x.csv"))
        assert code == 1


class TestFitMode:
    def make_series_csv(self, tmp_path):
        path = tmp_path / "series.csv"
        t = np.linspace(1.0, 100.0, 120)
        cli.write_csv(str(path), {"t": t, "y": 0.72 * np.sqrt(t)}, ["synthetic"])
        return path

    def test_fit_reports_exponent_and_prefactor(self, tmp_path):
        src = self.make_series_csv(tmp_path)
        report_path = tmp_path / "fit.json"
        code = run_cli("fit", "--input", str(src), "--column", "y",
                       "--window", "1,100", "--out", str(report_path))
        assert code == 0
        report = json.loads(report_path.read_text())
        assert report["fit"]["exponent"] == pytest.approx(0.5, abs=1e-10)
        assert report["fit"]["prefactor"] == pytest.approx(0.72, rel=1e-10)
        assert report["value_column"] == "y"

    def test_fit_without_out_prints_json(self, tmp_path, capsys):
        src = self.make_series_csv(tmp_path)
        code = run_cli("fit", "--input", str(src), "--column", "y",
                       "--window", "1,100")
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["fit"]["exponent"] == pytest.approx(0.5, abs=1e-10)

    def test_missing_column_names_the_alternatives(self, tmp_path, capsys):
        src = self.make_series_csv(tmp_path)
        code = run_cli("fit", "--input", str(src), "--column", "nope",
                       "--window", "1,100")
        assert code == 1
        err = capsys.readouterr().err
        assert "nope" in err and "y" in err

    def test_too_narrow_window_exits_1(self, tmp_path):
        src = self.make_series_csv(tmp_path)
        code = run_cli("fit", "--input", str(src), "--column", "y",
                       "--window", "1,2")
        assert code == 1


class FakeMonitor:
    edge_sites = 3
    threshold = 1e-8
    tripped = True
    worst = 1.0

    def check_1d(self, values):
        pass

    def check_2d(self, values):
        pass

    def record(self, value):
        pass


class TestFlaggedRuns:
    def test_tripped_monitor_exits_2_but_writes_outputs(self, tmp_path, monkeypatch):
        monkeypatch.setattr(cli, "TruncationMonitor", FakeMonitor)
        out = tmp_path / "m1.csv"
        code = run_cli("master1d", "--Je", "0.5", "--t-max", "1.0",
                       "--n-samples", "4", "--out", str(out))
        assert code == 2
        assert out.exists()
        sidecar = json.loads((tmp_path / "m1.json").read_text())
        assert sidecar["flagged"] is True

    def test_allow_flagged_downgrades_to_success(self, tmp_path, monkeypatch):
        monkeypatch.setattr(cli, "TruncationMonitor", FakeMonitor)
        out = tmp_path / "m1.csv"
        code = run_cli("master1d", "--Je", "0.5", "--t-max", "1.0",
                       "--n-samples", "4", "--allow-flagged", "--out", str(out))
        assert code == 0

    def test_overrun_ensemble_exits_2(self, tmp_path, monkeypatch):
        def explode(*args, **kwargs):
            raise InvalidRunError("3 of 8 trajectories reached the window edge")

        monkeypatch.setattr(cli, "run_loop_ensemble", explode)
        code = run_cli("fiberloop", "--beta-frac", "0.8", "--m-max", "10",
                       "--n-traj", "8", "--seed", "1",
                       "--out", str(tmp_path / "x.csv"))
        assert code == 2


def test_version_string_has_release_prefix():
    assert cli.tool_version().startswith("0.1.0")
