import json
from pathlib import Path

from gllflow.cli import main
from gllflow.manifest import MANIFEST_NAME


def _run(argv):
    return main(argv)


def _manifest(out_dir):
    return json.loads((Path(out_dir) / MANIFEST_NAME).read_text())


class TestSelfsimCommand:
    def test_run_emits_files_and_assertion(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = _run(["selfsim", "--n", "2", "--alpha", "1", "--beta", "0",
                     "--v1", "1", "--r-max", "30", "--out-dir", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "bound 4n = 8" in text and "ok" in text
        assert (out / "profile.csv").exists()
        assert (out / "tail_report.json").exists()
        doc = _manifest(out)
        assert doc["results"]["max_A"] <= 8.0
        assert doc["results"]["identity_residual"] <= 1e-6
        assert doc["schema_version"].startswith("gllflow.run_manifest")

    def test_trivial_data_warns(self, tmp_path, capsys):
        out = tmp_path / "trivial"
        code = _run(["selfsim", "--v1", "0", "--v2", "0", "--r-max", "15",
                     "--out-dir", str(out)])
        assert code == 0
        assert "trivial data" in capsys.readouterr().out

    def test_deterministic_reruns(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        args = ["selfsim", "--n", "2", "--alpha", "0", "--beta", "1", "--v1", "1",
                "--r-max", "12", "--tol", "1e-10"]
        assert _run(args + ["--out-dir", str(out1)]) == 0
        assert _run(args + ["--out-dir", str(out2)]) == 0
        assert (out1 / "profile.csv").read_bytes() == (out2 / "profile.csv").read_bytes()
        d1, d2 = _manifest(out1), _manifest(out2)
        d1.pop("provenance")
        d2.pop("provenance")
        assert d1 == d2

    def test_solver_failure_exit_code(self, tmp_path, capsys):
        code = _run(["selfsim", "--r-max", "1e-6", "--out-dir", str(tmp_path / "x")])
        assert code == 2
        err = capsys.readouterr().err
        assert json.loads(err.strip())["error"]

    def test_bad_params_exit_code(self, tmp_path):
        code = _run(["selfsim", "--alpha", "1", "--beta", "1",
                     "--out-dir", str(tmp_path / "x")])
        assert code == 2

    def test_gnuplot_flag(self, tmp_path):
        out = tmp_path / "g"
        assert _run(["selfsim", "--r-max", "12", "--out-dir", str(out), "--gnuplot"]) == 0
        assert (out / "plot.gp").exists()


class TestRealheatCommands:
    def test_classify_borderline(self, tmp_path, capsys):
        out = tmp_path / "c2"
        assert _run(["realheat", "classify", "--n", "2", "--out-dir", str(out)]) == 0
        assert "borderline" in capsys.readouterr().out
        doc = json.loads((out / "classifier_report.json").read_text())
        assert doc["verdict"] == "borderline"

    def test_classify_unique(self, tmp_path, capsys):
        assert _run(["realheat", "classify", "--n", "3",
                     "--out-dir", str(tmp_path / "c3")]) == 0
        assert "unique" in capsys.readouterr().out

    def test_stationary(self, tmp_path):
        out = tmp_path / "st"
        assert _run(["realheat", "stationary", "--alpha", "1",
                     "--n-list", "2,5", "--out-dir", str(out)]) == 0
        assert _manifest(out)["results"]["max_residual"] <= 1e-10

    def test_selfsim_scalar(self, tmp_path):
        out = tmp_path / "ss"
        assert _run(["realheat", "selfsim", "--beta", "1", "--n", "3",
                     "--r-max", "8", "--out-dir", str(out)]) == 0
        doc = _manifest(out)
        assert doc["results"]["monotone"] and doc["results"]["below_pi"]
        assert doc["parameters"]["slope"] == 2.0

    def test_selfsim_scalar_slope_convention(self, tmp_path):
        out = tmp_path / "ss2"
        assert _run(["realheat", "selfsim", "--beta", "1", "--n", "3",
                     "--r-max", "8", "--convention", "slope",
                     "--out-dir", str(out)]) == 0
        assert _manifest(out)["parameters"]["slope"] == 1.0

    def test_witness_reports_gap_sign(self, tmp_path, capsys):
        out = tmp_path / "w"
        assert _run(["realheat", "witness", "--epsilon", "1e-6",
                     "--out-dir", str(out)]) == 0
        text = capsys.readouterr().out
        assert "energy gap" in text
        doc = json.loads((out / "witness_report.json").read_text())
        assert doc["hardy_ratio"] > 1.0
        assert doc["taylor_delta_literal"] is None

    def test_witness_bad_epsilon(self, tmp_path):
        assert _run(["realheat", "witness", "--epsilon", "0.9",
                     "--out-dir", str(tmp_path / "wx")]) == 2

    def test_figure(self, tmp_path, capsys):
        out = tmp_path / "fig"
        assert _run(["realheat", "figure", "--out-dir", str(out)]) == 0
        text = capsys.readouterr().out
        assert "n = 3" in text
        csvs = list(out.glob("curve_beta_*.csv"))
        assert len(csvs) == 8
        doc = _manifest(out)
        assert doc["parameters"]["fitted_slope_factor"] == 2.0

    def test_figure_worker_pool_matches_serial(self, tmp_path):
        out1, out2 = tmp_path / "f1", tmp_path / "f2"
        assert _run(["realheat", "figure", "--out-dir", str(out1)]) == 0
        assert _run(["realheat", "figure", "--workers", "2", "--out-dir", str(out2)]) == 0
        for csv in sorted(out1.glob("curve_beta_*.csv")):
            assert csv.read_bytes() == (out2 / csv.name).read_bytes()


class TestEvolveCommand:
    def test_harmonic_preset(self, tmp_path, capsys):
        out = tmp_path / "ev"
        assert _run(["evolve", "--preset", "harmonic", "--alpha", "1", "--beta", "0",
                     "--r-max", "15", "--nodes", "61", "--T", "0.05",
                     "--store-every", "20", "--out-dir", str(out)]) == 0
        assert "stationarity drift" in capsys.readouterr().out
        frames = sorted(out.glob("frame_*.csv"))
        assert len(frames) >= 2
        doc = _manifest(out)
        assert doc["results"]["max_norm_drift"] <= 1e-6
        assert doc["results"]["stationarity_drift"] <= 0.1

    def test_config_file_precedence(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("nodes = 41\nT = 0.02\nr_max = 10\n")
        out = tmp_path / "ev2"
        # flag overrides the config value for nodes; T comes from the file
        assert _run(["evolve", "--preset", "bump", "--nodes", "51",
                     "--config", str(conf), "--out-dir", str(out)]) == 0
        doc = _manifest(out)
        assert doc["grid"]["nodes"] == 51
        assert doc["tolerances"]["T"] == 0.02

    def test_exactly_one_manifest(self, tmp_path):
        out = tmp_path / "ev3"
        assert _run(["evolve", "--preset", "bump", "--nodes", "41", "--r-max", "8",
                     "--T", "0.01", "--out-dir", str(out)]) == 0
        assert len(list(out.glob("run_manifest.json"))) == 1


class TestHasimotoCommands:
    def test_exponents(self, tmp_path, capsys):
        out = tmp_path / "h"
        assert _run(["hasimoto", "exponents", "--p", "2", "--out-dir", str(out)]) == 0
        assert "2.4" in capsys.readouterr().out
        doc = json.loads((out / "exponent_table.json").read_text())
        assert doc["r"]["float"] == 2.4
        assert doc["s"]["s(1,1)"]["float"] == 2.4

    def test_run(self, tmp_path):
        out = tmp_path / "hr"
        assert _run(["hasimoto", "run", "--r-max", "8", "--nodes", "801",
                     "--out-dir", str(out)]) == 0
        header = (out / "qfield.csv").read_text().splitlines()[0]
        assert header == "r,re_q,im_q,alpha_g,u_r_norm"


class TestOutputRoot:
    def test_env_var_sets_default_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GLLFLOW_OUT", str(tmp_path))
        assert _run(["realheat", "classify", "--n", "4"]) == 0
        assert (tmp_path / "out-realheat-classify" / MANIFEST_NAME).exists()


class TestVerifyCommand:
    def test_geom_suite_passes(self, capsys):
        assert _run(["verify", "geom"]) == 0
        out = capsys.readouterr().out
        assert "[PASS]" in out and "[FAIL]" not in out

    def test_hasimoto_suite_passes(self, capsys):
        assert _run(["verify", "hasimoto"]) == 0

    def test_all_suites_pass(self, capsys):
        assert _run(["verify", "all"]) == 0
        out = capsys.readouterr().out
        assert "[FAIL]" not in out
        # one line per check across all six module suites
        assert out.count("[PASS]") >= 20
