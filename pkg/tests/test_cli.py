"""Command-line interface: subcommands, exit codes, sidecars, round trips."""

import json
import os

import numpy as np
import pytest

from mfmc.cli import main
from mfmc.dataset import load_dataset

GUMBEL_PARAMS = ["--param", "mu1=2", "--param", "sigma1=4", "--param", "mu2=2",
                 "--param", "sigma2=1", "--param", "r=0.5"]
GAUSS_PARAMS = ["--param", "mu1=2", "--param", "var1=16", "--param", "mu2=2",
                "--param", "var2=1", "--param", "rho=0.5"]


def run(*argv):
    return main(list(argv))


class TestSimulate:
    def test_deterministic_output(self, tmp_path, capsys):
        out1 = str(tmp_path / "a.csv")
        out2 = str(tmp_path / "b.csv")
        args = ["simulate", "--model", "bivariate-gumbel-logistic",
                *GUMBEL_PARAMS, "--n", "40", "--m", "15", "--seed", "7"]
        assert run(*args, "--out", out1) == 0
        assert run(*args, "--out", out2) == 0
        assert open(out1).read() == open(out2).read()

    def test_roundtrip_through_loader(self, tmp_path):
        out = str(tmp_path / "sim.csv")
        run("simulate", "--model", "bivariate-gaussian", *GAUSS_PARAMS,
            "--n", "25", "--m", "10", "--seed", "3", "--out", out)
        ds = load_dataset(out)
        assert ds.n == 25 and ds.m == 10
        meta = json.loads(open(out + ".meta.json").read())
        assert meta["config"]["seed"] == 3
        # serialize once more: values survive the text round trip exactly
        from mfmc.dataset import dataset_to_csv_text

        assert dataset_to_csv_text(ds) == open(out).read()

    def test_seed_required(self, capsys):
        code = run("simulate", "--model", "bivariate-gaussian", *GAUSS_PARAMS,
                   "--n", "10", "--out", "/tmp/x.csv")
        assert code == 2

    def test_bad_param_is_usage_error(self, tmp_path):
        code = run("simulate", "--model", "bivariate-gaussian",
                   "--param", "rho=2.0", "--param", "mu1=0", "--param", "var1=1",
                   "--param", "mu2=0", "--param", "var2=1",
                   "--n", "10", "--seed", "1", "--out", str(tmp_path / "x.csv"))
        assert code == 2


class TestFitAndQoi:
    @pytest.fixture()
    def sim_csv(self, tmp_path):
        out = str(tmp_path / "sim.csv")
        run("simulate", "--model", "bivariate-gaussian", *GAUSS_PARAMS,
            "--n", "60", "--m", "120", "--seed", "5", "--out", out)
        return out

    def test_closed_form_fit_payload(self, tmp_path, sim_csv):
        outdir = str(tmp_path / "fit")
        assert run("fit", "--method", "joint-ml-closed", "--input", sim_csv,
                   "--out", outdir) == 0
        payload = json.loads(open(os.path.join(outdir, "estimate.json")).read())
        assert payload["method"] == "joint-ml-closed"
        assert payload["n"] == 60 and payload["m"] == 120
        assert len(payload["theta1"]) == 2
        assert "interval" in payload and "cov" in payload
        # the location estimate reproduces the closed form from the data
        ds = load_dataset(sim_csv)
        beta = np.cov(ds.x1, ds.x2, ddof=0)[0, 1] / np.var(ds.x2)
        mu1 = np.mean(ds.x1) + beta * (np.mean(ds.x2_all) - np.mean(ds.x2))
        assert payload["theta1"][0] == pytest.approx(mu1, rel=1e-12)

    def test_fit_moment_mf(self, tmp_path, sim_csv):
        outdir = str(tmp_path / "fit2")
        assert run("fit", "--method", "moment-mf", "--family", "gaussian",
                   "--input", sim_csv, "--out", outdir) == 0
        payload = json.loads(open(os.path.join(outdir, "estimate.json")).read())
        assert "coefficients" in payload

    def test_qoi_from_estimate_file(self, tmp_path):
        sim = str(tmp_path / "g.csv")
        run("simulate", "--model", "bivariate-gumbel-logistic", *GUMBEL_PARAMS,
            "--n", "200", "--m", "400", "--seed", "9", "--out", sim)
        fitdir = str(tmp_path / "fit")
        assert run("fit", "--method", "marginal-ml-mf", "--family", "gumbel",
                   "--input", sim, "--out", fitdir) == 0
        qdir = str(tmp_path / "qoi")
        assert run("qoi", "--estimate", os.path.join(fitdir, "estimate.json"),
                   "--kind", "quantile", "--p1", "0.99", "--side", "upper",
                   "--out", qdir) == 0
        payload = json.loads(open(os.path.join(qdir, "qoi.json")).read())
        assert payload["interval"][0] == -float("inf") or payload["interval"][0] is None
        assert np.isfinite(payload["interval"][1])
        est = json.loads(open(os.path.join(fitdir, "estimate.json")).read())
        pull = -np.log(-np.log(0.99))
        assert payload["point"] == pytest.approx(
            est["theta1"][0] + est["theta1"][1] * pull, rel=1e-12)

    def test_missing_input_is_data_error(self, tmp_path):
        assert run("fit", "--method", "joint-ml-closed", "--input",
                   str(tmp_path / "none.csv"), "--out", str(tmp_path / "o")) == 3

    def test_malformed_row_is_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("x1,x2\nabc,2\n1,2\n")
        assert run("fit", "--method", "joint-ml-closed", "--input", str(bad),
                   "--out", str(tmp_path / "o")) == 3
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"]["code"] == 3
        assert "line 2" in err["error"]["message"]

    def test_degenerate_data_exit_code(self, tmp_path):
        deg = tmp_path / "deg.csv"
        deg.write_text("x1,x2\n1,5\n2,5\n3,5\n")
        assert run("fit", "--method", "joint-ml-closed", "--input", str(deg),
                   "--out", str(tmp_path / "o")) == 3

    def test_numerical_failure_exit_code(self, tmp_path, capsys):
        # information at the dependence boundary is undefined
        code = run("asymvar", "--method", "joint-ml",
                   "--model", "bivariate-gumbel-logistic",
                   "--param", "mu1=2", "--param", "sigma1=4",
                   "--param", "mu2=2", "--param", "sigma2=1", "--param", "r=1.0",
                   "--dependence", "estimated", "--out", str(tmp_path / "o"))
        assert code == 4
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"]["code"] == 4


class TestCurvesValidatePipeline:
    def test_curves_fig1_endpoint(self, tmp_path, capsys):
        outdir = str(tmp_path / "fig1")
        assert run("curves", "--figure", "fig1", "--grid", "r=1.0",
                   "--seed", "1", "--out", outdir) == 0
        text = open(os.path.join(outdir, "variance.csv")).read()
        rows = [line.split(",") for line in text.strip().splitlines()[1:]]
        joint = [float(r[3]) for r in rows if r[1] == "joint-ml"]
        assert joint and abs(joint[0] - 16.0) < 1e-4
        meta = json.loads(open(os.path.join(outdir, "metadata.json")).read())
        assert meta["config"]["grid"]["r"] == [1.0]

    def test_validate_writes_report(self, tmp_path):
        outdir = str(tmp_path / "val")
        assert run("validate", "--model", "bivariate-gaussian", *GAUSS_PARAMS,
                   "--n", "200", "--replications", "120",
                   "--methods", "baseline-ml,moment-mf", "--m-infinity",
                   "--seed", "11", "--workers", "1", "--out", outdir) == 0
        text = open(os.path.join(outdir, "validation.csv")).read()
        assert "baseline-ml" in text and "moment-mf" in text

    def test_pipeline_runs_and_echoes_sizes(self, tmp_path):
        outdir = str(tmp_path / "pipe")
        assert run("pipeline", "--seed", "2", "--n", "60", "--m", "1500",
                   "--out", outdir) == 0
        est = open(os.path.join(outdir, "estimates.csv")).read()
        assert ",60,1500" in est
        meta = json.loads(open(os.path.join(outdir, "metadata.json")).read())
        assert meta["config"]["n"] == 60 and meta["config"]["m"] == 1500
        for name in ("estimates", "dependence", "qoi", "qq"):
            assert os.path.exists(os.path.join(outdir, f"{name}.csv"))

    def test_pipeline_reads_csv_dataset(self, tmp_path):
        sim = str(tmp_path / "data.csv")
        run("simulate", "--model", "bivariate-gumbel-logistic", *GUMBEL_PARAMS,
            "--n", "60", "--m", "1500", "--seed", "4", "--out", sim)
        outdir = str(tmp_path / "pipe2")
        assert run("pipeline", "--input", sim, "--seed", "4", "--n", "60",
                   "--m", "1500", "--out", outdir) == 0

    def test_asymvar_location_only(self, tmp_path):
        outdir = str(tmp_path / "av")
        assert run("asymvar", "--method", "baseline-ml",
                   "--model", "bivariate-gumbel-logistic", *GUMBEL_PARAMS,
                   "--family", "gumbel-location", "--sigma", "4",
                   "--out", outdir) == 0
        payload = json.loads(open(os.path.join(outdir, "asymvar.json")).read())
        assert payload["rows"][0]["variance"] == pytest.approx(16.0, rel=1e-12)


class TestUsage:
    def test_unknown_subcommand(self):
        assert run("frobnicate") == 2

    def test_unknown_flag_rejected(self, tmp_path):
        assert run("curves", "--figure", "fig1", "--seed", "1",
                   "--out", str(tmp_path), "--frob", "1") == 2

    def test_version_flag(self, capsys):
        assert run("--version") == 0
