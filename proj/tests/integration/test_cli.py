"""Integration tests driving the command-line binary.

The binary path comes from the PPCATE_BIN environment variable (set by the
ctest registration); running pytest from a configured checkout falls back to
build/ppcate.
"""

import json
import os
import pathlib
import subprocess

import pytest

BIN = os.environ.get(
    "PPCATE_BIN",
    str(pathlib.Path(__file__).resolve().parents[2] / "build" / "ppcate"),
)


def run(*args, expect=0):
    proc = subprocess.run(
        [BIN, *[str(a) for a in args]], capture_output=True, text=True
    )
    assert proc.returncode == expect, (
        f"exit {proc.returncode} (wanted {expect})\n"
        f"stdout: {proc.stdout}\nstderr: {proc.stderr}"
    )
    return proc


@pytest.fixture(scope="module")
def sim_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "scenario1.csv"
    run("simulate", "--scenario", 1, "--n", 300, "--d", 3, "--seed", 7,
        "--out", path)
    return path


def test_version_and_help():
    out = run("--version").stdout
    assert out.startswith("ppcate ")
    assert "simulate" in run("--help").stdout


def test_simulate_schema_and_determinism(sim_csv, tmp_path):
    header = sim_csv.read_text().splitlines()[0]
    assert header == "y,z,x1,x2,x3,tau_true"
    assert len(sim_csv.read_text().splitlines()) == 301

    again = tmp_path / "again.csv"
    run("simulate", "--scenario", 1, "--n", 300, "--d", 3, "--seed", 7,
        "--out", again)
    assert again.read_bytes() == sim_csv.read_bytes()

    other = tmp_path / "other.csv"
    run("simulate", "--scenario", 1, "--n", 300, "--d", 3, "--seed", 8,
        "--out", other)
    assert other.read_bytes() != sim_csv.read_bytes()


def test_fit_bundle_and_rerun_identical(sim_csv, tmp_path):
    b1 = tmp_path / "bundle1"
    b2 = tmp_path / "bundle2"
    out = run("fit", "--in", sim_csv, "--out", b1, "--seed", 3,
              "--folds", 5).stdout
    assert "wrote bundle" in out
    run("fit", "--in", sim_csv, "--out", b2, "--seed", 3, "--folds", 5)

    names = ["manifest.json", "score_model.json", "tree.json", "tree.txt",
             "grid.csv"]
    for name in names:
        assert (b1 / name).exists(), name
        assert (b1 / name).read_bytes() == (b2 / name).read_bytes(), name
    assert not (b1 / "matches.csv").exists()  # opt-in artifact

    manifest = json.loads((b1 / "manifest.json").read_text())
    assert manifest["data"] == {"n": 300, "d": 3}
    assert manifest["seed"] == 3
    assert manifest["fit"]["k_used"] == 6  # round(ln 300)

    b3 = tmp_path / "bundle3"
    run("fit", "--in", sim_csv, "--out", b3, "--seed", 3, "--folds", 5,
        "--dump-matches")
    assert (b3 / "matches.csv").read_text().startswith(
        "unit,rank,neighbor,distance\n")


def test_predict_consumes_fit_output(sim_csv, tmp_path):
    bundle = tmp_path / "bundle"
    run("fit", "--in", sim_csv, "--out", bundle, "--seed", 3, "--folds", 5)
    pred = tmp_path / "pred.csv"
    run("predict", "--bundle", bundle, "--in", sim_csv, "--out", pred)
    lines = pred.read_text().splitlines()
    assert lines[0] == "e_hat,p_hat,tau_hat"
    assert len(lines) == 301
    e, p, tau = map(float, lines[1].split(","))
    assert 0.0 < e < 1.0


def test_bootstrap_ci_outputs(sim_csv, tmp_path):
    out_dir = tmp_path / "boot"
    run("bootstrap-ci", "--in", sim_csv, "--out", out_dir, "--seed", 2,
        "--b", 8, "--level", 0.9, "--folds", 5)
    lines = (out_dir / "intervals.csv").read_text().splitlines()
    assert lines[0] == "index,estimate,lo,hi"
    assert len(lines) == 301
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["B"] == 8
    assert summary["level"] == 0.9
    assert 0.0 <= summary["coverage"] <= 1.0  # tau_true column was present
    assert summary["mean_width"] >= 0.0


def test_bench_report(tmp_path):
    out = tmp_path / "bench.json"
    proc = run("bench", "--scenario", 6, "--n", 150, "--d", 2, "--seed", 3,
               "--trials", 2, "--methods", "pp,prog", "--folds", 5,
               "--out", out)
    assert "mean MSE" in proc.stdout
    rep = json.loads(out.read_text())
    assert rep["trials"] == 2
    assert set(rep["mean_mse"]) == {"pp", "prog"}
    assert len(rep["trial_records"]) == 2


def test_sweep_k_report(tmp_path):
    out = tmp_path / "sweep.json"
    proc = run("sweep-k", "--scenario", 1, "--n", 260, "--d", 2, "--seed", 17,
               "--trials", 2, "--k-values", "1,3", "--folds", 5, "--out", out)
    assert "K=1" in proc.stdout
    sweep = json.loads(out.read_text())
    assert [r["k"] for r in sweep["results"]] == [1, 3]


def test_usage_errors_exit_2(tmp_path):
    run("simulate", "--scenario", 1, expect=2)  # missing --out
    run("nonsense-subcommand", expect=2)
    run("fit", "--in", tmp_path / "missing.csv", "--out", tmp_path / "b",
        expect=2)
    run("simulate", "--scenario", 9, "--out", tmp_path / "x.csv", expect=2)
    run("sweep-k", "--scenario", 1, "--n", 100, "--out", tmp_path / "s.json",
        expect=2)  # neither --kmax nor --k-values


def test_malformed_csv_diagnostics(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("y,z,x1\n1.0,1,0.5\n2.0,oops,0.3\n1.5,0,0.2\n")
    proc = run("fit", "--in", bad, "--out", tmp_path / "b", expect=2)
    assert "row" in proc.stderr  # row-level diagnostic reaches the user
