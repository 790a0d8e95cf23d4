import csv
import json
import subprocess
import sys

import pytest

from colsim.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_analytic_ncg_prints(capsys):
    assert main(["analytic", "ncg", "--model", "step", "--ncor", "10", "--epsilon", "0.001"]) == 0
    assert capsys.readouterr().out.strip() == "22"


def test_analytic_curve(tmp_path):
    out = tmp_path / "curve.csv"
    assert main(["analytic", "curve", "--model", "step", "--ncor", "10", "--epsilon", "0.001", "--nmax", "30", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [int(r["n"]) for r in rows] == list(range(1, 31))
    lam = {int(r["n"]): float(r["lambda_min"]) for r in rows}
    assert lam[21] < 0 <= lam[22]
    manifest = json.loads(out.with_suffix(".manifest.json").read_text())
    assert manifest["command"] == "analytic"
    assert manifest["parameters"]["ncor"] == 10


def test_continuum(tmp_path):
    out = tmp_path / "c.csv"
    args = ["continuum", "--gamma", "1", "--tau", "100", "--T", "2", "--delta", "0.1", "--f", "step", "--out", str(out)]
    assert main(args) == 0
    rows = read_csv(out)
    assert all(abs(float(r["integral"]) - 1) < 1e-10 for r in rows)
    assert all(float(r["abs_error"]) < 1e-10 for r in rows)


@pytest.mark.parametrize(
    "args,flag",
    [
        (["simulate", "--epsilon", "0.7"], "--epsilon"),
        (["analytic", "--epsilon", "0"], "--epsilon"),
        (["simulate", "--epsilon", "-0.1"], "--epsilon"),
        (["analytic", "--model", "step", "--ncor", "-3"], "--ncor"),
        (["simulate", "--trajectories", "0"], "--trajectories"),
        (["sweep", "--ncor", "5:2"], "--ncor"),
        (["continuum", "--delta", "0.3", "--T", "2"], "--delta"),
    ],
)
def test_invalid_arguments_exit_2(args, flag, capsys):
    assert main(args) == 2
    assert flag in capsys.readouterr().err


def test_runtime_error_exit_1(capsys, tmp_path):
    code = main(["analytic", "ncg", "--model", "step", "--ncor", "10", "--epsilon", "0.001", "--nmax", "12"])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_simulate_is_reproducible(tmp_path):
    base = ["simulate", "--model", "step", "--ncor", "3", "--epsilon", "0.01", "--trajectories", "20000", "--nmax", "12", "--seed", "4"]
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert main(base + ["--shards", "3", "--out", str(a)]) == 0
    assert main(base + ["--shards", "3", "--threads", "1", "--out", str(b)]) == 0
    assert main(base + ["--shards", "5", "--out", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    manifest = json.loads(a.with_suffix(".manifest.json").read_text())
    assert manifest["parameters"]["seed"] == 4
    assert "ncg_empirical" in manifest["results"]
    assert list(read_csv(a)[0]) == ["n", "w0", "wx", "wy", "wz", "se0", "sex", "sey", "sez", "lambda_min", "lambda_se"]


def test_seed_from_environment(tmp_path, monkeypatch):
    base = ["corr", "--model", "exponential", "--ncor", "4", "--epsilon", "0.05", "--trajectories", "3000", "--n", "40", "--hmax", "10"]
    monkeypatch.setenv("COLSIM_SEED", "9")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(base + ["--out", str(a)]) == 0
    assert main(base + ["--seed", "9", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    manifest = json.loads(a.with_suffix(".manifest.json").read_text())
    assert manifest["results"]["ncor_fitted"] > 0
    assert list(read_csv(a)[0]) == ["h", "gamma_h", "se_h"]


def test_sweep_range(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--model", "step", "--ncor", "2:10:2", "--epsilon", "0.001", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [int(r["ncor"]) for r in rows] == [2, 4, 6, 8, 10]
    assert [int(r["ncg_analytic"]) for r in rows] == [6, 10, 14, 18, 22]
    assert all(r["ncg_empirical"] == "" for r in rows)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "colsim", "analytic", "ncg", "--ncor", "5", "--model", "step", "--epsilon", "0.001"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.strip() == "12"


def test_simulate_zero_epsilon(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["simulate", "--model", "uncorrelated", "--epsilon", "0", "--trajectories", "1000", "--nmax", "5", "--out", str(out)]) == 0
    assert all(float(r["w0"]) == 1.0 for r in read_csv(out))
