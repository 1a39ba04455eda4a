"""File contracts shared with the estimator package."""

import csv
import os
import shutil
import stat
import subprocess
import sys
from pathlib import Path

import pytest

import levdyn

ROOT = Path(__file__).resolve().parents[2]


def training_header(length):
    return [f"s{i}" for i in range(length)] + ["k", "phi_star", "omega", "n", "seed"]


def test_training_set_columns_and_laws(tmp_path):
    path = tmp_path / "train.csv"
    levdyn.gen_training_set(path, count=200, seed=11)
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == training_header(59)
    assert len(rows) == 201
    for row in rows[1:]:
        k, phi, omega, n, seed = int(row[59]), float(row[60]), float(row[61]), float(row[62]), int(row[63])
        assert k in (1, 2, 3)
        assert levdyn.admissible(phi, omega)
        assert 1.0 <= n <= 1e4
        assert seed < 2**53
        assert all(-1.0 <= float(v) <= 1.0 for v in row[:59])


def test_training_set_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    levdyn.gen_training_set(a, count=30, seed=5)
    levdyn.gen_training_set(b, count=30, seed=5)
    assert a.read_bytes() == b.read_bytes()
    levdyn.gen_training_set(b, count=30, seed=6)
    assert a.read_bytes() != b.read_bytes()


def test_prediction_file(tmp_path):
    path = tmp_path / "pred.csv"
    path.write_text("row_id,k_hat,phi_star_hat,omega_hat\n0,2,0.845,0.557\n1,1,0.3,0.8\n")
    assert levdyn.read_predictions(path) == [(0, 2, 0.845, 0.557), (1, 1, 0.3, 0.8)]
    path.write_text("row_id,k_hat,phi_star_hat,omega_hat\n0,4,0.845,0.557\n")
    with pytest.raises(levdyn.ParseError):
        levdyn.read_predictions(path)
    path.write_text("row_id,k_hat,phi_star_hat\n0,1,0.5\n")
    with pytest.raises(levdyn.SchemaError):
        levdyn.read_predictions(path)


def find_cli():
    env = os.environ.get("LEVDYN_CLI")
    if env:
        return env
    built = ROOT / "build" / "tools" / "levdyn"
    if built.exists():
        return str(built)
    return shutil.which("levdyn")


PREDICTOR = """#!{python}
import argparse, csv
ap = argparse.ArgumentParser()
ap.add_argument("--model-dir")
ap.add_argument("--series")
ap.add_argument("--out")
a = ap.parse_args()
with open(a.series, newline="") as f:
    rows = list(csv.DictReader(f))
with open(a.out, "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["row_id", "k_hat", "phi_star_hat", "omega_hat"])
    for i, r in enumerate(rows):
        # echo the generating parameters back as the estimate
        w.writerow([i, r["k"], r["phi_star"], r["omega"]])
"""


def test_estimate_through_model_dir(tmp_path):
    cli = find_cli()
    if cli is None:
        pytest.skip("levdyn command-line tool not built")
    model = tmp_path / "model"
    model.mkdir()
    predict = model / "predict"
    predict.write_text(PREDICTOR.format(python=sys.executable))
    predict.chmod(predict.stat().st_mode | stat.S_IXUSR)
    data = tmp_path / "series.csv"
    levdyn.gen_training_set(data, count=20, seed=3)
    out = tmp_path / "est.csv"
    subprocess.run([cli, "estimate", "--model-dir", str(model), "--input", str(data), "--out", str(out)],
                   check=True, capture_output=True)
    with open(out, newline="") as f:
        rows = list(csv.DictReader(f))
    with open(data, newline="") as f:
        truth = list(csv.DictReader(f))
    assert len(rows) == 20
    for r, t in zip(rows, truth):
        assert float(r["phi_star_hat"]) == float(t["phi_star"])
        assert int(r["k_hat"]) == int(t["k"])
        assert r["regime"] == levdyn.classify(levdyn.MapParams(float(t["phi_star"]), float(t["omega"]))).tag
