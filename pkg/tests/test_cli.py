import csv
import json
import os

import pytest

import proxgm_engine.cli
from proxgm_engine.cli import main

@pytest.fixture(autouse = True)
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)

@pytest.fixture
def instance(tmp_path):
    path = str(tmp_path / "instance.json")
    assert main(["generate", "--out", path, "--nin", "6", "--nout", "1", "--dim", "3", "--seed", "2"]) == 0
    return path

def test_usage(capsys):
    assert main([]) == 1
    assert main(["-h"]) == 0
    assert "solve" in capsys.readouterr().out
    assert main(["frobnicate"]) == 1
    assert main(["solve", "-h"]) == 0

def test_generate(tmp_path, instance):
    with open(instance) as f:
        d = json.load(f)
    assert len(d["g1"]["features"]) == 7
    assert d["mask"]["rows"] == [6]
    dataset = str(tmp_path / "set.json")
    assert main(["generate", "--kind", "points", "--out", dataset, "--count", "3",
                 "--npoints", "8", "--inliers", "8"]) == 0
    with open(dataset) as f:
        assert len(json.load(f)) == 3
    assert main(["generate", "--kind", "points", "--out", dataset, "--npoints", "8"]) == 1
    assert main(["generate", "--out", dataset, "--count", "0"]) == 1

def test_solve_to_stdout(instance, capsys):
    capsys.readouterr()
    assert main(["solve", instance]) == 0
    result = json.loads(capsys.readouterr().out)
    assert set(result) == {'method', 'matching', 'objective', 'iters', 'converged', 'wall_ms', 'accuracy'}
    assert result['method'] == 'dpgm'
    assert sorted(result['matching']) == list(range(7))
    assert 0.0 <= result['accuracy'] <= 1.0

@pytest.mark.parametrize("method", ['sm', 'rrwm', 'gagm', 'ipfp'])
def test_solve_methods(tmp_path, instance, method):
    out = str(tmp_path / "result.json")
    assert main(["solve", instance, "--method", method, "--out", out, "--max-iters", "50"]) == 0
    with open(out) as f:
        result = json.load(f)
    assert result['method'] == method
    assert result['iters'] <= 50

def test_solve_without_truth(tmp_path, capsys):
    path = str(tmp_path / "bare.json")
    with open(path, "w") as f:
        json.dump({"g1": {"features": [[0.0], [1.0], [3.0]], "edges": [[0, 1], [1, 2]]},
                   "g2": {"features": [[3.0], [1.0], [0.0]], "edges": [[0, 1], [1, 2]]}}, f)
    capsys.readouterr()
    assert main(["solve", path, "--method", "sm"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert 'accuracy' not in result

def test_solve_trace(tmp_path, instance):
    trace = str(tmp_path / "trace.csv")
    assert main(["solve", instance, "--trace", trace, "--max-iters", "5", "--out", str(tmp_path / "r.json")]) == 0
    with open(trace, newline = "") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["iter", "objective", "delta_sq"]
    assert 1 <= len(rows) - 1 <= 5
    assert main(["solve", instance, "--method", "sm", "--trace", trace]) == 1
    assert main(["solve", instance, "--lambda-decay", "1", "--out", str(tmp_path / "plain.json")]) == 0

def test_solve_errors(tmp_path, instance):
    assert main(["solve", str(tmp_path / "missing.json")]) == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{\"g1\": ")
    assert main(["solve", str(broken)]) == 2
    malformed = tmp_path / "malformed.json"
    malformed.write_text("{\"g1\": {}}")
    assert main(["solve", str(malformed)]) == 1
    assert main(["solve", instance, "--method", "hungarian"]) == 1
    assert main(["solve", instance, "--method", "sm", "--lambda", "2"]) == 1
    assert main(["solve", instance, "--method", "rrwm", "--lambda-decay", "1"]) == 1
    assert main(["solve", instance, "--lambda-decay", "2"]) == 1
    assert main(["solve", instance, "--max-iters", "0"]) == 1
    assert main(["solve", instance, "--scale", "-1"]) == 1
    assert main(["solve", instance, "--kernel", "learned"]) == 1
    assert main(["solve", instance, "--kernel", "house"]) == 1

def test_log_copy(tmp_path, instance):
    result_dir = str(tmp_path / "run")
    assert main(["solve", instance, "-L", "-c", result_dir, "--out", str(tmp_path / "r.json")]) == 0
    assert os.path.isfile(os.path.join(result_dir, "log"))

def test_bench_sweep(tmp_path):
    config = tmp_path / "exp.json"
    config.write_text(json.dumps({"values": [0.0, 0.5], "methods": ["dpgm", "rrwm"], "trials": 2,
                                  "spec": {"n_in": 5, "dim": 3}, "record_timing": False}))
    out = str(tmp_path / "r.csv")
    assert main(["bench-sweep", "--config", str(config), "--out", out]) == 0
    with open(out, newline = "") as f:
        rows = list(csv.reader(f))
    assert ",".join(rows[0]) == "method,sweep_var,sweep_value,seed,accuracy,objective,oracle_ratio,wall_ms,iters"
    assert len(rows) == 1 + 2 * 2 * 2
    assert main(["bench-sweep", "--config", str(config), "--preset", "noise"]) == 1
    assert main(["bench-sweep", "--config", str(tmp_path / "missing.json")]) == 2
    config.write_text(json.dumps({"sweep_var": "temperature"}))
    assert main(["bench-sweep", "--config", str(config)]) == 1

def test_bench_sweep_resume(tmp_path):
    config = tmp_path / "exp.json"
    config.write_text(json.dumps({"values": [0.0], "methods": ["sm"], "trials": 2,
                                  "spec": {"n_in": 4, "dim": 2}, "record_timing": False}))
    run_dir = str(tmp_path / "run")
    args = ["bench-sweep", "--config", str(config), "--resume", "-c", run_dir, "--format", "json"]
    assert main(args) == 0
    with open(os.path.join(run_dir, "results.json")) as f:
        first = json.load(f)
    assert os.path.isdir(os.path.join(run_dir, "journal"))
    assert main(args) == 0
    with open(os.path.join(run_dir, "results.json")) as f:
        assert json.load(f) == first

def test_gradcheck(capsys):
    capsys.readouterr()
    assert main(["gradcheck", "--method", "polynomial", "--n", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("max relative error")
    assert lines[-1] == "PASS"
    assert main(["gradcheck", "--h", "1e-9"]) == 1
    assert main(["gradcheck", "--n", "1"]) == 1

def test_gradcheck_failure(capsys, monkeypatch):
    monkeypatch.setattr(proxgm_engine.cli, 'finite_diff_check', lambda *args, **kwargs: 0.5)
    capsys.readouterr()
    assert main(["gradcheck", "--method", "sm"]) == 1
    assert capsys.readouterr().out.splitlines() == ["max relative error 5.000e-01", "FAIL"]

def test_train(tmp_path):
    dataset = str(tmp_path / "set.json")
    single = str(tmp_path / "one.json")
    assert main(["generate", "--kind", "metric", "--out", dataset, "--count", "3",
                 "--nin", "5", "--dim", "3"]) == 0
    assert main(["generate", "--kind", "metric", "--out", single, "--nin", "5", "--dim", "3", "--seed", "9"]) == 0
    weights = str(tmp_path / "w.json")
    curve = str(tmp_path / "curve.csv")
    assert main(["train", "--dataset", dataset, "--heldout", dataset, "--epochs", "2", "--unroll", "3",
                 "--batch", "2", "--lr", "0.01", "--seed", "1", "--out", weights, "--curve", curve]) == 0
    with open(weights) as f:
        w = json.load(f)
    assert list(w) == ["W"]
    assert len(w["W"]) == 3 and all(len(row) == 3 for row in w["W"])
    with open(curve, newline = "") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["epoch", "mean_loss", "train_accuracy", "heldout_accuracy"]
    assert [r[0] for r in rows[1:]] == ["0", "1"]
    assert main(["solve", single, "--kernel", "learned", "--weights", weights,
                 "--out", str(tmp_path / "r.json")]) == 0

def test_train_default_output(tmp_path):
    dataset = str(tmp_path / "set.json")
    assert main(["generate", "--kind", "metric", "--out", dataset, "--count", "2", "--nin", "4", "--dim", "2"]) == 0
    assert main(["train", "--dataset", dataset, "--epochs", "1", "--unroll", "2", "-c", str(tmp_path / "run")]) == 0
    assert os.path.isfile(str(tmp_path / "run" / "weights.json"))

def test_train_errors(tmp_path, instance):
    assert main(["train"]) == 1
    assert main(["train", "--dataset", instance]) == 1
    assert main(["train", "--dataset", str(tmp_path / "none.json")]) == 2
    dataset = str(tmp_path / "set.json")
    assert main(["generate", "--kind", "metric", "--out", dataset, "--count", "2", "--nin", "4", "--dim", "2"]) == 0
    assert main(["train", "--dataset", dataset, "--method", "ipfp"]) == 1
