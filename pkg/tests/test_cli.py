import csv
import json
import math

import numpy as np
import pytest

from timesplit.cli import main


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out", str(d / "data"), "--seed", "5"]) == 0
    cfg = json.loads((d / "data" / "config.json").read_text())
    cfg["split"]["repetitions"] = 3
    cfg["chemspace"]["pmfg_max_nodes"] = 30
    cfg["leakage"]["n_permutations"] = 5000
    (d / "data" / "small.json").write_text(json.dumps(cfg))
    return d / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_evaluate_smoke_and_rerun(synth_dir, tmp_path, capsys):
    cfg = str(synth_dir / "small.json")
    code, _, err = run(capsys, "evaluate", "--config", cfg, "--out", str(tmp_path / "a"))
    assert code == 0, err
    for name in ("records.jsonl", "comparison.json", "comparison.csv"):
        assert (tmp_path / "a" / name).is_file()
    assert run(capsys, "evaluate", "--config", cfg, "--out", str(tmp_path / "b"), "--jobs", "2")[0] == 0
    for name in ("records.jsonl", "comparison.json", "comparison.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    # the effective config reproduces the run
    eff = str(tmp_path / "a" / "effective_config.json")
    assert run(capsys, "evaluate", "--config", eff, "--out", str(tmp_path / "c"))[0] == 0
    assert (tmp_path / "a" / "records.jsonl").read_bytes() == (tmp_path / "c" / "records.jsonl").read_bytes()


def test_seed_flag_changes_random_splits(synth_dir, tmp_path, capsys):
    cfg = str(synth_dir / "small.json")
    run(capsys, "evaluate", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "1")
    run(capsys, "evaluate", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "2")
    assert (tmp_path / "a" / "records.jsonl").read_bytes() != (tmp_path / "b" / "records.jsonl").read_bytes()


def test_missing_input_file(synth_dir, tmp_path, capsys):
    cfg = json.loads((synth_dir / "small.json").read_text())
    cfg["inputs"]["labels"] = str(tmp_path / "gone.csv")
    cfg["split"]["repetitions"] = 0
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({**cfg, "inputs": {**cfg["inputs"], "features": {
        k: str(synth_dir / v) for k, v in cfg["inputs"]["features"].items()}}}))
    code, _, err = run(capsys, "evaluate", "--config", str(p), "--out", str(tmp_path / "o"))
    assert code == 2
    doc = json.loads(err)
    assert doc["error"] == "config"
    assert any("gone.csv" in m for m in doc["messages"])
    assert any("repetitions" in m for m in doc["messages"])  # all problems reported at once


def test_missing_config_and_bad_json(tmp_path, capsys):
    assert run(capsys, "evaluate", "--config", str(tmp_path / "none.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert run(capsys, "evaluate", "--config", str(bad), "--out", str(tmp_path))[0] == 2


def test_explain_prints_resolved_config(synth_dir, capsys):
    code, out, _ = run(capsys, "evaluate", "--config", str(synth_dir / "small.json"), "--explain")
    assert code == 0
    cfg = json.loads(out)
    assert cfg["filter"]["r2_threshold"] == 0.85
    assert all(p.startswith("/") for p in cfg["inputs"]["features"].values())
    code, out, _ = run(capsys, "synth", "--explain", "--seed", "4")
    assert code == 0 and json.loads(out)["seed"] == 4


def test_runtime_failure_exit_code(synth_dir, tmp_path, capsys):
    cfg = json.loads((synth_dir / "small.json").read_text())
    cfg["targets"] = ["no_such_target"]
    p = synth_dir / "bad_target.json"
    p.write_text(json.dumps(cfg))
    code, _, err = run(capsys, "evaluate", "--config", str(p), "--out", str(tmp_path / "o"))
    assert code == 1 and json.loads(err)["error"] == "runtime"


def test_importance_leakage_chemspace_on_synthetic(synth_dir, tmp_path, capsys):
    cfg = str(synth_dir / "small.json")
    for cmd in ("importance", "leakage", "chemspace"):
        code, _, err = run(capsys, cmd, "--config", cfg, "--out", str(tmp_path / cmd))
        assert code == 0, err
    assert (tmp_path / "importance" / "importance.csv").is_file()
    leak = json.loads((tmp_path / "leakage" / "leakage.json").read_text())
    assert leak["p_value"] < 0.01
    summary = json.loads((tmp_path / "chemspace" / "chemspace" / "summary.json").read_text())
    assert summary["pmfg_edges"] == 3 * (30 - 2)
    for name in ("pca_scores.csv", "correlation_distance_hist.csv", "tanimoto_hist.csv",
                 "pmfg_edges.csv", "shortest_path_hist.csv"):
        assert (tmp_path / "chemspace" / "chemspace" / name).is_file()


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


@pytest.fixture
def toy_inputs(tmp_path):
    """60 compounds, feature 'a' carries the label; 'b' and 'c' are noise."""
    rng = np.random.default_rng(0)
    n = 60
    ids = [f"D{i:02d}" for i in range(n)]
    y = np.array([i % 2 for i in range(n)])
    a = y * 2.0 + rng.normal(0, 0.3, n)
    write(tmp_path / "features.csv", ["compound_id", "a", "b", "c"],
          [[c, a[i], rng.normal(), rng.normal()] for i, c in enumerate(ids)])
    write(tmp_path / "labels.csv", ["compound_id", "ae"], [[c, y[i]] for i, c in enumerate(ids)])
    dates = [f"{1980 + i // 2}-{1 + i % 12:02d}" for i in range(n)]
    write(tmp_path / "dates.csv", ["compound_id", "market_date"], list(zip(ids, dates)))
    write(tmp_path / "approvals.csv", ["compound_id", "approval_date"], list(zip(ids, dates)))
    pubs = []
    for i, c in enumerate(ids):
        base = 12 * (1980 + i // 2) + (i % 12)
        for f, lag in (("a", 1), ("b", 10), ("c", 10)):
            m = base + lag
            pubs.append([c, f, f"{m // 12}-{m % 12 + 1:02d}"])
    write(tmp_path / "publications.csv", ["compound_id", "feature_id", "first_pub_date"], pubs)
    cfg = {
        "inputs": {"features": {"toy": "features.csv"}, "labels": "labels.csv", "dates": "dates.csv",
                   "approvals": "approvals.csv", "publications": "publications.csv"},
        "split": {"threshold": "2004-01", "repetitions": 2, "k_folds": 3},
        "filter": {"cv_threshold": 0.0},
        "importance": {"n_folds": 3, "n_shuffles": 10},
        "leakage": {"k": 1, "n_permutations": 30000, "restrict_to": "all"},
        "seed": 1,
    }
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    return tmp_path


def test_importance_ranks_signal_first(toy_inputs, capsys):
    out = toy_inputs / "imp"
    assert run(capsys, "importance", "--config", str(toy_inputs / "cfg.json"), "--out", str(out))[0] == 0
    rows = list(csv.DictReader(open(out / "importance.csv")))
    assert rows[0]["feature"] == "a"


def test_leakage_three_feature_toy(toy_inputs, capsys):
    out = toy_inputs / "leak"
    assert run(capsys, "leakage", "--config", str(toy_inputs / "cfg.json"), "--out", str(out))[0] == 0
    res = json.loads((out / "leakage.json").read_text())
    assert res["top_features"] == ["a"] and res["pool_size"] == 3
    se = math.sqrt(2 / 9 / 30000)
    assert abs(res["p_value"] - 1 / 3) < 3 * se + 1e-4


def test_chemspace_five_compounds(tmp_path, capsys):
    ids = ["A", "B", "C", "D", "E"]
    smiles = ["CCO", "c1ccccc1", "CC(=O)O", "CCN", "C1CCCCC1"]
    rng = np.random.default_rng(3)
    write(tmp_path / "f.csv", ["compound_id", *[f"x{j}" for j in range(6)]],
          [[c, *rng.normal(size=6)] for c in ids])
    write(tmp_path / "d.csv", ["compound_id", "market_date"],
          list(zip(ids, ["1990-01", "1991-01", "1992-01", "2000-01", "2001-01"])))
    write(tmp_path / "s.csv", ["compound_id", "smiles"], list(zip(ids, smiles)))
    cfg = {"inputs": {"features": {"f": "f.csv"}, "dates": "d.csv", "smiles": "s.csv"},
           "filter": {"cv_threshold": 0.0, "r2_threshold": 1.0}, "seed": 0}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    code, _, err = run(capsys, "chemspace", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "o"))
    assert code == 0, err
    lines = (tmp_path / "o" / "chemspace" / "pmfg_edges.csv").read_text().splitlines()
    assert len(lines) - 1 == 9
