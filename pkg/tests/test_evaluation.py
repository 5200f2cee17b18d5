import json

import numpy as np
import pytest

from timesplit.data import DataError, FeatureTable, MonthDate
from timesplit.evaluation import (
    RunRecord,
    build_comparison_report,
    column_means,
    concatenate_datasets,
    ensemble_across_datasets,
    ensemble_records,
    fit_fold_ensemble,
    impute,
    read_records_jsonl,
    run_grid,
    train_fold_ensemble,
    write_records_jsonl,
)
from timesplit.learners import LearnerSpec, predict_proba, train
from timesplit.metrics import MetricSet
from timesplit.rng import derive_seed
from timesplit.splits import random_split, stratified_kfold, time_split

from .conftest import toy_bundle


def xy(n=60, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    y = (X[:, 0] + rng.normal(0, 0.7, n) > 0).astype(float)
    return X, y


@pytest.mark.parametrize("kind", ["elastic_net", "naive_bayes", "gbdt"])
def test_fold_ensemble_is_mean_of_independent_fold_models(kind):
    X, y = xy()
    Xt = np.random.default_rng(9).normal(size=(15, 3))
    spec = LearnerSpec(kind, {"n_trees": 20} if kind == "gbdt" else {})
    got = train_fold_ensemble(spec, X, y, Xt, k=5, splitting_seed=4, training_seed=8)
    ids = [str(i) for i in range(len(y))]
    plan = stratified_kfold(ids, y, 5, 4)
    vectors = []
    for f in range(5):
        rows = np.array([plan.assignments[c] != f for c in ids])
        vectors.append(predict_proba(train(spec, X[rows], y[rows]), Xt))
    assert np.array_equal(got, np.mean(np.vstack(vectors), axis=0))
    assert np.allclose(got, np.mean(np.vstack(vectors[::-1]), axis=0), rtol=0, atol=1e-15)
    assert np.array_equal(got, train_fold_ensemble(spec, X, y, Xt, 5, 4, 8))


def test_fold_ensemble_imputes_with_training_fold_means():
    X, y = xy()
    X[::7, 1] = np.nan
    ens = fit_fold_ensemble(LearnerSpec("elastic_net"), X, y, k=3)
    Xt = X[:5].copy()
    assert np.all(np.isfinite(ens.predict(Xt)))
    assert np.allclose(column_means(np.array([[1.0, np.nan], [3.0, np.nan]])), [2.0, 0.0])
    assert impute(np.array([[np.nan, 1.0]]), np.array([5.0, 0.0])).tolist() == [[5.0, 1.0]]


def test_ensemble_across_datasets():
    assert ensemble_across_datasets([[0.2, 0.4], [0.6, 0.8]]) == pytest.approx([0.4, 0.6])
    assert ensemble_across_datasets([[0.3, 0.7]]).tolist() == [0.3, 0.7]
    assert ensemble_across_datasets([[0.25] * 3] * 4).tolist() == [0.25] * 3
    with pytest.raises(ValueError):
        ensemble_across_datasets([[0.1], [0.1, 0.2]])


def test_concatenate_datasets():
    ids = ("a", "b", "c")
    t1 = FeatureTable("x", ids, ("f", "g"), np.ones((3, 2)))
    t2 = FeatureTable("y", ids[::-1], ("f", "g", "h", "i"), np.arange(12.0).reshape(3, 4))
    c = concatenate_datasets([t1, t2])
    assert c.shape == (3, 6)
    assert c.feature_names == ("x:f", "x:g", "y:f", "y:g", "y:h", "y:i")
    assert c.values[0, 2:].tolist() == [8.0, 9.0, 10.0, 11.0]  # aligned by id
    assert concatenate_datasets([t1]).values.tolist() == t1.values.tolist()
    with pytest.raises(DataError):
        concatenate_datasets([t1, FeatureTable("z", ("a", "b"), ("f",), np.ones((2, 1)))])


def _plans(bundle, reps, cut=30):
    tp = time_split(bundle, MonthDate.from_index(MonthDate(1990, 1).index() + cut))
    rp = [random_split(bundle, len(tp.train_ids), len(tp.test_ids), derive_seed(0, "r", i)) for i in range(reps)]
    return {"time": tp, "random": rp}


def test_grid_counts_and_order():
    b = toy_bundle()
    recs = run_grid(b, None, [LearnerSpec("elastic_net")], ["ae"], _plans(b, 20), n_repetitions=20, k=3)
    assert len(recs) == 40
    assert all(r.error is None for r in recs)
    assert run_grid(b, None, [LearnerSpec("elastic_net")], [], _plans(b, 2), 2) == []


def test_grid_time_and_random_share_inner_seeds():
    b = toy_bundle()
    recs = run_grid(b, None, [LearnerSpec("naive_bayes")], ["ae"], _plans(b, 3), 3, base_seed=5, k=3)
    t = {r.repetition: r for r in recs if r.method == "time"}
    rnd = {r.repetition: r for r in recs if r.method == "random"}
    for rep in range(3):
        assert t[rep].splitting_seed == rnd[rep].splitting_seed
        assert t[rep].training_seed == rnd[rep].training_seed


def test_grid_jobs_do_not_change_results(tmp_path):
    b = toy_bundle()
    plans = _plans(b, 4)
    specs = [LearnerSpec("elastic_net"), LearnerSpec("gbdt", {"n_trees": 5})]
    a = run_grid(b, None, specs, ["ae"], plans, 4, k=3, jobs=1)
    c = run_grid(b, None, specs, ["ae"], plans, 4, k=3, jobs=3)
    write_records_jsonl(a, tmp_path / "a.jsonl")
    write_records_jsonl(c, tmp_path / "c.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "c.jsonl").read_bytes()
    assert [r.to_dict() for r in read_records_jsonl(tmp_path / "a.jsonl")] == [r.to_dict() for r in a]


def test_grid_records_cell_failures():
    b = toy_bundle(n=12)
    # 8 training compounds hold 4 positives: too few for 5 stratified folds
    recs = run_grid(b, None, [LearnerSpec("elastic_net")], ["ae"], _plans(b, 1, cut=8), 1, k=5)
    assert any(r.error for r in recs)
    rep = build_comparison_report(recs)
    assert rep.failed_records == sum(1 for r in recs if r.error)


def _rec(dataset, target, method, rep, auc, learner="elastic_net"):
    m = MetricSet(accuracy=0.5, f1=0.5, mcc=0.0, roc_auc=auc, pr_auc=0.5)
    return RunRecord(dataset, learner, target, {"method": method, "label": method}, rep, 0, 0, m)


def test_report_identical_metrics():
    recs = [_rec(d, "t", m, r, 0.7) for d in ("a", "b") for m in ("time", "random") for r in range(3)]
    rep = build_comparison_report(recs)
    assert all(c.difference == 0 for c in rep.cells)
    assert all(t.result.p_value == 0.5 for t in rep.targets)
    assert rep.combined_p == pytest.approx(0.5)


def test_report_groups_incomplete_and_json():
    recs = [_rec("prot", "t", "time", 0, 0.6), _rec("prot", "t", "random", 0, 0.7),
            _rec("other", "t", "time", 0, 0.5), _rec("other", "t", "random", 0, 0.8),
            _rec("lonely", "t", "time", 0, 0.5)]
    rep = build_comparison_report(recs, protein_datasets=["prot"])
    assert rep.protein_differences == pytest.approx([0.1])
    assert rep.other_differences == pytest.approx([0.3])
    assert rep.incomplete_cells == [("lonely", "elastic_net", "t")]
    d = json.loads(rep.to_json())
    assert d["targets"][0]["n_pairs"] == 2
    assert rep.to_csv().splitlines()[0].startswith("dataset,learner,target")


def test_report_repetition_pairing():
    recs = []
    for r, (t, rnd) in enumerate([(0.6, 0.7), (0.5, 0.7), (0.55, 0.8)]):
        recs += [_rec("a", "t", "time", r, t), _rec("a", "t", "random", r, rnd)]
    rep = build_comparison_report(recs, pairing="repetition")
    assert rep.targets[0].n_pairs == 3
    assert rep.targets[0].result.p_value < 0.05
    assert build_comparison_report(recs).targets[0].result is None  # one cell: no test


def test_ensemble_records_average_probabilities():
    b = toy_bundle()
    t2 = FeatureTable("other", b.compound_ids, ("z",), np.random.default_rng(1).normal(size=(len(b), 1)))
    recs = run_grid(b, [b.tables["toy"], t2], [LearnerSpec("naive_bayes")], ["ae"], _plans(b, 2), 2, k=3)
    ens = ensemble_records(recs, b.labels)
    assert len(ens) == 4 and all(r.dataset == "ensemble" for r in ens)
    e = ens[0]
    members = [r for r in recs if (r.split["label"], r.repetition) == (e.split["label"], e.repetition)]
    assert e.probabilities == pytest.approx(np.mean([m.probabilities for m in members], axis=0))
