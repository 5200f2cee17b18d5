import json

import numpy as np
import pytest

from timesplit.importance import ImportanceReport, permutation_importance, rank_features, shuffle_orders
from timesplit.learners import LearnerSpec


def signal_data(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    y = (X[:, 0] > 0).astype(float)
    return X, y


@pytest.mark.parametrize("seed", range(5))
def test_signal_beats_noise(seed):
    X, y = signal_data(120, seed)
    Xt, yt = signal_data(60, seed + 100)
    rep = permutation_importance(LearnerSpec("elastic_net"), X, y, Xt, yt, ["x1", "x2"], seed=seed)
    assert rep.importances["x1"] > rep.importances["x2"]
    assert rep.ranked(1)[0][0] == "x1"


def test_ignored_feature_has_exactly_zero_importance():
    X, y = signal_data(120, 7)
    Xt, yt = signal_data(50, 8)
    Xt = np.column_stack([Xt, np.random.default_rng(1).normal(size=50)])
    X = np.column_stack([X, np.zeros(120)])  # constant in training: coefficient stays 0
    rep = permutation_importance(LearnerSpec("elastic_net"), X, y, Xt, yt, ["a", "b", "dead"])
    assert rep.importances["dead"] == 0.0


def test_constant_model_all_zero():
    X, y = signal_data(40, 2)
    spec = LearnerSpec("elastic_net", {"l1_weight": 1e6})
    rep = permutation_importance(spec, X, y, np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([1.0, 0.0]))
    assert rep.auc_all == 0.5
    assert all(v == 0.0 for v in rep.importances.values())


def test_bounds_and_determinism():
    X, y = signal_data(100, 3)
    Xt, yt = signal_data(40, 4)
    spec = LearnerSpec("gbdt", {"n_trees": 10})
    a = permutation_importance(spec, X, y, Xt, yt, seed=11, n_shuffles=10)
    b = permutation_importance(spec, X, y, Xt, yt, seed=11, n_shuffles=10)
    assert a.to_json() == b.to_json()
    for v in a.importances.values():
        assert a.auc_all - 1 <= v <= a.auc_all
    assert json.loads(a.to_json())["shuffles"] == 10


def test_shuffle_orders_shared_and_seeded():
    o = shuffle_orders(10, 3, 5)
    assert o == shuffle_orders(10, 3, 5)
    assert all(sorted(p) == list(range(10)) for p in o)
    assert o != shuffle_orders(10, 3, 6)


def test_rank_features():
    rep = ImportanceReport({"a": 0.1, "b": 0.3}, 0.8, 25, 4, 0)
    assert [f for f, _ in rank_features(rep, 1)] == ["b"]
    assert [f for f, _ in rank_features(rep, 10)] == ["b", "a"]
    tied = ImportanceReport({"z": 0.2, "m": 0.2, "a": 0.2}, 0.8, 25, 4, 0)
    assert [f for f, _ in tied.ranked()] == ["a", "m", "z"]
    assert tied.to_csv().splitlines()[1].startswith("a,")


def test_single_class_test_rejected():
    X, y = signal_data(40, 2)
    with pytest.raises(ValueError):
        permutation_importance(LearnerSpec("naive_bayes"), X, y, X[:3], np.ones(3))
