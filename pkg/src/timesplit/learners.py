"""Built-in binary probabilistic classifiers.

Three learners share one interface (``train`` / ``predict_proba``):

* ``elastic_net`` - logistic regression with an L1 + L2 penalty, fitted by
  proximal gradient descent on z-scored features;
* ``naive_bayes`` - Gaussian naive Bayes with a variance floor;
* ``gbdt`` - gradient-boosted regression trees on the logistic loss.

Trained models are immutable and serialize to a versioned JSON document.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy.special import expit, logsumexp

MODEL_FORMAT_VERSION = 1

DEFAULT_HYPERPARAMETERS: dict[str, dict[str, float]] = {
    "elastic_net": {"l1_weight": 1e-2, "l2_weight": 1e-2, "max_iters": 10_000, "tol": 1e-7},
    "naive_bayes": {"variance_floor": 1e-9},
    "gbdt": {"n_trees": 100, "max_depth": 3, "learning_rate": 0.1, "min_leaf": 5},
}

# hyperparameters that may be zero; every other one must be strictly positive
_NON_NEGATIVE = {"l1_weight", "l2_weight", "n_trees"}


class LearnerError(ValueError):
    pass


@dataclass(frozen=True)
class LearnerSpec:
    kind: str
    hyperparameters: Mapping[str, float] = field(default_factory=dict)
    training_seed: int = 0

    def __post_init__(self):
        if self.kind not in DEFAULT_HYPERPARAMETERS:
            raise LearnerError(f"unknown learner kind {self.kind!r}")
        defaults = DEFAULT_HYPERPARAMETERS[self.kind]
        unknown = set(self.hyperparameters) - set(defaults)
        if unknown:
            raise LearnerError(f"unknown hyperparameters for {self.kind}: {sorted(unknown)}")
        merged = {**defaults, **self.hyperparameters}
        for name, value in merged.items():
            if not math.isfinite(value) or value < 0 or (value == 0 and name not in _NON_NEGATIVE):
                raise LearnerError(f"{self.kind}.{name} must be positive, got {value!r}")
        object.__setattr__(self, "hyperparameters", merged)

    @property
    def name(self) -> str:
        return self.kind

    def with_seed(self, training_seed: int) -> "LearnerSpec":
        return LearnerSpec(self.kind, dict(self.hyperparameters), training_seed)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "hyperparameters": dict(self.hyperparameters), "training_seed": self.training_seed}


@dataclass(frozen=True, eq=False)
class TrainedModel:
    kind: str
    hyperparameters: Mapping[str, float]
    n_features: int
    params: Mapping[str, Any]

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, _Node):
                return v.to_dict()
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, list):
                return [enc(x) for x in v]
            if isinstance(v, dict):
                return {k: enc(x) for k, x in v.items()}
            return v

        return {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": self.kind,
            "hyperparameters": dict(self.hyperparameters),
            "n_features": self.n_features,
            "params": enc(dict(self.params)),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: Mapping) -> "TrainedModel":
        if d.get("format_version") != MODEL_FORMAT_VERSION:
            raise LearnerError(f"unsupported model format {d.get('format_version')!r}")
        params = dict(d["params"])
        if d["kind"] == "gbdt":
            params["trees"] = [_tree_from_dict(t) for t in params["trees"]]
        else:
            for k, v in params.items():
                if isinstance(v, list):
                    params[k] = np.asarray(v, dtype=float)
        return cls(d["kind"], dict(d["hyperparameters"]), int(d["n_features"]), params)


def _check_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise LearnerError(f"X must be 2-D with one row per label (got {X.shape} and {y.size})")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise LearnerError("training data contains non-finite values")
    if not np.all((y == 0) | (y == 1)):
        raise LearnerError("labels must be 0/1")
    if y.min() == y.max():
        raise LearnerError("training labels contain a single class")
    return X, y


def train(spec: LearnerSpec, X, y) -> TrainedModel:
    X, y = _check_xy(X, y)
    hp = dict(spec.hyperparameters)
    if spec.kind == "elastic_net":
        params = _fit_elastic_net(X, y, hp)
    elif spec.kind == "naive_bayes":
        params = _fit_naive_bayes(X, y, hp)
    else:
        params = _fit_gbdt(X, y, hp)
    return TrainedModel(spec.kind, hp, X.shape[1], params)


def predict_proba(model: TrainedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.size == 0:
        return np.empty(0)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise LearnerError(f"expected {model.n_features} feature columns, got shape {X.shape}")
    if X.shape[0] == 0:
        return np.empty(0)
    if model.kind == "elastic_net":
        p = _predict_elastic_net(model.params, X)
    elif model.kind == "naive_bayes":
        p = _predict_naive_bayes(model.params, X)
    else:
        p = _predict_gbdt(model.params, X)
    return np.clip(p, 0.0, 1.0)


# --------------------------------------------------------------------------
# elastic net


def standardize_fit(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return mean, sd


def _log1pexp(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, z)


def smooth_loss(w: np.ndarray, b: float, Z: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Mean logistic loss plus ``l2/2 * ||w||^2``."""
    z = Z @ w + b
    return float(np.mean(_log1pexp(z) - y * z) + 0.5 * l2 * (w @ w))


def smooth_gradient(w: np.ndarray, b: float, Z: np.ndarray, y: np.ndarray, l2: float) -> tuple[np.ndarray, float]:
    r = expit(Z @ w + b) - y
    n = y.size
    return Z.T @ r / n + l2 * w, float(r.sum() / n)


def elastic_net_objective(w: np.ndarray, b: float, Z: np.ndarray, y: np.ndarray, l1: float, l2: float) -> float:
    return smooth_loss(w, b, Z, y, l2) + l1 * float(np.abs(w).sum())


def _soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def proximal_gradient_path(Z: np.ndarray, y: np.ndarray, l1: float, l2: float, max_iters: int, tol: float,
                           trace: list[float] | None = None) -> tuple[np.ndarray, float, int]:
    """ISTA with a fixed 1/L step; the objective never increases.

    Stops when the largest parameter change falls below ``tol``.
    Returns ``(w, intercept, iterations)``.
    """
    n, p = Z.shape
    # Lipschitz constant of the smooth part (intercept column included)
    Za = np.hstack([Z, np.ones((n, 1))])
    sigma_max = np.linalg.norm(Za, 2) if p else math.sqrt(n)
    lipschitz = 0.25 * sigma_max**2 / n + l2
    step = 1.0 / lipschitz
    w = np.zeros(p)
    prior = float(np.clip(y.mean(), 1e-12, 1 - 1e-12))
    b = math.log(prior / (1.0 - prior))
    if trace is not None:
        trace.append(elastic_net_objective(w, b, Z, y, l1, l2))
    it = 0
    for it in range(1, int(max_iters) + 1):
        gw, gb = smooth_gradient(w, b, Z, y, l2)
        w_new = _soft_threshold(w - step * gw, step * l1)
        b_new = b - step * gb
        delta = max(float(np.max(np.abs(w_new - w))) if p else 0.0, abs(b_new - b))
        w, b = w_new, b_new
        if trace is not None:
            trace.append(elastic_net_objective(w, b, Z, y, l1, l2))
        if delta < tol:
            break
    return w, b, it


def _fit_elastic_net(X: np.ndarray, y: np.ndarray, hp: dict) -> dict:
    mean, sd = standardize_fit(X)
    Z = (X - mean) / sd
    w, b, iters = proximal_gradient_path(Z, y, hp["l1_weight"], hp["l2_weight"], hp["max_iters"], hp["tol"])
    return {"mean": mean, "scale": sd, "coef": w, "intercept": b, "iterations": iters}


def _predict_elastic_net(params: Mapping, X: np.ndarray) -> np.ndarray:
    Z = (X - params["mean"]) / params["scale"]
    return expit(Z @ np.asarray(params["coef"]) + params["intercept"])


# --------------------------------------------------------------------------
# Gaussian naive Bayes


def _fit_naive_bayes(X: np.ndarray, y: np.ndarray, hp: dict) -> dict:
    floor = hp["variance_floor"]
    means, variances, priors = [], [], []
    for cls in (0.0, 1.0):
        rows = X[y == cls]
        means.append(rows.mean(axis=0))
        variances.append(np.maximum(rows.var(axis=0), floor))
        priors.append(rows.shape[0] / X.shape[0])
    return {"means": np.array(means), "variances": np.array(variances), "log_priors": np.log(priors)}


def naive_bayes_posterior(params: Mapping, X: np.ndarray) -> np.ndarray:
    """Class posterior matrix (rows sum to one), columns ordered (0, 1)."""
    means = np.asarray(params["means"])
    var = np.asarray(params["variances"])
    log_prior = np.asarray(params["log_priors"])
    joint = np.empty((X.shape[0], 2))
    for c in range(2):
        joint[:, c] = log_prior[c] - 0.5 * np.sum(
            np.log(2.0 * np.pi * var[c]) + (X - means[c]) ** 2 / var[c], axis=1
        )
    return np.exp(joint - logsumexp(joint, axis=1, keepdims=True))


def _predict_naive_bayes(params: Mapping, X: np.ndarray) -> np.ndarray:
    return naive_bayes_posterior(params, X)[:, 1]


# --------------------------------------------------------------------------
# gradient-boosted trees


@dataclass(frozen=True)
class _Node:
    feature: int = -1  # -1 marks a leaf
    threshold: float = 0.0  # x <= threshold goes left
    left: "_Node | None" = None
    right: "_Node | None" = None
    value: float = 0.0

    def to_dict(self) -> dict:
        if self.feature < 0:
            return {"value": self.value}
        return {"feature": self.feature, "threshold": self.threshold,
                "left": self.left.to_dict(), "right": self.right.to_dict()}


def _tree_from_dict(d: Mapping) -> _Node:
    if "feature" not in d:
        return _Node(value=float(d["value"]))
    return _Node(int(d["feature"]), float(d["threshold"]), _tree_from_dict(d["left"]), _tree_from_dict(d["right"]))


def _best_split(X: np.ndarray, g: np.ndarray, min_leaf: int) -> tuple[int, float, float] | None:
    """Variance-reduction split on gradient targets.

    Ties go to the lowest feature index, then the lowest threshold.
    """
    n, p = X.shape
    if n < 2 * min_leaf or p == 0:
        return None
    total = g.sum()
    parent = total * total / n
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    cs = np.cumsum(g[order], axis=0)
    left_n = np.arange(1, n)[:, None]
    valid = (xs[:-1] < xs[1:]) & (left_n >= min_leaf) & (n - left_n >= min_leaf)
    if not valid.any():
        return None
    sl = cs[:-1]
    sr = total - sl
    gain = sl * sl / left_n + sr * sr / (n - left_n) - parent
    gain = np.where(valid, gain, -np.inf)
    rows = np.argmax(gain, axis=0)  # first maximum per feature = lowest threshold
    per_feature = gain[rows, np.arange(p)]
    tol = 1e-12 * max(1.0, abs(parent))
    best_gain = float(per_feature.max())
    if not best_gain > tol:
        return None
    j = int(np.nonzero(per_feature >= best_gain - tol)[0][0])
    return j, float(xs[rows[j], j]), float(per_feature[j])


def _grow(X: np.ndarray, g: np.ndarray, h: np.ndarray, depth: int, hp: dict) -> _Node:
    min_leaf = int(hp["min_leaf"])
    if depth < int(hp["max_depth"]):
        split = _best_split(X, g, min_leaf)
        if split is not None:
            j, thr, _ = split
            mask = X[:, j] <= thr
            return _Node(
                feature=j,
                threshold=thr,
                left=_grow(X[mask], g[mask], h[mask], depth + 1, hp),
                right=_grow(X[~mask], g[~mask], h[~mask], depth + 1, hp),
            )
    # Newton step for the logistic loss
    return _Node(value=float(g.sum() / max(h.sum(), 1e-12)))


def _tree_predict(node: _Node, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    stack = [(node, np.arange(X.shape[0]))]
    while stack:
        nd, idx = stack.pop()
        if nd.feature < 0:
            out[idx] = nd.value
            continue
        go_left = X[idx, nd.feature] <= nd.threshold
        stack.append((nd.left, idx[go_left]))
        stack.append((nd.right, idx[~go_left]))
    return out


def _fit_gbdt(X: np.ndarray, y: np.ndarray, hp: dict) -> dict:
    base_rate = float(y.mean())
    base_logit = math.log(base_rate / (1.0 - base_rate))
    F = np.full(y.size, base_logit)
    lr = hp["learning_rate"]
    trees = []
    for _ in range(int(hp["n_trees"])):
        p = expit(F)
        g = y - p
        h = p * (1.0 - p)
        tree = _grow(X, g, h, 0, hp)
        trees.append(tree)
        F = F + lr * _tree_predict(tree, X)
    return {"base_rate": base_rate, "base_logit": base_logit, "learning_rate": lr, "trees": trees}


def _predict_gbdt(params: Mapping, X: np.ndarray) -> np.ndarray:
    trees = params["trees"]
    if not trees:
        return np.full(X.shape[0], params["base_rate"])
    lr = params["learning_rate"]
    F = np.full(X.shape[0], params["base_logit"])
    for tree in trees:
        F = F + lr * _tree_predict(tree, X)
    return expit(F)
