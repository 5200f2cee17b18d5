"""Binary classification metrics computed from scratch."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    f1: float
    mcc: float
    roc_auc: float
    pr_auc: float

    def to_dict(self) -> dict:
        # NaN (undefined) -> None so JSON stays strict
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "MetricSet":
        return cls(**{k: (math.nan if d[k] is None else float(d[k])) for k in ("accuracy", "f1", "mcc", "roc_auc", "pr_auc")})


def _as_arrays(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels).ravel()
    if s.shape != y.shape:
        raise ValueError(f"length mismatch: {s.size} scores vs {y.size} labels")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0/1")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    return s, y.astype(bool)


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC; tied positive/negative pairs count one half.

    NaN when only one class is present.
    """
    s, y = _as_arrays(scores, labels)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return math.nan
    ranks = rankdata(s)  # average ranks: exact half-integers
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def average_precision(scores, labels) -> float:
    """Step-wise average precision; tied scores form one threshold."""
    s, y = _as_arrays(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == y.size:
        return math.nan
    order = np.argsort(-s, kind="mergesort")
    s_sorted, y_sorted = s[order], y[order]
    tp = np.cumsum(y_sorted)
    # last index of each run of equal scores
    ends = np.r_[np.nonzero(np.diff(s_sorted))[0], s_sorted.size - 1]
    tp_at = tp[ends].astype(float)
    precision = tp_at / (ends + 1)
    recall_steps = np.diff(np.r_[0.0, tp_at]) / n_pos
    return float(np.sum(recall_steps * precision))


def confusion_counts(scores, labels, threshold: float = 0.5) -> tuple[int, int, int, int]:
    """(tp, fp, tn, fn) with ``score >= threshold`` predicted positive."""
    s, y = _as_arrays(scores, labels)
    pred = s >= threshold
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    tn = int(np.sum(~pred & ~y))
    fn = int(np.sum(~pred & y))
    return tp, fp, tn, fn


def accuracy_from_counts(tp: int, fp: int, tn: int, fn: int) -> float:
    total = tp + fp + tn + fn
    return (tp + tn) / total if total else math.nan


def f1_from_counts(tp: int, fp: int, tn: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def mcc_from_counts(tp: int, fp: int, tn: int, fn: int) -> float:
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom)


def compute_metrics(probabilities, labels, threshold: float = 0.5) -> MetricSet:
    counts = confusion_counts(probabilities, labels, threshold)
    return MetricSet(
        accuracy=accuracy_from_counts(*counts),
        f1=f1_from_counts(*counts),
        mcc=mcc_from_counts(*counts),
        roc_auc=roc_auc(probabilities, labels),
        pr_auc=average_precision(probabilities, labels),
    )
