"""Fold-ensemble training, the time-vs-random evaluation grid and its report."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .data import DataError, DatasetBundle, FeatureTable
from .learners import LearnerSpec, TrainedModel, predict_proba, train
from .metrics import MetricSet, compute_metrics
from .rng import derive_seed
from .splits import SplitPlan, stratified_kfold
from .stats import TTestResult, paired_t_test_one_sided, stouffer_combine

logger = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# imputation and fold ensembles


def column_means(X: np.ndarray) -> np.ndarray:
    """Per-column mean over non-missing cells (0 for all-missing columns)."""
    present = ~np.isnan(X)
    counts = present.sum(axis=0)
    sums = np.where(present, X, 0.0).sum(axis=0)
    return np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)


def impute(X: np.ndarray, fill: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if not np.isnan(X).any():
        return X
    return np.where(np.isnan(X), fill, X)


@dataclass(frozen=True)
class FoldMember:
    model: TrainedModel
    fill: np.ndarray  # training-fold means used to impute missing cells

    def predict(self, X: np.ndarray) -> np.ndarray:
        return predict_proba(self.model, impute(X, self.fill))


@dataclass(frozen=True)
class FoldEnsemble:
    members: tuple[FoldMember, ...]

    def member_predictions(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.vstack([m.predict(X) for m in self.members])

    def predict(self, X) -> np.ndarray:
        return self.member_predictions(X).mean(axis=0)


def fit_fold_ensemble(
    spec: LearnerSpec,
    X_train,
    y_train,
    k: int = 5,
    splitting_seed: int = 0,
    training_seed: int = 0,
) -> FoldEnsemble:
    """Train ``k`` models, each on ``k - 1`` of ``k`` stratified parts."""
    X = np.asarray(X_train, dtype=float)
    y = np.asarray(y_train, dtype=float)
    ids = [str(i) for i in range(len(y))]
    plan = stratified_kfold(ids, y, k, splitting_seed)
    folds = np.array([plan.assignments[cid] for cid in ids])
    members = []
    for fold in range(k):
        rows = folds != fold
        Xf, yf = X[rows], y[rows]
        fill = column_means(Xf)
        model = train(spec.with_seed(derive_seed(training_seed, fold)), impute(Xf, fill), yf)
        members.append(FoldMember(model, fill))
    return FoldEnsemble(tuple(members))


def train_fold_ensemble(
    spec: LearnerSpec,
    X_train,
    y_train,
    X_test,
    k: int = 5,
    splitting_seed: int = 0,
    training_seed: int = 0,
) -> np.ndarray:
    """Test-set probabilities averaged over the ``k`` fold models."""
    ens = fit_fold_ensemble(spec, X_train, y_train, k, splitting_seed, training_seed)
    return ens.predict(X_test)


def concatenate_datasets(tables: Sequence[FeatureTable], name: str = "concat") -> FeatureTable:
    """Column-wise join; feature names are prefixed with their dataset name."""
    if not tables:
        raise DataError("nothing to concatenate")
    ids = tables[0].compound_ids
    for t in tables[1:]:
        if set(t.compound_ids) != set(ids):
            raise DataError(f"{t.dataset_name}: compound ids differ from {tables[0].dataset_name}")
    names: list[str] = []
    blocks = []
    for t in tables:
        names.extend(t.qualified_names)
        blocks.append(t.take_rows(ids).values)
    return FeatureTable(name, ids, tuple(names), np.hstack(blocks))


def ensemble_across_datasets(vectors: Sequence) -> np.ndarray:
    if not vectors:
        raise ValueError("need at least one probability vector")
    arrs = [np.asarray(v, dtype=float) for v in vectors]
    if any(a.shape != arrs[0].shape for a in arrs):
        raise ValueError("probability vectors differ in length")
    return np.mean(np.vstack(arrs), axis=0)


# --------------------------------------------------------------------------
# grid


@dataclass(frozen=True)
class RunRecord:
    dataset: str
    learner: str
    target: str
    split: Mapping  # SplitPlan.descriptor() plus "label"
    repetition: int
    splitting_seed: int
    training_seed: int
    metrics: MetricSet | None
    test_ids: tuple[str, ...] = ()
    probabilities: tuple[float, ...] = ()
    error: str | None = None

    @property
    def method(self) -> str:
        return self.split["method"]

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "learner": self.learner,
            "target": self.target,
            "split": dict(self.split),
            "repetition": self.repetition,
            "splitting_seed": self.splitting_seed,
            "training_seed": self.training_seed,
            "metrics": self.metrics.to_dict() if self.metrics is not None else None,
            "test_ids": list(self.test_ids),
            "probabilities": list(self.probabilities),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RunRecord":
        return cls(
            dataset=d["dataset"],
            learner=d["learner"],
            target=d["target"],
            split=dict(d["split"]),
            repetition=int(d["repetition"]),
            splitting_seed=int(d["splitting_seed"]),
            training_seed=int(d["training_seed"]),
            metrics=MetricSet.from_dict(d["metrics"]) if d.get("metrics") else None,
            test_ids=tuple(d.get("test_ids", ())),
            probabilities=tuple(d.get("probabilities", ())),
            error=d.get("error"),
        )


def write_records_jsonl(records: Iterable[RunRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")


def read_records_jsonl(path) -> list[RunRecord]:
    with open(path, encoding="utf-8") as fh:
        return [RunRecord.from_dict(json.loads(line)) for line in fh if line.strip()]


@dataclass(frozen=True)
class _Task:
    dataset: str
    learner_index: int
    target: str
    split_label: str
    repetition: int


_WORKER_STATE: dict = {}


def _init_worker(state: dict) -> None:
    _WORKER_STATE.clear()
    _WORKER_STATE.update(state)


def _run_task(task: _Task) -> RunRecord:
    st = _WORKER_STATE
    table: FeatureTable = st["tables"][task.dataset]
    spec: LearnerSpec = st["learners"][task.learner_index]
    plans = st["plans"][task.split_label]
    plan: SplitPlan = plans[task.repetition] if isinstance(plans, (list, tuple)) else plans
    labels = st["labels"]
    cell = (task.dataset, spec.name, task.target, task.repetition)
    splitting_seed = derive_seed(st["base_seed"], "split", *cell)
    training_seed = derive_seed(st["base_seed"], "train", *cell)
    descriptor = {**plan.descriptor(), "label": task.split_label}
    try:
        y_tr = labels.labels_for(task.target, plan.train_ids)
        y_te = labels.labels_for(task.target, plan.test_ids)
        tr = [cid for cid, v in zip(plan.train_ids, y_tr) if not math.isnan(v)]
        te = [cid for cid, v in zip(plan.test_ids, y_te) if not math.isnan(v)]
        y_tr = y_tr[~np.isnan(y_tr)]
        y_te = y_te[~np.isnan(y_te)]
        probs = train_fold_ensemble(
            spec, table.matrix(tr), y_tr, table.matrix(te), st["k"], splitting_seed, training_seed
        )
        metrics = compute_metrics(probs, y_te)
        return RunRecord(task.dataset, spec.name, task.target, descriptor, task.repetition,
                         splitting_seed, training_seed, metrics, tuple(te), tuple(float(p) for p in probs))
    except Exception as exc:  # per-cell failures are recorded; the grid continues
        logger.warning("cell %s failed: %s", cell, exc)
        return RunRecord(task.dataset, spec.name, task.target, descriptor, task.repetition,
                         splitting_seed, training_seed, None, error=f"{type(exc).__name__}: {exc}")


def run_grid(
    bundle: DatasetBundle,
    datasets: Sequence[FeatureTable] | None,
    learners: Sequence[LearnerSpec],
    targets: Sequence[str],
    plans: Mapping[str, SplitPlan | Sequence[SplitPlan]],
    n_repetitions: int = 20,
    base_seed: int = 0,
    k: int = 5,
    jobs: int = 1,
) -> list[RunRecord]:
    """Evaluate every (dataset, learner, target, split, repetition) cell.

    ``plans`` maps a split label to one plan (reused by every repetition, as
    for the time split) or to one plan per repetition (random splits). Inner
    fold/training seeds depend on the cell and repetition but not on the split
    label, so time and random runs of a repetition share them.
    Output order and content do not depend on ``jobs``.
    """
    if bundle.labels is None:
        raise DataError("the bundle carries no labels")
    tables = list(datasets) if datasets is not None else list(bundle.tables.values())
    names = [spec.name for spec in learners]
    if len(set(names)) != len(names):
        raise ValueError("learner names must be unique")
    for label, p in plans.items():
        if isinstance(p, (list, tuple)) and len(p) < n_repetitions:
            raise ValueError(f"split {label!r} has {len(p)} plans for {n_repetitions} repetitions")
    tasks = [
        _Task(t.dataset_name, li, target, label, rep)
        for t in tables
        for li in range(len(learners))
        for target in targets
        for label in plans
        for rep in range(n_repetitions)
    ]
    state = {
        "tables": {t.dataset_name: t for t in tables},
        "learners": list(learners),
        "labels": bundle.labels,
        "plans": {k_: (list(v) if isinstance(v, (list, tuple)) else v) for k_, v in plans.items()},
        "base_seed": base_seed,
        "k": k,
    }
    if not tasks:
        return []
    if jobs <= 1:
        _init_worker(state)
        return [_run_task(t) for t in tasks]
    chunk = max(1, len(tasks) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(state,)) as pool:
        return list(pool.map(_run_task, tasks, chunksize=chunk))


def ensemble_records(records: Sequence[RunRecord], labels, name: str = "ensemble") -> list[RunRecord]:
    """Cross-dataset ensemble records.

    Probabilities of each (learner, target, split, repetition) group are
    averaged over datasets and re-scored against ``labels`` (a LabelTable).
    """
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        if r.metrics is None:
            continue
        key = (r.learner, r.target, r.split["label"], r.repetition)
        groups.setdefault(key, []).append(r)
    out = []
    for key in sorted(groups):
        members = groups[key]
        first = members[0]
        if any(m.test_ids != first.test_ids for m in members):
            continue
        probs = ensemble_across_datasets([m.probabilities for m in members])
        metrics = compute_metrics(probs, labels.labels_for(first.target, first.test_ids))
        out.append(RunRecord(name, first.learner, first.target, first.split, first.repetition,
                             first.splitting_seed, first.training_seed, metrics, first.test_ids,
                             tuple(float(p) for p in probs)))
    return out


# --------------------------------------------------------------------------
# comparison report


@dataclass
class CellComparison:
    dataset: str
    learner: str
    target: str
    time_values: list[float]
    random_values: list[float]
    group: str

    @property
    def time_mean(self) -> float:
        return statistics.fmean(self.time_values)

    @property
    def random_mean(self) -> float:
        return statistics.fmean(self.random_values)

    @property
    def difference(self) -> float:
        return self.random_mean - self.time_mean

    def repetition_pairs(self) -> list[tuple[float, float]]:
        n = min(len(self.time_values), len(self.random_values))
        return list(zip(self.random_values[:n], self.time_values[:n]))


@dataclass
class TargetTest:
    target: str
    n_pairs: int
    median_difference: float | None
    result: TTestResult | None


@dataclass
class ComparisonReport:
    metric: str
    pairing: str
    cells: list[CellComparison]
    targets: list[TargetTest]
    combined_p: float | None
    protein_differences: list[float]
    other_differences: list[float]
    incomplete_cells: list[tuple[str, str, str]] = field(default_factory=list)
    undefined_records: int = 0
    failed_records: int = 0

    def to_dict(self) -> dict:
        def tt(t: TargetTest) -> dict:
            r = t.result
            return {
                "target": t.target,
                "n_pairs": t.n_pairs,
                "median_difference": t.median_difference,
                "t_statistic": None if r is None or not math.isfinite(r.statistic) else r.statistic,
                "p_value": None if r is None else r.p_value,
                "df": None if r is None else r.df,
                "degenerate": None if r is None else r.degenerate,
            }

        return {
            "metric": self.metric,
            "pairing": self.pairing,
            "alternative": "random_greater",
            "cells": [
                {
                    "dataset": c.dataset,
                    "learner": c.learner,
                    "target": c.target,
                    "group": c.group,
                    "time_mean": c.time_mean,
                    "random_mean": c.random_mean,
                    "difference": c.difference,
                    "time_values": c.time_values,
                    "random_values": c.random_values,
                }
                for c in self.cells
            ],
            "targets": [tt(t) for t in self.targets],
            "combined_p": self.combined_p,
            "protein_differences": self.protein_differences,
            "other_differences": self.other_differences,
            "incomplete_cells": [list(c) for c in self.incomplete_cells],
            "undefined_records": self.undefined_records,
            "failed_records": self.failed_records,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "learner", "target", "group", "time_mean", "random_mean", "difference",
                    "n_time", "n_random"])
        for c in self.cells:
            w.writerow([c.dataset, c.learner, c.target, c.group, repr(c.time_mean), repr(c.random_mean),
                        repr(c.difference), len(c.time_values), len(c.random_values)])
        return buf.getvalue()


def _clip_p(p: float) -> float:
    return min(max(p, 1e-300), 1.0 - 1e-16)


def build_comparison_report(
    records: Sequence[RunRecord],
    protein_datasets: Iterable[str] = (),
    metric: str = "roc_auc",
    pairing: str = "cell",
) -> ComparisonReport:
    """Random-minus-time differences per cell, per-target one-sided tests, Stouffer.

    ``pairing="cell"`` pairs repetition means of each (dataset, learner) cell;
    ``pairing="repetition"`` pairs individual repetitions instead.
    """
    if pairing not in ("cell", "repetition"):
        raise ValueError("pairing must be 'cell' or 'repetition'")
    protein = set(protein_datasets)
    values: dict[tuple[str, str, str], dict[str, list[tuple[int, float]]]] = {}
    undefined = failed = 0
    for r in records:
        if r.metrics is None:
            failed += 1
            continue
        v = getattr(r.metrics, metric)
        if v is None or math.isnan(v):
            undefined += 1
            continue
        key = (r.dataset, r.learner, r.target)
        values.setdefault(key, {"time": [], "random": []})[r.method].append((r.repetition, float(v)))
    cells, incomplete = [], []
    for key in sorted(values):
        by = values[key]
        if not by["time"] or not by["random"]:
            incomplete.append(key)
            continue
        cells.append(CellComparison(
            *key,
            time_values=[v for _, v in sorted(by["time"])],
            random_values=[v for _, v in sorted(by["random"])],
            group="protein" if key[0] in protein else "other",
        ))
    tests = []
    for target in sorted({c.target for c in cells}):
        tc = [c for c in cells if c.target == target]
        if pairing == "cell":
            a = [c.random_mean for c in tc]
            b = [c.time_mean for c in tc]
        else:
            pairs = [p for c in tc for p in c.repetition_pairs()]
            a = [p[0] for p in pairs]
            b = [p[1] for p in pairs]
        result = paired_t_test_one_sided(a, b, "a_greater") if len(a) >= 2 else None
        diffs = [c.difference for c in tc]
        tests.append(TargetTest(target, len(a), statistics.median(diffs) if diffs else None, result))
    ps = [_clip_p(t.result.p_value) for t in tests if t.result is not None]
    combined = stouffer_combine(ps) if ps else None
    return ComparisonReport(
        metric=metric,
        pairing=pairing,
        cells=cells,
        targets=tests,
        combined_p=combined,
        protein_differences=[c.difference for c in cells if c.group == "protein"],
        other_differences=[c.difference for c in cells if c.group == "other"],
        incomplete_cells=incomplete,
        undefined_records=undefined,
        failed_records=failed,
    )
