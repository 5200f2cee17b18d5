"""Time-threshold and random train/test splits, stratified k-fold plans."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .data import DatasetBundle, MonthDate
from .rng import Xoshiro256


class SplitError(ValueError):
    pass


@dataclass(frozen=True)
class SplitPlan:
    method: str  # "time" | "random"
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    threshold: MonthDate | None = None
    seed: int | None = None
    fixed_test_positive_count: int | None = None

    def __post_init__(self):
        if self.method not in ("time", "random"):
            raise SplitError(f"unknown split method {self.method!r}")
        if set(self.train_ids) & set(self.test_ids):
            raise SplitError("train and test ids overlap")

    def descriptor(self) -> dict:
        return {
            "method": self.method,
            "threshold": str(self.threshold) if self.threshold is not None else None,
            "seed": self.seed,
        }

    def to_dict(self) -> dict:
        d = self.descriptor()
        d["train_ids"] = list(self.train_ids)
        d["test_ids"] = list(self.test_ids)
        if self.fixed_test_positive_count is not None:
            d["fixed_test_positive_count"] = self.fixed_test_positive_count
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: Mapping) -> "SplitPlan":
        return cls(
            method=d["method"],
            train_ids=tuple(d["train_ids"]),
            test_ids=tuple(d["test_ids"]),
            threshold=MonthDate.parse(d["threshold"]) if d.get("threshold") else None,
            seed=d.get("seed"),
            fixed_test_positive_count=d.get("fixed_test_positive_count"),
        )


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignments: Mapping[str, int] = field(default_factory=dict)

    def fold_ids(self, fold: int) -> list[str]:
        return [cid for cid, f in self.assignments.items() if f == fold]


def time_split(bundle: DatasetBundle, threshold: MonthDate) -> SplitPlan:
    """Strictly before ``threshold`` -> train; at or after -> test."""
    missing = [cid for cid in bundle.compound_ids if bundle.market_date(cid) is None]
    if missing:
        raise SplitError(f"compounds without a market date: {', '.join(sorted(missing))}")
    ids = sorted(bundle.compound_ids)
    train = tuple(cid for cid in ids if bundle.market_date(cid) < threshold)
    test = tuple(cid for cid in ids if not bundle.market_date(cid) < threshold)
    if not train or not test:
        raise SplitError(f"threshold {threshold} leaves an empty side ({len(train)} train / {len(test)} test)")
    return SplitPlan("time", train, test, threshold=threshold)


def random_split(
    bundle: DatasetBundle,
    n_train: int,
    n_test: int,
    seed: int,
    fixed_test_positive_count: int | None = None,
    target: str | None = None,
) -> SplitPlan:
    """Uniform random partition of the bundle.

    With ``fixed_test_positive_count`` the test set holds exactly that many
    positives of ``target``; the rest of the test set is drawn from the other
    compounds (negatives and unlabeled).
    """
    ids = sorted(bundle.compound_ids)
    if n_train < 1 or n_test < 1 or n_train + n_test != len(ids):
        raise SplitError(f"n_train + n_test must equal the bundle size {len(ids)}")
    rng = Xoshiro256(seed)
    if fixed_test_positive_count is None:
        order = rng.permutation(len(ids))
        test = sorted(ids[i] for i in order[:n_test])
    else:
        if target is None or bundle.labels is None:
            raise SplitError("a fixed test positive count needs a target and labels")
        y = bundle.labels.labels_for(target, ids)
        pos = [cid for cid, v in zip(ids, y) if v == 1]
        rest = [cid for cid, v in zip(ids, y) if v != 1]
        p = fixed_test_positive_count
        if not 0 <= p <= n_test or p > len(pos) or n_test - p > len(rest):
            raise SplitError(
                f"cannot place {p} positives in a test set of {n_test} "
                f"({len(pos)} positives, {len(rest)} others available)"
            )
        test = sorted(rng.sample(pos, p) + rng.sample(rest, n_test - p))
    test_set = set(test)
    train = tuple(cid for cid in ids if cid not in test_set)
    return SplitPlan("random", train, tuple(test), seed=seed, fixed_test_positive_count=fixed_test_positive_count)


def stratified_kfold(ids: Sequence[str], labels, k: int, seed: int) -> FoldPlan:
    """Shuffle each class independently and deal it round-robin into ``k`` folds.

    Negatives continue dealing from the fold after the last positive so fold
    sizes stay within one of each other.
    """
    if k < 2:
        raise SplitError("k must be at least 2")
    y = np.asarray(labels)
    if len(ids) != y.size:
        raise SplitError("ids and labels differ in length")
    pos = [cid for cid, v in zip(ids, y) if v == 1]
    neg = [cid for cid, v in zip(ids, y) if v == 0]
    if len(pos) + len(neg) != len(ids):
        raise SplitError("stratified folds need complete 0/1 labels")
    if len(pos) < k or len(neg) < k:
        raise SplitError(f"need at least {k} positives and {k} negatives, got {len(pos)} and {len(neg)}")
    rng = Xoshiro256(seed)
    rng.shuffle(pos)
    rng.shuffle(neg)
    assignments: dict[str, int] = {}
    for i, cid in enumerate(pos):
        assignments[cid] = i % k
    offset = len(pos) % k
    for i, cid in enumerate(neg):
        assignments[cid] = (offset + i) % k
    ordered = {cid: assignments[cid] for cid in ids}
    return FoldPlan(k=k, seed=seed, assignments=ordered)
