"""Approval-to-first-publication time lags and the top-k lag permutation test.

A small lag means the knowledge linking a compound to a feature was recorded
shortly after the compound's approval. If the most important features have
systematically smaller lags than random feature sets, the features may encode
post-approval knowledge.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .data import DataError, MonthDate, _read_rows, MISSING_TOKENS
from .rng import Xoshiro256, derive_seed

BLOCK_SIZE = 10_000


@dataclass(frozen=True)
class LagTable:
    lags: Mapping[tuple[str, str], int]  # (compound id, feature id) -> months
    skipped: int = 0  # pairs dropped for a missing date

    def features(self) -> list[str]:
        return sorted({f for _, f in self.lags})

    def by_feature(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {}
        for (cid, fid), lag in sorted(self.lags.items()):
            out.setdefault(fid, []).append(lag)
        return out


def load_approvals(path) -> dict[str, MonthDate | None]:
    header, rows = _read_rows(path)
    if [h.strip() for h in header[:2]] != ["compound_id", "approval_date"]:
        raise DataError(f"{path}: expected header compound_id,approval_date")
    out: dict[str, MonthDate | None] = {}
    for row in rows:
        cid, text = row[0].strip(), row[1].strip()
        if cid in out:
            raise DataError(f"{path}: duplicate compound id {cid!r}")
        out[cid] = None if text in MISSING_TOKENS else MonthDate.parse(text)
    return out


def load_publications(path) -> dict[tuple[str, str], MonthDate | None]:
    header, rows = _read_rows(path)
    if [h.strip() for h in header[:3]] != ["compound_id", "feature_id", "first_pub_date"]:
        raise DataError(f"{path}: expected header compound_id,feature_id,first_pub_date")
    out: dict[tuple[str, str], MonthDate | None] = {}
    for row in rows:
        key = (row[0].strip(), row[1].strip())
        if key in out:
            raise DataError(f"{path}: duplicate pair {key!r}")
        text = row[2].strip()
        out[key] = None if text in MISSING_TOKENS else MonthDate.parse(text)
    return out


def compute_time_lags(
    approvals: Mapping[str, MonthDate | None],
    publications: Mapping[tuple[str, str], MonthDate | None],
    restrict_to: Iterable[str] | None = None,
) -> LagTable:
    """Signed month lag (publication - approval) per (compound, feature) pair."""
    keep = set(restrict_to) if restrict_to is not None else None
    lags: dict[tuple[str, str], int] = {}
    skipped = 0
    for (cid, fid), pub in publications.items():
        if keep is not None and cid not in keep:
            continue
        approval = approvals.get(cid)
        if approval is None or pub is None:
            skipped += 1
            continue
        lags[(cid, fid)] = pub.index() - approval.index()
    return LagTable(lags, skipped)


def feature_mean_lag(lags: LagTable, feature: str) -> float:
    """Mean lag over compounds; NaN when the feature has no entries."""
    values = [lag for (_, fid), lag in lags.lags.items() if fid == feature]
    if not values:
        return math.nan
    return sum(values) / len(values)


def feature_mean_lags(lags: LagTable) -> dict[str, float]:
    return {f: sum(v) / len(v) for f, v in lags.by_feature().items()}


@dataclass(frozen=True)
class LeakageResult:
    observed: float
    p_value: float
    k: int
    n_permutations: int
    count_at_or_below: int
    null_mean: float
    null_sd: float
    null_quantiles: Mapping[str, float]
    top_features: tuple[str, ...]
    pool_size: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "observed_mean_lag": self.observed,
            "p_value": self.p_value,
            "k": self.k,
            "n_permutations": self.n_permutations,
            "count_at_or_below": self.count_at_or_below,
            "null": {"mean": self.null_mean, "sd": self.null_sd, "quantiles": dict(self.null_quantiles)},
            "top_features": list(self.top_features),
            "pool_size": self.pool_size,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _subset_mean(values: Sequence[float], idx: Sequence[int]) -> float:
    # fixed summation order so equal subsets give bit-identical statistics
    return math.fsum(values[i] for i in sorted(idx)) / len(idx)


def _tie_tolerance(values: Sequence[float]) -> float:
    scale = max((abs(v) for v in values), default=1.0)
    return 1e-12 * max(scale, 1.0)


def _draw_block(values: Sequence[float], k: int, seed: int, block: int, size: int) -> list[float]:
    rng = Xoshiro256(derive_seed(seed, "lag-permutation", block))
    n = len(values)
    return [_subset_mean(values, rng.sample_indices(n, k)) for _ in range(size)]


def permutation_null(values: Sequence[float], k: int, n_permutations: int, seed: int, jobs: int = 1) -> np.ndarray:
    """Null statistics from uniform k-subsets, generated in fixed seed blocks.

    The result is independent of ``jobs``.
    """
    blocks = [(b, min(BLOCK_SIZE, n_permutations - b * BLOCK_SIZE))
              for b in range((n_permutations + BLOCK_SIZE - 1) // BLOCK_SIZE)]
    if jobs > 1 and len(blocks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_draw_block, *zip(*[(list(values), k, seed, b, s) for b, s in blocks])))
    else:
        parts = [_draw_block(values, k, seed, b, s) for b, s in blocks]
    return np.array([x for part in parts for x in part])


def top_feature_lag_test(
    lags: LagTable,
    ranked_features: Sequence[str],
    k: int = 15,
    n_permutations: int = 100_000,
    seed: int = 0,
    jobs: int = 1,
) -> LeakageResult:
    """One-sided permutation test: are the top-k features' mean lags unusually small?

    The pool is every feature with at least one lag; ``ranked_features`` is
    the importance ranking (most important first), restricted to the pool.
    p = (1 + #{null <= observed}) / (1 + n_permutations).
    """
    means = feature_mean_lags(lags)
    pool = sorted(means)
    eligible_ranked = [f for f in ranked_features if f in means]
    if k < 1 or k > len(eligible_ranked):
        raise ValueError(f"k={k} exceeds the {len(eligible_ranked)} ranked features with defined lags")
    values = [means[f] for f in pool]
    pos = {f: i for i, f in enumerate(pool)}
    top = eligible_ranked[:k]
    observed = _subset_mean(values, [pos[f] for f in top])
    null = permutation_null(values, k, n_permutations, seed, jobs)
    count = int(np.sum(null <= observed + _tie_tolerance(values)))
    q = np.quantile(null, [0.01, 0.05, 0.5, 0.95, 0.99]) if null.size else [math.nan] * 5
    return LeakageResult(
        observed=observed,
        p_value=(1 + count) / (1 + n_permutations),
        k=k,
        n_permutations=n_permutations,
        count_at_or_below=count,
        null_mean=float(null.mean()) if null.size else math.nan,
        null_sd=float(null.std()) if null.size else math.nan,
        null_quantiles=dict(zip(("q01", "q05", "q50", "q95", "q99"), (float(x) for x in q))),
        top_features=tuple(top),
        pool_size=len(pool),
        seed=seed,
    )


def exact_lag_p_value(lags: LagTable, ranked_features: Sequence[str], k: int) -> float:
    """Fraction of all k-subsets whose statistic is <= the observed one."""
    means = feature_mean_lags(lags)
    pool = sorted(means)
    values = [means[f] for f in pool]
    pos = {f: i for i, f in enumerate(pool)}
    top = [f for f in ranked_features if f in means][:k]
    observed = _subset_mean(values, [pos[f] for f in top])
    tol = _tie_tolerance(values)
    hits = total = 0
    for idx in combinations(range(len(values)), k):
        total += 1
        hits += _subset_mean(values, idx) <= observed + tol
    return hits / total
