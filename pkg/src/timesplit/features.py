"""Unsupervised three-stage feature filter.

Duplicated columns, then near-constant columns (low coefficient of
variation), then one member of each highly correlated pair. Every stage keeps
the leftmost column of a conflicting group.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import FeatureTable


class FilterError(ValueError):
    pass


@dataclass
class FilterReport:
    dropped_duplicates: list[str] = field(default_factory=list)
    dropped_low_cv: list[str] = field(default_factory=list)
    dropped_correlated: list[tuple[str, str]] = field(default_factory=list)
    kept: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dropped_correlated"] = [list(p) for p in self.dropped_correlated]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _column_key(col: np.ndarray) -> bytes:
    # -0.0 -> 0.0 and every NaN -> one canonical NaN so equal columns hash equal
    canon = np.where(np.isnan(col), np.nan, col + 0.0)
    return canon.tobytes()


def drop_duplicate_features(t: FeatureTable) -> tuple[FeatureTable, FilterReport]:
    seen: set[bytes] = set()
    keep, dropped = [], []
    for j, name in enumerate(t.feature_names):
        key = _column_key(t.values[:, j])
        if key in seen:
            dropped.append(name)
        else:
            seen.add(key)
            keep.append(j)
    out = t.take_columns(keep)
    return out, FilterReport(dropped_duplicates=dropped, kept=list(out.feature_names))


def coefficient_of_variation(col: np.ndarray) -> float:
    """Population sd / |mean| over non-missing entries.

    0 for constant (or empty) columns, ``inf`` for zero-mean varying columns.
    """
    x = col[~np.isnan(col)]
    if x.size == 0:
        return 0.0
    mean = x.mean()
    sd = np.sqrt(np.mean((x - mean) ** 2))
    if sd == 0:
        return 0.0
    if mean == 0:
        return np.inf
    return float(sd / abs(mean))


def drop_low_cv_features(t: FeatureTable, threshold: float = 0.05) -> tuple[FeatureTable, FilterReport]:
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    keep, dropped = [], []
    for j, name in enumerate(t.feature_names):
        col = t.values[:, j]
        x = col[~np.isnan(col)]
        constant = x.size == 0 or np.all(x == x[0])
        if constant or coefficient_of_variation(col) < threshold:
            dropped.append(name)
        else:
            keep.append(j)
    out = t.take_columns(keep)
    return out, FilterReport(dropped_low_cv=dropped, kept=list(out.feature_names))


def _pearson_r2(a: np.ndarray, b: np.ndarray) -> float | None:
    mask = ~(np.isnan(a) | np.isnan(b))
    if mask.sum() < 3:
        return None
    x, y = a[mask], b[mask]
    x = x - x.mean()
    y = y - y.mean()
    sxx, syy = float(x @ x), float(y @ y)
    if sxx == 0 or syy == 0:
        return None
    r = float(x @ y) / np.sqrt(sxx * syy)
    return min(r * r, 1.0)


def _r2_matrix(values: np.ndarray) -> np.ndarray:
    """Squared Pearson matrix for complete data (NaN where undefined)."""
    centered = values - values.mean(axis=0)
    ss = np.einsum("ij,ij->j", centered, centered)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (centered.T @ centered) / np.sqrt(np.outer(ss, ss))
    r2 = np.minimum(r * r, 1.0)
    r2[~np.isfinite(r2)] = np.nan
    return r2


def drop_correlated_features(t: FeatureTable, r2_threshold: float = 0.85) -> tuple[FeatureTable, FilterReport]:
    """Scan pairs ``i < j`` and drop ``j`` when r² with a surviving ``i`` exceeds the threshold."""
    if not 0 <= r2_threshold <= 1:
        raise ValueError("r2_threshold must lie in [0, 1]")
    values = t.values
    n, p = values.shape
    complete = not np.isnan(values).any() and n >= 3
    r2 = _r2_matrix(values) if complete else None
    dropped = np.zeros(p, dtype=bool)
    pairs: list[tuple[str, str]] = []
    for i in range(p):
        if dropped[i]:
            continue
        for j in range(i + 1, p):
            if dropped[j]:
                continue
            if r2 is not None:
                v = r2[i, j]
                value = None if np.isnan(v) else float(v)
            else:
                value = _pearson_r2(values[:, i], values[:, j])
            if value is not None and value > r2_threshold:
                dropped[j] = True
                pairs.append((t.feature_names[i], t.feature_names[j]))
    out = t.take_columns([j for j in range(p) if not dropped[j]])
    return out, FilterReport(dropped_correlated=pairs, kept=list(out.feature_names))


def apply_filter_pipeline(
    t: FeatureTable, cv_threshold: float = 0.05, r2_threshold: float = 0.85
) -> tuple[FeatureTable, FilterReport]:
    t1, rep1 = drop_duplicate_features(t)
    t2, rep2 = drop_low_cv_features(t1, cv_threshold)
    t3, rep3 = drop_correlated_features(t2, r2_threshold)
    if t3.shape[1] == 0:
        raise FilterError(f"{t.dataset_name}: all features filtered")
    report = FilterReport(
        dropped_duplicates=rep1.dropped_duplicates,
        dropped_low_cv=rep2.dropped_low_cv,
        dropped_correlated=rep3.dropped_correlated,
        kept=list(t3.feature_names),
    )
    return t3, report
