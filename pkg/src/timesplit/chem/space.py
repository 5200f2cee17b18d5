"""Chemical-space diagnostics: z-scoring, correlation distances, PCA,
Tanimoto matrices and train/test grouping of pairwise values."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fingerprint import Fingerprint, tanimoto


def zscore_fill(X) -> np.ndarray:
    """Column z-scores; missing cells (and zero-variance columns) become 0."""
    X = np.asarray(X, dtype=float)
    mean = np.nanmean(X, axis=0) if X.size else np.zeros(X.shape[1])
    sd = np.nanstd(X, axis=0) if X.size else np.ones(X.shape[1])
    mean = np.where(np.isnan(mean), 0.0, mean)
    sd = np.where((sd > 0) & np.isfinite(sd), sd, 1.0)
    Z = (X - mean) / sd
    return np.where(np.isnan(Z), 0.0, Z)


@dataclass(frozen=True)
class GroupedValues:
    within_train: np.ndarray
    within_test: np.ndarray
    cross: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {"within_train": self.within_train, "within_test": self.within_test, "cross": self.cross}


def group_pairwise(M: np.ndarray, is_test: Sequence[bool]) -> GroupedValues:
    """Split the off-diagonal upper triangle of ``M`` by train/test membership."""
    t = np.asarray(is_test, dtype=bool)
    iu, ju = np.triu_indices(M.shape[0], k=1)
    vals = M[iu, ju]
    a, b = t[iu], t[ju]
    return GroupedValues(vals[~a & ~b], vals[a & b], vals[a != b])


@dataclass(frozen=True)
class DistanceResult:
    distances: np.ndarray
    constant_rows: tuple[int, ...]


def correlation_distance_matrix(X) -> DistanceResult:
    """1 - Pearson correlation between rows; distance to a constant row is 1."""
    X = np.asarray(X, dtype=float)
    C = X - X.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", C, C))
    constant = norms == 0
    safe = np.where(constant, 1.0, norms)
    U = C / safe[:, None]
    R = np.clip(U @ U.T, -1.0, 1.0)
    R[constant, :] = 0.0
    R[:, constant] = 0.0
    D = 1.0 - R
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return DistanceResult(D, tuple(int(i) for i in np.nonzero(constant)[0]))


def row_correlation(X) -> np.ndarray:
    """Pearson correlation between rows (0 against constant rows, 1 on the diagonal)."""
    R = 1.0 - correlation_distance_matrix(X).distances
    np.fill_diagonal(R, 1.0)
    return R


@dataclass(frozen=True)
class PCAResult:
    scores: np.ndarray
    components: np.ndarray  # (n_components, n_features), orthonormal rows
    explained_variance: np.ndarray
    explained_fraction: np.ndarray
    mean: np.ndarray
    degenerate: bool = False


def pca_embed(X, n_components: int = 2) -> PCAResult:
    """PCA from the eigendecomposition of the sample covariance.

    Each component's largest-magnitude loading is made positive.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if not 1 <= n_components <= min(n, p):
        raise ValueError(f"n_components must lie in [1, {min(n, p)}]")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / max(n - 1, 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    total = evals.sum()
    comps = evecs[:, :n_components].T.copy()
    for c in comps:
        k = int(np.argmax(np.abs(c)))
        if c[k] < 0:
            c *= -1
    if total <= 0:
        return PCAResult(np.zeros((n, n_components)), comps, evals[:n_components],
                         np.zeros(n_components), mean, degenerate=True)
    return PCAResult(Xc @ comps.T, comps, evals[:n_components], evals[:n_components] / total, mean)


def tanimoto_matrix(fps: Sequence[Fingerprint]) -> np.ndarray:
    n = len(fps)
    M = np.eye(n)
    for i in range(n):
        if not fps[i].bits:
            M[i, i] = 0.0
        for j in range(i + 1, n):
            M[i, j] = M[j, i] = tanimoto(fps[i], fps[j])
    return M


def histogram_rows(groups: GroupedValues, bins) -> list[dict]:
    """Long-format histogram rows (group, bin_low, bin_high, count); non-finite values skipped."""
    rows = []
    for name, vals in groups.as_dict().items():
        finite = vals[np.isfinite(vals)]
        counts, edges = np.histogram(finite, bins=bins)
        for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
            rows.append({"group": name, "bin_low": float(lo), "bin_high": float(hi), "count": int(c)})
    return rows


def summarize(groups: GroupedValues) -> dict:
    out = {}
    for name, vals in groups.as_dict().items():
        finite = vals[np.isfinite(vals)]
        out[name] = {
            "n_pairs": int(vals.size),
            "n_infinite": int(vals.size - finite.size),
            "mean": float(finite.mean()) if finite.size else None,
            "median": float(np.median(finite)) if finite.size else None,
        }
    return out
