"""Planar maximally filtered graph (PMFG) and hop-count distances."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .planarity import is_planar


@dataclass(frozen=True)
class WeightedGraph:
    n: int
    edges: tuple[tuple[int, int, float], ...]  # (i, j, weight) with i < j

    def adjacency_matrix(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            A[i, j] = A[j, i] = w
        return A

    def write_edge_list(self, path, labels=None) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node_i", "node_j", "weight"])
            for i, j, weight in self.edges:
                a = labels[i] if labels is not None else i
                b = labels[j] if labels is not None else j
                w.writerow([a, b, repr(float(weight))])


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def pmfg_construct(similarity) -> WeightedGraph:
    """Greedy planar filtering of a symmetric similarity matrix.

    Edges are taken by descending weight (ties: lower index pair first) and
    kept while the graph stays planar, until 3(n-2) edges are accepted.
    """
    S = np.asarray(similarity, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("similarity must be a square matrix")
    n = S.shape[0]
    if n < 3:
        raise ValueError("PMFG needs at least 3 nodes")
    if not np.allclose(S, S.T, equal_nan=True):
        raise ValueError("similarity matrix must be symmetric")
    iu, ju = np.triu_indices(n, k=1)
    w = S[iu, ju]
    finite = np.isfinite(w)
    iu, ju, w = iu[finite], ju[finite], w[finite]
    order = np.lexsort((ju, iu, -w))
    target = 3 * (n - 2)
    accepted: list[tuple[int, int, float]] = []
    accepted_pairs: list[tuple[int, int]] = []
    components = _DisjointSet(n)
    for k in order:
        i, j = int(iu[k]), int(ju[k])
        # joining two components can never break planarity
        if components.find(i) != components.find(j) or is_planar(n, accepted_pairs + [(i, j)]):
            components.union(i, j)
            accepted.append((i, j, float(w[k])))
            accepted_pairs.append((i, j))
            if len(accepted) == target:
                break
    return WeightedGraph(n, tuple(accepted))


def all_pairs_shortest_paths(g: WeightedGraph) -> np.ndarray:
    """Unweighted hop counts; ``inf`` between disconnected nodes."""
    if not g.edges:
        D = np.full((g.n, g.n), np.inf)
        np.fill_diagonal(D, 0.0)
        return D
    rows = [i for i, j, _ in g.edges] + [j for i, j, _ in g.edges]
    cols = [j for i, j, _ in g.edges] + [i for i, j, _ in g.edges]
    A = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(g.n, g.n))
    return shortest_path(A, method="D", directed=False, unweighted=True)
