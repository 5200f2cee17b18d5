"""Independent reference implementations used only by the tests."""

from itertools import combinations

import mpmath
import networkx as nx
import numpy as np

mpmath.mp.dps = 40


def auc_pairs(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(pos) * len(neg))


def normal_quantile(p):
    return float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(p) - 1))


def normal_cdf(z):
    return float(mpmath.ncdf(mpmath.mpf(z)))


def t_cdf_df2(t):
    return 0.5 + t / (2 * np.sqrt(t * t + 2))


def confusion(scores, labels, threshold=0.5):
    tp = fp = tn = fn = 0
    for s, y in zip(scores, labels):
        pred = 1 if s >= threshold else 0
        if pred and y:
            tp += 1
        elif pred:
            fp += 1
        elif y:
            fn += 1
        else:
            tn += 1
    return tp, fp, tn, fn


def mcc(tp, fp, tn, fn):
    den = mpmath.sqrt(mpmath.mpf(tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
    return 0.0 if den == 0 else float((mpmath.mpf(tp) * tn - mpmath.mpf(fp) * fn) / den)


def max_spanning_tree_edges(W):
    """Kruskal on descending weights with a fresh union-find."""
    n = W.shape[0]
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    edges = sorted(((W[i, j], i, j) for i, j in combinations(range(n), 2)), reverse=True)
    out = set()
    for _, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            out.add((i, j))
    return out


def planar(n, edges):
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    return nx.check_planarity(g)[0]


def exact_lag_p(feature_means, observed, k):
    count = 0
    total = 0
    vals = list(feature_means)
    for combo in combinations(range(len(vals)), k):
        total += 1
        if np.mean([vals[i] for i in combo]) <= observed + 1e-12:
            count += 1
    return count / total
