import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from timesplit.chem.network import WeightedGraph, all_pairs_shortest_paths, pmfg_construct
from timesplit.chem.planarity import is_planar

from . import oracles


def random_similarity(n, rng):
    W = rng.uniform(size=(n, n))
    W = (W + W.T) / 2
    np.fill_diagonal(W, 1.0)
    return W


def edge_set(g):
    return {(i, j) for i, j, _ in g.edges}


def test_k4_keeps_everything():
    W = random_similarity(4, np.random.default_rng(0))
    assert len(pmfg_construct(W).edges) == 6


def test_k5_drops_lowest_edge():
    rng = np.random.default_rng(1)
    for _ in range(20):
        W = random_similarity(5, rng)
        g = pmfg_construct(W)
        assert len(g.edges) == 9
        missing = set(itertools.combinations(range(5), 2)) - edge_set(g)
        lowest = min(itertools.combinations(range(5), 2), key=lambda e: W[e])
        assert missing == {lowest}


def test_random_graphs_against_oracles():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(3, 31))
        W = random_similarity(n, rng)
        g = pmfg_construct(W)
        edges = edge_set(g)
        assert len(edges) == 3 * (n - 2)
        assert oracles.planar(n, edges)
        assert oracles.max_spanning_tree_edges(W) <= edges
        assert all(w == W[i, j] for i, j, w in g.edges)


def test_n20_edge_count():
    g = pmfg_construct(random_similarity(20, np.random.default_rng(3)))
    assert len(g.edges) == 54


def test_pmfg_rejects_small_or_bad_input():
    with pytest.raises(ValueError):
        pmfg_construct(np.eye(2))
    with pytest.raises(ValueError):
        pmfg_construct(np.zeros((3, 4)))


def test_planarity_matches_networkx():
    rng = np.random.default_rng(4)
    for _ in range(400):
        n = int(rng.integers(1, 12))
        pairs = list(itertools.combinations(range(n), 2))
        m = int(rng.integers(0, len(pairs) + 1)) if pairs else 0
        chosen = [pairs[i] for i in rng.choice(len(pairs), size=m, replace=False)] if m else []
        assert is_planar(n, chosen) == oracles.planar(n, chosen)


def test_known_graphs():
    k5 = list(itertools.combinations(range(5), 2))
    k33 = [(a, b) for a in range(3) for b in range(3, 6)]
    assert not is_planar(5, k5)
    assert not is_planar(6, k33)
    assert is_planar(5, k5[1:])
    petersen = list(nx.petersen_graph().edges())
    assert not is_planar(10, petersen)
    assert is_planar(8, list(nx.cubical_graph().edges()))


def test_shortest_paths():
    path = WeightedGraph(3, ((0, 1, 0.5), (1, 2, 0.5)))
    D = all_pairs_shortest_paths(path)
    assert D[0, 2] == 2
    full = WeightedGraph(4, tuple((i, j, 1.0) for i, j in itertools.combinations(range(4), 2)))
    D = all_pairs_shortest_paths(full)
    assert np.all(D[~np.eye(4, dtype=bool)] == 1)
    split = WeightedGraph(4, ((0, 1, 1.0), (2, 3, 1.0)))
    D = all_pairs_shortest_paths(split)
    assert np.isinf(D[0, 2]) and D[0, 1] == 1


def test_edge_list_file(tmp_path):
    g = pmfg_construct(random_similarity(5, np.random.default_rng(5)))
    p = tmp_path / "e.csv"
    g.write_edge_list(p, list("abcde"))
    lines = p.read_text().splitlines()
    assert lines[0] == "node_i,node_j,weight" and len(lines) == 10
