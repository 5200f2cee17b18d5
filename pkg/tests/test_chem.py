import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from timesplit.chem import (
    BondOrder,
    Fingerprint,
    SmilesError,

    morgan_fingerprint,
    parse_smiles,
    tanimoto,
    to_smiles,
)
from timesplit.chem.fingerprint import environment_hashes, fnv1a64
from timesplit.rng import Xoshiro256

from .molecules import SMILES


def as_graph(mol):
    g = nx.Graph()
    for i, a in enumerate(mol.atoms):
        g.add_node(i, el=a.element, charge=a.charge, aro=a.aromatic, h=mol.hydrogens[i], iso=a.isotope)
    for b in mol.bonds:
        g.add_edge(b.begin, b.end, order=int(b.order))
    return g


def isomorphic(m1, m2):
    nm = lambda a, b: a == b  # noqa: E731
    return nx.is_isomorphic(as_graph(m1), as_graph(m2), node_match=nm, edge_match=nm)


def test_parse_examples():
    m = parse_smiles("CCO")
    assert [a.element for a in m.atoms] == ["C", "C", "O"]
    assert [b.order for b in m.bonds] == [BondOrder.SINGLE] * 2
    assert m.hydrogens == (3, 2, 1)
    b = parse_smiles("c1ccccc1")
    assert all(a.aromatic and a.element == "C" for a in b.atoms) and len(b.atoms) == 6
    assert len(b.bonds) == 6 and all(x.order == BondOrder.AROMATIC for x in b.bonds)
    assert all(b.ring_atoms)
    s = parse_smiles("[Na+].[Cl-]")
    assert [a.charge for a in s.atoms] == [1, -1] and s.bonds == ()


@pytest.mark.parametrize("text,needle", [
    ("C1CC", "unclosed ring bond 1"), ("CC(C", "unclosed branch"), ("C)C", None),
    ("CXx", None), ("[Na+", None), ("C%1", None), ("[]", None), ("[Xq]", None),
])
def test_parse_errors(text, needle):
    with pytest.raises(SmilesError, match=needle) as err:
        parse_smiles(text)
    assert err.value.position >= 0


def test_bracket_details():
    m = parse_smiles("[13CH3:7][NH3+]")
    a, n = m.atoms
    assert a.isotope == 13 and a.explicit_h == 3 and a.atom_class == 7
    assert n.charge == 1 and m.hydrogens == (3, 3)
    assert parse_smiles("C%12CC%12").bonds[-1].order == BondOrder.SINGLE


@pytest.mark.parametrize("smi", SMILES)
def test_writer_round_trip_is_isomorphic(smi):
    m = parse_smiles(smi)
    assert isomorphic(parse_smiles(to_smiles(m)), m)
    rng = Xoshiro256(len(smi))
    for _ in range(5):
        assert isomorphic(parse_smiles(to_smiles(m, rng)), m)


@pytest.mark.parametrize("smi", SMILES)
def test_canonical_writer_fixed_point(smi):
    once = to_smiles(parse_smiles(smi))
    assert to_smiles(parse_smiles(once)) == once
    rng = Xoshiro256(99)
    assert to_smiles(parse_smiles(to_smiles(parse_smiles(smi), rng))) == once


def test_fingerprint_invariance_under_rewrites():
    for idx, smi in enumerate(SMILES):
        m = parse_smiles(smi)
        ref = morgan_fingerprint(m)
        rng = Xoshiro256(idx)
        for _ in range(100):
            assert morgan_fingerprint(parse_smiles(to_smiles(m, rng))) == ref


def test_fingerprint_examples():
    assert morgan_fingerprint(parse_smiles("CCO")) == morgan_fingerprint(parse_smiles("OCC"))
    assert isomorphic(parse_smiles("CCO"), parse_smiles("OCC"))
    assert len(morgan_fingerprint(parse_smiles("c1ccccc1"))) <= 3
    assert len(set(environment_hashes(parse_smiles("C"), radius=2))) == 1
    assert morgan_fingerprint(parse_smiles("CCO")) != morgan_fingerprint(parse_smiles("CCN"))
    fp = morgan_fingerprint(parse_smiles("CC(=O)O"), n_bits=64)
    assert fp.n_bits == 64 and all(0 <= b < 64 for b in fp.bits)


def test_fnv_reference():
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C


def test_tanimoto():
    a = Fingerprint(8, frozenset({1, 2, 3}))
    b = Fingerprint(8, frozenset({2, 3, 4}))
    assert tanimoto(a, b) == 0.5
    assert tanimoto(a, a) == 1.0
    assert tanimoto(a, Fingerprint(8, frozenset({5}))) == 0.0
    empty = Fingerprint(8, frozenset())
    assert tanimoto(empty, empty) == 0.0
    with pytest.raises(ValueError):
        tanimoto(a, Fingerprint(16, frozenset()))


@given(st.frozensets(st.integers(0, 31)), st.frozensets(st.integers(0, 31)))
def test_tanimoto_properties(x, y):
    a, b = Fingerprint(32, x), Fingerprint(32, y)
    assert tanimoto(a, b) == tanimoto(b, a)
    assert tanimoto(a, a) == (1.0 if x else 0.0)
    assert 0.0 <= tanimoto(a, b) <= 1.0
