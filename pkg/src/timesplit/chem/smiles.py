"""SMILES parsing into a molecular graph, and graph -> SMILES writing.

Supported: the organic subset, lowercase aromatic atoms, bracket atoms with
isotope / charge / hydrogen count / atom class, the bond symbols ``- = # :``
and ``/ \\`` (read as single), branches, ring closures (``1``-``9`` and
``%nn``) and dot-separated fragments. Stereo markers are parsed and dropped.
Aromaticity is taken as written; no perception or kekulization happens.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

from ..rng import Xoshiro256

ELEMENTS = frozenset("""
H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu Zn
Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs Ba La
Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg Tl Pb Bi Po
At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg Bh Hs Mt Ds Rg
Cn Nh Fl Mc Lv Ts Og
""".split())

ORGANIC_VALENCES = {
    "B": (3,), "C": (4,), "N": (3, 5), "O": (2,), "P": (3, 5), "S": (2, 4, 6),
    "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}
AROMATIC_ORGANIC = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
AROMATIC_BRACKET = {**AROMATIC_ORGANIC, "se": "Se", "as": "As", "te": "Te"}


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4


_BOND_SYMBOLS = {
    "-": BondOrder.SINGLE, "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC, "/": BondOrder.SINGLE, "\\": BondOrder.SINGLE,
}


class SmilesError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.message = message
        self.position = position


@dataclass(frozen=True)
class Atom:
    element: str
    charge: int = 0
    isotope: int | None = None
    explicit_h: int | None = None  # bracket atoms only
    aromatic: bool = False
    bracket: bool = False
    atom_class: int | None = None


@dataclass(frozen=True)
class Bond:
    begin: int
    end: int
    order: BondOrder


@dataclass(frozen=True)
class Molecule:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    ring_atoms: tuple[bool, ...]
    hydrogens: tuple[int, ...]  # total attached H per atom

    def __post_init__(self):
        seen = set()
        for b in self.bonds:
            if not (0 <= b.begin < len(self.atoms) and 0 <= b.end < len(self.atoms)):
                raise ValueError("bond endpoint out of range")
            if b.begin == b.end:
                raise ValueError("self-bond")
            key = (min(b.begin, b.end), max(b.begin, b.end))
            if key in seen:
                raise ValueError("duplicate bond")
            seen.add(key)
            if b.order == BondOrder.AROMATIC and not (self.atoms[b.begin].aromatic and self.atoms[b.end].aromatic):
                raise ValueError("aromatic bond between non-aromatic atoms")

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def adjacency(self) -> list[list[tuple[int, BondOrder]]]:
        adj: list[list[tuple[int, BondOrder]]] = [[] for _ in self.atoms]
        for b in self.bonds:
            adj[b.begin].append((b.end, b.order))
            adj[b.end].append((b.begin, b.order))
        return adj

    def degree(self, i: int) -> int:
        return sum(1 for b in self.bonds if i in (b.begin, b.end))


def _implicit_hydrogens(atom: Atom, orders: Sequence[BondOrder]) -> int:
    valences = ORGANIC_VALENCES.get(atom.element)
    if valences is None:
        return 0
    aromatic_bonds = sum(1 for o in orders if o == BondOrder.AROMATIC)
    used = sum(int(o) for o in orders if o != BondOrder.AROMATIC) + aromatic_bonds
    if atom.aromatic:
        used += 1  # one electron donated to the pi system
        return max(valences[0] - used, 0)
    for v in valences:
        if v >= used:
            return v - used
    return 0


def _ring_flags(n: int, bonds: Sequence[Bond]) -> tuple[bool, ...]:
    """An atom is in a ring iff one of its bonds is not a bridge."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for k, b in enumerate(bonds):
        adj[b.begin].append((b.end, k))
        adj[b.end].append((b.begin, k))
    disc = [-1] * n
    low = [0] * n
    bridge = [False] * len(bonds)
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for u, k in it:
                if k == via:
                    continue
                if disc[u] == -1:
                    disc[u] = low[u] = timer
                    timer += 1
                    stack.append((u, k, iter(adj[u])))
                    advanced = True
                    break
                low[v] = min(low[v], disc[u])
            if advanced:
                continue
            stack.pop()
            if stack:
                parent = stack[-1][0]
                low[parent] = min(low[parent], low[v])
                if low[v] > disc[parent]:
                    bridge[via] = True
    flags = [False] * n
    for k, b in enumerate(bonds):
        if not bridge[k]:
            flags[b.begin] = flags[b.end] = True
    return tuple(flags)


class _Parser:
    def __init__(self, text: str):
        self.s = text
        self.i = 0
        self.atoms: list[Atom] = []
        self.bonds: list[Bond] = []
        self.bond_keys: set[tuple[int, int]] = set()

    def error(self, message: str, pos: int | None = None) -> SmilesError:
        return SmilesError(message, self.i if pos is None else pos)

    def add_bond(self, a: int, b: int, symbol: str | None, pos: int) -> None:
        if a == b:
            raise self.error("ring bond to itself", pos)
        key = (min(a, b), max(a, b))
        if key in self.bond_keys:
            raise self.error("duplicate bond", pos)
        if symbol is None:
            order = BondOrder.AROMATIC if self.atoms[a].aromatic and self.atoms[b].aromatic else BondOrder.SINGLE
        else:
            order = _BOND_SYMBOLS[symbol]
            if order == BondOrder.AROMATIC and not (self.atoms[a].aromatic and self.atoms[b].aromatic):
                raise self.error("aromatic bond between non-aromatic atoms", pos)
        self.bond_keys.add(key)
        self.bonds.append(Bond(a, b, order))

    def parse(self) -> Molecule:
        s = self.s
        if not s or not s.strip():
            raise SmilesError("empty SMILES", 0)
        prev: int | None = None
        pending: tuple[str, int] | None = None  # bond symbol and its offset
        branches: list[tuple[int, int]] = []
        rings: dict[int, tuple[int, str | None, int]] = {}
        while self.i < len(s):
            c = s[self.i]
            start = self.i
            if c == "(":
                if prev is None:
                    raise self.error("branch opened before any atom")
                if pending is not None:
                    raise self.error("bond symbol before branch")
                branches.append((prev, start))
                self.i += 1
            elif c == ")":
                if not branches:
                    raise self.error("unmatched ')'")
                if pending is not None:
                    raise self.error("dangling bond symbol", pending[1])
                prev = branches.pop()[0]
                self.i += 1
            elif c in _BOND_SYMBOLS:
                if pending is not None:
                    raise self.error("two consecutive bond symbols")
                if prev is None:
                    raise self.error("bond symbol without a preceding atom")
                pending = (c, start)
                self.i += 1
            elif c == "$":
                raise self.error("quadruple bonds are not supported")
            elif c == ".":
                if pending is not None:
                    raise self.error("dangling bond symbol", pending[1])
                if prev is None:
                    raise self.error("empty fragment")
                prev = None
                self.i += 1
            elif c.isdigit() or c == "%":
                if prev is None:
                    raise self.error("ring-closure digit without a preceding atom")
                if c == "%":
                    digits = s[self.i + 1:self.i + 3]
                    if len(digits) != 2 or not digits.isdigit():
                        raise self.error("'%' must be followed by two digits")
                    num = int(digits)
                    self.i += 3
                else:
                    num = int(c)
                    self.i += 1
                sym = pending[0] if pending else None
                if num in rings:
                    other, open_sym, open_pos = rings.pop(num)
                    if open_sym and sym and _BOND_SYMBOLS[open_sym] != _BOND_SYMBOLS[sym]:
                        raise self.error(f"conflicting bond symbols on ring bond {num}", start)
                    self.add_bond(other, prev, open_sym or sym, start)
                else:
                    rings[num] = (prev, sym, start)
                pending = None
            elif c == "[":
                idx = self.bracket_atom()
                prev = self.attach(idx, prev, pending, start)
                pending = None
            elif c.isalpha():
                idx = self.organic_atom()
                prev = self.attach(idx, prev, pending, start)
                pending = None
            elif c.isspace():
                break  # anything after whitespace is a title
            else:
                raise self.error(f"unexpected character {c!r}")
        if pending is not None:
            raise self.error("dangling bond symbol", pending[1])
        if rings:
            num, (_, _, pos) = min(rings.items(), key=lambda kv: kv[1][2])
            raise self.error(f"unclosed ring bond {num}", pos)
        if branches:
            raise self.error("unclosed branch", branches[-1][1])
        if not self.atoms:
            raise SmilesError("no atoms", 0)
        return self.finish()

    def attach(self, idx: int, prev: int | None, pending: tuple[str, int] | None, pos: int) -> int:
        if prev is not None:
            self.add_bond(prev, idx, pending[0] if pending else None, pos)
        return idx

    def organic_atom(self) -> int:
        s, i = self.s, self.i
        two = s[i:i + 2]
        if two in ("Cl", "Br"):
            self.i += 2
            self.atoms.append(Atom(two))
        elif s[i] in "BCNOPSFI":
            self.i += 1
            self.atoms.append(Atom(s[i]))
        elif s[i] in AROMATIC_ORGANIC:
            self.i += 1
            self.atoms.append(Atom(AROMATIC_ORGANIC[s[i]], aromatic=True))
        else:
            raise self.error(f"unknown element {s[i]!r}")
        return len(self.atoms) - 1

    def bracket_atom(self) -> int:
        s = self.s
        open_pos = self.i
        close = s.find("]", open_pos)
        if close < 0:
            raise self.error("unclosed bracket atom", open_pos)
        j = open_pos + 1

        def fail(msg: str) -> SmilesError:
            return SmilesError(msg, j)

        k = j
        while k < close and s[k].isdigit():
            k += 1
        isotope = int(s[j:k]) if k > j else None
        j = k
        if j >= close:
            raise fail("malformed bracket atom: missing element")
        if s[j].islower():
            two = s[j:j + 2]
            if two in AROMATIC_BRACKET and j + 2 <= close:
                element, aromatic, j = AROMATIC_BRACKET[two], True, j + 2
            elif s[j] in AROMATIC_BRACKET:
                element, aromatic, j = AROMATIC_BRACKET[s[j]], True, j + 1
            else:
                raise fail(f"unknown aromatic element {s[j]!r}")
        elif s[j].isupper():
            two = s[j:j + 2]
            if j + 1 < close and two in ELEMENTS:
                element, j = two, j + 2
            elif s[j] in ELEMENTS:
                element, j = s[j], j + 1
            else:
                raise fail(f"unknown element {s[j:j + 2]!r}")
            aromatic = False
        else:
            raise fail("malformed bracket atom")
        if j < close and s[j] == "@":
            j += 1
            if j < close and s[j] == "@":
                j += 1
            elif s[j:j + 2] in ("TH", "AL", "SP", "TB", "OH"):
                j += 2
                while j < close and s[j].isdigit():
                    j += 1
        hcount = 0
        if j < close and s[j] == "H":
            j += 1
            k = j
            while k < close and s[k].isdigit():
                k += 1
            hcount = int(s[j:k]) if k > j else 1
            j = k
        charge = 0
        if j < close and s[j] in "+-":
            sign = 1 if s[j] == "+" else -1
            j += 1
            k = j
            while k < close and s[k].isdigit():
                k += 1
            if k > j:
                charge = sign * int(s[j:k])
                j = k
            else:
                charge = sign
                while j < close and s[j] == s[j - 1]:
                    charge += sign
                    j += 1
        atom_class = None
        if j < close and s[j] == ":":
            k = j + 1
            while k < close and s[k].isdigit():
                k += 1
            if k == j + 1:
                raise fail("malformed atom class")
            atom_class = int(s[j + 1:k])
            j = k
        if j != close:
            raise fail(f"malformed bracket atom {s[open_pos:close + 1]!r}")
        self.i = close + 1
        self.atoms.append(Atom(element, charge, isotope, hcount, aromatic, True, atom_class))
        return len(self.atoms) - 1

    def finish(self) -> Molecule:
        orders: list[list[BondOrder]] = [[] for _ in self.atoms]
        for b in self.bonds:
            orders[b.begin].append(b.order)
            orders[b.end].append(b.order)
        hydrogens = tuple(
            a.explicit_h if a.bracket else _implicit_hydrogens(a, orders[k]) for k, a in enumerate(self.atoms)
        )
        return Molecule(tuple(self.atoms), tuple(self.bonds), _ring_flags(len(self.atoms), self.bonds), hydrogens)


def parse_smiles(text: str) -> Molecule:
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# writing


def _atom_invariants(mol: Molecule) -> list[tuple]:
    adj = mol.adjacency()
    return [
        (a.element, a.aromatic, a.charge, a.isotope or 0, mol.hydrogens[k], len(adj[k]),
         mol.ring_atoms[k], a.bracket)
        for k, a in enumerate(mol.atoms)
    ]


def _dense_ranks(keys: Sequence) -> list[int]:
    order = {key: r for r, key in enumerate(sorted(set(keys)))}
    return [order[key] for key in keys]


def canonical_ranks(mol: Molecule) -> list[int]:
    """Graph-invariant atom ranks (iterative refinement with tie breaking)."""
    adj = mol.adjacency()
    ranks = _dense_ranks(_atom_invariants(mol))

    def refine(r: list[int]) -> list[int]:
        while True:
            keys = [(r[v], tuple(sorted((int(o), r[u]) for u, o in adj[v]))) for v in range(len(r))]
            new = _dense_ranks(keys)
            if len(set(new)) == len(set(r)):
                return new
            r = new

    ranks = refine(ranks)
    while len(set(ranks)) < len(ranks):
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = min(r for r, c in counts.items() if c > 1)
        pick = ranks.index(tied)
        doubled = [2 * r for r in ranks]
        doubled[pick] -= 1
        ranks = refine(_dense_ranks(doubled))
    return ranks


def _atom_text(atom: Atom, hydrogens: int) -> str:
    sym = atom.element.lower() if atom.aromatic else atom.element
    if not atom.bracket:
        return sym
    out = "[" + (str(atom.isotope) if atom.isotope is not None else "") + sym
    if hydrogens:
        out += "H" if hydrogens == 1 else f"H{hydrogens}"
    if atom.charge:
        sign = "+" if atom.charge > 0 else "-"
        out += sign if abs(atom.charge) == 1 else f"{sign}{abs(atom.charge)}"
    if atom.atom_class is not None:
        out += f":{atom.atom_class}"
    return out + "]"


def _bond_text(mol: Molecule, a: int, b: int, order: BondOrder) -> str:
    if order == BondOrder.DOUBLE:
        return "="
    if order == BondOrder.TRIPLE:
        return "#"
    if order == BondOrder.SINGLE and mol.atoms[a].aromatic and mol.atoms[b].aromatic:
        return "-"
    return ""


def to_smiles(mol: Molecule, rng: Xoshiro256 | None = None) -> str:
    """Serialize ``mol``.

    Without ``rng`` the output is canonical (atom-order independent). With
    ``rng`` the start atoms and neighbor visiting order are randomized, which
    yields alternative SMILES of the same graph.
    """
    n = mol.n_atoms
    rank = canonical_ranks(mol) if rng is None else rng.permutation(n)
    adj = mol.adjacency()
    visited = [False] * n
    children: list[list[tuple[int, BondOrder]]] = [[] for _ in range(n)]
    ring_ops: list[list[tuple[int, int, BondOrder, bool]]] = [[] for _ in range(n)]  # (bond id, other, order, opening)
    bond_ids: dict[tuple[int, int], int] = {}
    for k, b in enumerate(mol.bonds):
        bond_ids[(b.begin, b.end)] = bond_ids[(b.end, b.begin)] = k
    ring_seen: set[int] = set()

    def dfs(root: int) -> None:
        visited[root] = True
        stack = [(root, -1, iter(sorted(adj[root], key=lambda t: rank[t[0]])))]
        while stack:
            v, parent, it = stack[-1]
            for u, order in it:
                if u == parent:
                    continue
                bid = bond_ids[(v, u)]
                if visited[u]:
                    if bid not in ring_seen:
                        ring_seen.add(bid)
                        ring_ops[u].append((bid, v, order, True))
                        ring_ops[v].append((bid, u, order, False))
                    continue
                visited[u] = True
                children[v].append((u, order))
                stack.append((u, v, iter(sorted(adj[u], key=lambda t: rank[t[0]]))))
                break
            else:
                stack.pop()

    roots = []
    for v in sorted(range(n), key=lambda a: rank[a]):
        if not visited[v]:
            roots.append(v)
            dfs(v)

    # ring bonds are emitted in DFS (writing) order: openings are found later than
    # the atom they sit on, so sort each atom's list by the partner's write position
    write_pos = [0] * n
    counter = 0
    for root in roots:
        stack = [root]
        while stack:
            v = stack.pop()
            write_pos[v] = counter
            counter += 1
            stack.extend(u for u, _ in reversed(children[v]))
    for ops in ring_ops:
        ops.sort(key=lambda t: (t[3], write_pos[t[1]]))  # closings first

    digits: dict[int, int] = {}
    free: list[int] = []
    next_digit = [1]

    def take_digit() -> int:
        if free:
            free.sort()
            return free.pop(0)
        d = next_digit[0]
        next_digit[0] += 1
        return d

    def digit_text(d: int) -> str:
        return str(d) if d < 10 else f"%{d:02d}"

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * n + 100))

    def emit(v: int) -> str:
        parts = [_atom_text(mol.atoms[v], mol.hydrogens[v])]
        for bid, other, order, opening in ring_ops[v]:
            if opening:
                d = take_digit()
                digits[bid] = d
                parts.append(_bond_text(mol, v, other, order) + digit_text(d))
            else:
                d = digits.pop(bid)
                free.append(d)
                parts.append(digit_text(d))
        kids = children[v]
        for idx, (u, order) in enumerate(kids):
            body = _bond_text(mol, v, u, order) + emit(u)
            parts.append(body if idx == len(kids) - 1 else f"({body})")
        return "".join(parts)

    return ".".join(emit(r) for r in roots)
