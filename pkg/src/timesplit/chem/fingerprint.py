"""Morgan (extended-connectivity) fingerprints and Tanimoto similarity.

Atom environments are hashed with 64-bit FNV-1a over a fixed little-endian
encoding, so bit positions are reproducible on every platform. The scheme
follows the usual ECFP recipe but is not bit-compatible with other toolkits.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .smiles import Molecule

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK
    return h


def _pack_u64(values) -> bytes:
    return struct.pack(f"<{len(values)}Q", *values)


def atom_invariant_hash(element: str, degree: int, charge: int, hydrogens: int, in_ring: bool, aromatic: bool) -> int:
    sym = element.encode("ascii")
    data = struct.pack("<B", len(sym)) + sym + struct.pack("<qqqBB", degree, charge, hydrogens, in_ring, aromatic)
    return fnv1a64(data)


@dataclass(frozen=True)
class Fingerprint:
    n_bits: int
    bits: frozenset[int]

    def __post_init__(self):
        if any(not 0 <= b < self.n_bits for b in self.bits):
            raise ValueError("bit index out of range")

    def __len__(self) -> int:
        return len(self.bits)

    def to_array(self):
        import numpy as np

        arr = np.zeros(self.n_bits, dtype=np.uint8)
        arr[list(self.bits)] = 1
        return arr


def environment_hashes(mol: Molecule, radius: int = 2) -> list[int]:
    """Distinct-environment hashes for radii ``0..radius``.

    Environments that add no bond relative to a smaller radius, or cover the
    same bond set as another atom's environment at the same radius, are
    dropped (the lower hash survives).
    """
    adj = mol.adjacency()
    bond_index: dict[tuple[int, int], int] = {}
    for k, b in enumerate(mol.bonds):
        bond_index[(b.begin, b.end)] = bond_index[(b.end, b.begin)] = k
    hashes = [
        atom_invariant_hash(a.element, len(adj[i]), a.charge, mol.hydrogens[i], mol.ring_atoms[i], a.aromatic)
        for i, a in enumerate(mol.atoms)
    ]
    out = list(hashes)
    env_bonds = [frozenset() for _ in mol.atoms]
    seen_envs: set[frozenset] = set()
    active = [True] * len(mol.atoms)
    for r in range(1, radius + 1):
        new_hashes = []
        new_envs = []
        for i in range(len(mol.atoms)):
            pairs = sorted((int(order), hashes[j]) for j, order in adj[i])
            new_hashes.append(fnv1a64(_pack_u64([r, hashes[i], *[x for p in pairs for x in p]])))
            env = set(env_bonds[i])
            for j, _ in adj[i]:
                env.add(bond_index[(i, j)])
                env |= env_bonds[j]
            new_envs.append(frozenset(env))
        candidates = []
        for i in range(len(mol.atoms)):
            if not active[i]:
                continue
            if new_envs[i] == env_bonds[i]:
                active[i] = False  # radius expansion reached a fixed point
                continue
            candidates.append((new_envs[i], new_hashes[i], i))
        candidates.sort(key=lambda t: (t[1], t[2]))
        for env, h, i in candidates:
            if env in seen_envs:
                continue
            seen_envs.add(env)
            out.append(h)
        hashes, env_bonds = new_hashes, new_envs
    return out


def morgan_fingerprint(mol: Molecule, radius: int = 2, n_bits: int = 2048) -> Fingerprint:
    if n_bits <= 0 or radius < 0:
        raise ValueError("radius must be >= 0 and n_bits > 0")
    return Fingerprint(n_bits, frozenset(h % n_bits for h in environment_hashes(mol, radius)))


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|A & B| / |A | B|; defined as 0 when both are empty."""
    if a.n_bits != b.n_bits:
        raise ValueError(f"fingerprint lengths differ ({a.n_bits} vs {b.n_bits})")
    union = len(a.bits | b.bits)
    if union == 0:
        return 0.0
    return len(a.bits & b.bits) / union
