"""Synthetic benchmark with concept drift and knowledge leakage.

Compounds are assembled from structural motifs on a carbon backbone and get
market dates spread over a timeline. One target's motif weights flip sign for
a subset of motifs after the drift point, so a model trained on older
compounds mis-ranks newer ones while a random split averages the two regimes.
A "knowledge" table of compound-protein interactions carries label signal
whose first-publication dates can be made to follow approval closely.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .chem.smiles import BondOrder, parse_smiles
from .data import (
    CompoundRecord,
    DatasetBundle,
    FeatureTable,
    LabelTable,
    MonthDate,
    build_registry,
    intersect_compounds,
    write_feature_table,
    write_label_table,
)
from .rng import derive_seed

MOTIFS: tuple[tuple[str, str], ...] = (
    ("phenyl", "c1ccccc1"),
    ("carboxyl", "C(=O)O"),
    ("amine", "N"),
    ("hydroxyl", "O"),
    ("chloro", "Cl"),
    ("fluoro", "F"),
    ("nitrile", "C#N"),
    ("sulfonamide", "S(=O)(=O)N"),
    ("pyridyl", "c1ccncc1"),
    ("amide", "C(=O)N"),
    ("methoxy", "OC"),
    ("cyclohexyl", "C1CCCCC1"),
)


class SyntheticError(ValueError):
    pass


@dataclass
class SyntheticSpec:
    n_compounds: int = 500
    start: str = "1980-01"
    end: str = "2015-12"
    drift_point: str = "2008-10"
    drift_strength: float = 0.5  # 0 = no drift, 1 = drifting motifs flip sign
    drifting_motifs: tuple[str, ...] = ("phenyl", "carboxyl", "amine", "chloro", "sulfonamide", "pyridyl")
    motifs_per_compound: tuple[int, int] = (2, 6)
    label_noise: float = 0.5
    positive_fraction: float = 0.35
    n_noise_features: int = 8
    n_proteins: int = 60
    n_informative_proteins: int = 15
    leak_rate: float = 1.0  # share of informative proteins published right after approval
    leak_lag_months: tuple[int, int] = (0, 24)
    background_lag_months: tuple[int, int] = (-120, 360)
    shuffle_publication_dates: bool = False
    seed: int = 0

    def validate(self) -> None:
        errors = []
        start, end, drift = (MonthDate.parse(x) for x in (self.start, self.end, self.drift_point))
        if not start < drift <= end:
            errors.append("drift_point must lie inside the timeline")
        for name in ("drift_strength", "leak_rate", "positive_fraction"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                errors.append(f"{name} must lie in [0, 1]")
        if self.n_compounds < 20:
            errors.append("n_compounds must be at least 20")
        if not 0 < self.n_informative_proteins <= self.n_proteins:
            errors.append("n_informative_proteins must lie in [1, n_proteins]")
        lo, hi = self.motifs_per_compound
        if not 1 <= lo <= hi:
            errors.append("motifs_per_compound must be an increasing pair >= 1")
        known = {name for name, _ in MOTIFS}
        unknown = set(self.drifting_motifs) - known
        if unknown:
            errors.append(f"unknown motifs: {sorted(unknown)}")
        if errors:
            raise SyntheticError("; ".join(errors))

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        d = dict(d)
        for key in ("drifting_motifs", "motifs_per_compound", "leak_lag_months", "background_lag_months"):
            if key in d:
                d[key] = tuple(d[key])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise SyntheticError(f"unknown synthetic spec fields: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SyntheticData:
    spec: SyntheticSpec
    tables: dict[str, FeatureTable]
    labels: LabelTable
    registry: list[CompoundRecord]
    approvals: dict[str, MonthDate]
    publications: dict[tuple[str, str], MonthDate]
    informative_proteins: list[str] = field(default_factory=list)

    def bundle(self) -> DatasetBundle:
        return intersect_compounds(list(self.tables.values()), self.labels, self.registry)


def _smiles_from_motifs(chosen: list[int]) -> str:
    parts = [f"C({MOTIFS[m][1]})" for m in chosen]
    return "".join(parts)


def descriptor_row(smiles: str) -> list[float]:
    mol = parse_smiles(smiles)
    elements = [a.element for a in mol.atoms]
    orders = [b.order for b in mol.bonds]
    return [
        float(len(mol.atoms)),
        *(float(elements.count(e)) for e in ("C", "N", "O", "S", "F", "Cl")),
        float(sum(a.aromatic for a in mol.atoms)),
        float(sum(mol.ring_atoms)),
        float(orders.count(BondOrder.DOUBLE)),
        float(orders.count(BondOrder.TRIPLE)),
        float(sum(mol.hydrogens)),
    ]


DESCRIPTOR_NAMES = ("heavy_atoms", "n_C", "n_N", "n_O", "n_S", "n_F", "n_Cl", "aromatic_atoms",
                    "ring_atoms", "double_bonds", "triple_bonds", "hydrogens")


def generate_synthetic(spec: SyntheticSpec) -> SyntheticData:
    spec.validate()
    rng = np.random.default_rng(derive_seed(spec.seed, "synthetic"))
    n = spec.n_compounds
    start, end, drift = (MonthDate.parse(x) for x in (spec.start, spec.end, spec.drift_point))
    ids = [f"C{i:04d}" for i in range(n)]
    months = rng.integers(start.index(), end.index() + 1, size=n)
    dates = [MonthDate.from_index(int(m)) for m in months]

    n_motifs = len(MOTIFS)
    counts = np.zeros((n, n_motifs))
    smiles = []
    lo, hi = spec.motifs_per_compound
    for i in range(n):
        k = int(rng.integers(lo, hi + 1))
        chosen = [int(m) for m in rng.integers(0, n_motifs, size=k)]
        for m in chosen:
            counts[i, m] += 1
        smiles.append(_smiles_from_motifs(chosen))

    motif_names = [name for name, _ in MOTIFS]
    weights = rng.normal(0.0, 1.0, size=n_motifs)
    flip = np.array([name in spec.drifting_motifs for name in motif_names])
    post = weights * np.where(flip, 1.0 - 2.0 * spec.drift_strength, 1.0)
    after = np.array([d >= drift for d in dates])
    centered = counts - counts.mean(axis=0)
    score_drift = np.where(after, centered @ post, centered @ weights)
    score_drift = score_drift + spec.label_noise * rng.normal(size=n)
    score_stable = centered @ rng.normal(0.0, 1.0, size=n_motifs) + spec.label_noise * rng.normal(size=n)
    y_drift = (score_drift > np.quantile(score_drift, 1 - spec.positive_fraction)).astype(float)
    y_stable = (score_stable > np.quantile(score_stable, 1 - spec.positive_fraction)).astype(float)
    labels = LabelTable(tuple(ids), ("ae_drift", "ae_stable"), np.column_stack([y_drift, y_stable]))

    noise = rng.normal(size=(n, spec.n_noise_features)) + 5.0
    fragments = FeatureTable(
        "fragments", tuple(ids),
        tuple(motif_names) + tuple(f"noise_{j}" for j in range(spec.n_noise_features)),
        np.hstack([counts, noise]),
    )
    descriptors = FeatureTable("descriptors", tuple(ids), DESCRIPTOR_NAMES,
                               np.array([descriptor_row(s) for s in smiles]))

    proteins = [f"P{j:03d}" for j in range(spec.n_proteins)]
    informative = proteins[: spec.n_informative_proteins]
    n_leaky = int(round(spec.leak_rate * len(informative)))
    leaky = set(informative[:n_leaky])
    p_interact = np.full((n, spec.n_proteins), 0.2)
    p_interact[:, : spec.n_informative_proteins] = np.where(y_drift[:, None] == 1, 0.3, 0.15)
    interactions = (rng.random((n, spec.n_proteins)) < p_interact).astype(float)
    knowledge = FeatureTable("knowledge", tuple(ids), tuple(proteins), interactions)

    approvals = dict(zip(ids, dates))
    publications: dict[tuple[str, str], MonthDate] = {}
    for i, cid in enumerate(ids):
        for j, pid in enumerate(proteins):
            if not interactions[i, j]:
                continue
            lag_lo, lag_hi = spec.leak_lag_months if pid in leaky else spec.background_lag_months
            lag = int(rng.integers(lag_lo, lag_hi + 1))
            publications[(cid, pid)] = MonthDate.from_index(dates[i].index() + lag)
    if spec.shuffle_publication_dates:
        keys = list(publications)
        values = [publications[k] for k in keys]
        perm = rng.permutation(len(values))
        publications = {k: values[int(p)] for k, p in zip(keys, perm)}

    return SyntheticData(
        spec=spec,
        tables={"fragments": fragments, "descriptors": descriptors, "knowledge": knowledge},
        labels=labels,
        registry=build_registry(ids, approvals, dict(zip(ids, smiles))),
        approvals=approvals,
        publications=publications,
        informative_proteins=informative,
    )


def default_config(spec: SyntheticSpec, seed: int = 0) -> dict:
    """An ``evaluate``-ready run config for files written by ``write_synthetic``."""
    return {
        "inputs": {
            "features": {name: f"features_{name}.csv" for name in ("fragments", "descriptors", "knowledge")},
            "labels": "labels.csv",
            "dates": "dates.csv",
            "smiles": "smiles.csv",
            "synonyms": "synonyms.csv",
            "approvals": "approvals.csv",
            "publications": "publications.csv",
        },
        "split": {
            "methods": ["time", "random"],
            "threshold": spec.drift_point,
            "repetitions": 20,
        },
        "learners": [{"kind": "elastic_net"}],
        "protein_datasets": ["knowledge"],
        "importance": {"dataset": "knowledge", "target": "ae_drift", "learner": {"kind": "elastic_net"}},
        "leakage": {"k": 15, "n_permutations": 100000},
        "chemspace": {"pmfg_max_nodes": 120},
        "seed": seed,
    }


def write_synthetic(data: SyntheticData, outdir) -> dict[str, str]:
    os.makedirs(outdir, exist_ok=True)
    paths = {}

    def path(name: str) -> str:
        p = os.path.join(outdir, name)
        paths[name] = p
        return p

    for name, table in data.tables.items():
        write_feature_table(table, path(f"features_{name}.csv"))
    write_label_table(data.labels, path("labels.csv"))
    ids = data.labels.compound_ids
    with open(path("dates.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["compound_id", "market_date"])
        for rec in data.registry:
            w.writerow([rec.id, str(rec.market_date) if rec.market_date else ""])
    with open(path("smiles.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["compound_id", "smiles"])
        for rec in data.registry:
            w.writerow([rec.id, rec.smiles or ""])
    with open(path("synonyms.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alias", "canonical"])
        for cid in ids:
            w.writerow([cid, cid])
            w.writerow([f"compound-{cid.lower()}", cid])
    with open(path("approvals.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["compound_id", "approval_date"])
        for cid in ids:
            w.writerow([cid, str(data.approvals[cid])])
    with open(path("publications.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["compound_id", "feature_id", "first_pub_date"])
        for (cid, pid), date in sorted(data.publications.items()):
            w.writerow([cid, pid, str(date)])
    with open(path("synthetic_spec.json"), "w", encoding="utf-8") as fh:
        json.dump(data.spec.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(path("config.json"), "w", encoding="utf-8") as fh:
        json.dump(default_config(data.spec, data.spec.seed), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def reference_scale_bundle(seed: int = 0, n_train: int = 361, n_test: int = 90,
                           threshold: MonthDate = MonthDate(1998, 10), test_positives: int = 19,
                           train_positive_ratio: float = 0.25) -> DatasetBundle:
    """``n_train`` compounds marketed before the threshold, ``n_test`` at or
    after it, ``test_positives`` positives among the latter."""
    rng = np.random.default_rng(derive_seed(seed, "reference-scale"))
    n = n_train + n_test
    ids = [f"D{i:04d}" for i in range(n)]
    order = rng.permutation(n)
    t0 = threshold.index()
    dates: dict[str, MonthDate] = {}
    for rank, i in enumerate(order):
        if rank < n_train:
            m = int(rng.integers(t0 - 480, t0))  # up to 40 years before
        else:
            m = int(rng.integers(t0, t0 + 240))
        dates[ids[i]] = MonthDate.from_index(m)
    y = np.zeros(n)
    train_idx = [i for i in order[:n_train]]
    test_idx = [i for i in order[n_train:]]
    y[rng.choice(train_idx, size=int(round(train_positive_ratio * n_train)), replace=False)] = 1
    y[rng.choice(test_idx, size=test_positives, replace=False)] = 1
    table = FeatureTable("features", tuple(ids), ("x0", "x1"), rng.normal(size=(n, 2)))
    labels = LabelTable(tuple(ids), ("hepatobiliary",), y[:, None])
    return intersect_compounds([table], labels, build_registry(ids, dates))
