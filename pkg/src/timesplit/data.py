"""Dataset model and CSV ingestion.

Feature tables, label tables, compound registries (dates and structures) and
synonym maps. All containers are immutable after construction; numeric
matrices are read-only numpy arrays with ``NaN`` as the missing flag.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Iterable, Mapping, Sequence

import numpy as np

PathLike = str | os.PathLike

MISSING_TOKENS = frozenset({"", "NaN", "nan"})


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@total_ordering
@dataclass(frozen=True)
class MonthDate:
    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise DataError(f"month out of range: {self.month}")
        if not 1800 <= self.year <= 2200:
            raise DataError(f"year out of range: {self.year}")

    @classmethod
    def parse(cls, text: str) -> "MonthDate":
        """Parse ``YYYY-MM`` (``YYYY/MM`` is accepted too)."""
        raw = text.strip().replace("/", "-")
        parts = raw.split("-")
        if len(parts) < 2 or not parts[0].isdigit() or not parts[1].isdigit():
            raise DataError(f"invalid month date: {text!r}")
        return cls(int(parts[0]), int(parts[1]))

    @classmethod
    def from_index(cls, index: int) -> "MonthDate":
        return cls(index // 12, index % 12 + 1)

    def index(self) -> int:
        """Months since year 0; differences give signed month lags."""
        return self.year * 12 + self.month - 1

    def __lt__(self, other: "MonthDate") -> bool:
        if not isinstance(other, MonthDate):
            return NotImplemented
        return (self.year, self.month) < (other.year, other.month)

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


@dataclass(frozen=True)
class CompoundRecord:
    id: str
    canonical_name: str
    smiles: str | None = None
    market_date: MonthDate | None = None

    def __post_init__(self):
        if not self.canonical_name:
            raise DataError(f"compound {self.id!r} has an empty canonical name")


def _readonly(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


def _check_unique(items: Sequence[str], what: str) -> None:
    seen: set[str] = set()
    for item in items:
        if item in seen:
            raise DataError(f"duplicate {what}: {item!r}")
        seen.add(item)


@dataclass(frozen=True, eq=False)
class FeatureTable:
    dataset_name: str
    compound_ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "compound_ids", tuple(self.compound_ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "values", _readonly(self.values))
        _check_unique(self.compound_ids, "compound id")
        _check_unique(self.feature_names, "feature name")
        if self.values.ndim != 2 or self.values.shape != (len(self.compound_ids), len(self.feature_names)):
            raise DataError(
                f"value matrix shape {self.values.shape} does not match "
                f"{len(self.compound_ids)} ids x {len(self.feature_names)} features"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def qualified_names(self) -> tuple[str, ...]:
        """Feature names namespaced as ``<dataset>:<feature>``."""
        return tuple(f"{self.dataset_name}:{name}" for name in self.feature_names)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureTable):
            return NotImplemented
        return (
            self.dataset_name == other.dataset_name
            and self.compound_ids == other.compound_ids
            and self.feature_names == other.feature_names
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    def take_rows(self, ids: Sequence[str]) -> "FeatureTable":
        pos = {cid: i for i, cid in enumerate(self.compound_ids)}
        try:
            rows = [pos[cid] for cid in ids]
        except KeyError as exc:
            raise DataError(f"compound {exc.args[0]!r} not in table {self.dataset_name!r}") from None
        return FeatureTable(self.dataset_name, tuple(ids), self.feature_names, self.values[rows])

    def take_columns(self, columns: Sequence[int]) -> "FeatureTable":
        columns = list(columns)
        return FeatureTable(
            self.dataset_name,
            self.compound_ids,
            tuple(self.feature_names[j] for j in columns),
            self.values[:, columns].reshape(len(self.compound_ids), len(columns)),
        )

    def rename(self, dataset_name: str) -> "FeatureTable":
        return FeatureTable(dataset_name, self.compound_ids, self.feature_names, self.values)

    def matrix(self, ids: Sequence[str]) -> np.ndarray:
        return self.take_rows(ids).values


@dataclass(frozen=True, eq=False)
class LabelTable:
    compound_ids: tuple[str, ...]
    target_names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "compound_ids", tuple(self.compound_ids))
        object.__setattr__(self, "target_names", tuple(self.target_names))
        object.__setattr__(self, "values", _readonly(self.values))
        _check_unique(self.compound_ids, "compound id")
        _check_unique(self.target_names, "target name")
        if self.values.shape != (len(self.compound_ids), len(self.target_names)):
            raise DataError("label matrix shape does not match ids x targets")
        present = self.values[~np.isnan(self.values)]
        if not np.all((present == 0) | (present == 1)):
            raise DataError("labels must be 0, 1 or missing")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelTable):
            return NotImplemented
        return (
            self.compound_ids == other.compound_ids
            and self.target_names == other.target_names
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    def positive_ratios(self) -> np.ndarray:
        present = ~np.isnan(self.values)
        counts = present.sum(axis=0)
        positives = np.where(present, self.values, 0.0).sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(counts > 0, positives / np.maximum(counts, 1), np.nan)

    def column(self, target: str) -> np.ndarray:
        try:
            j = self.target_names.index(target)
        except ValueError:
            raise DataError(f"unknown target {target!r}") from None
        return self.values[:, j]

    def labels_for(self, target: str, ids: Sequence[str]) -> np.ndarray:
        pos = {cid: i for i, cid in enumerate(self.compound_ids)}
        col = self.column(target)
        return np.array([col[pos[cid]] for cid in ids], dtype=float)

    def take_rows(self, ids: Sequence[str]) -> "LabelTable":
        pos = {cid: i for i, cid in enumerate(self.compound_ids)}
        rows = [pos[cid] for cid in ids]
        return LabelTable(tuple(ids), self.target_names, self.values[rows])

    def take_targets(self, targets: Sequence[str]) -> "LabelTable":
        cols = [self.target_names.index(t) for t in targets]
        return LabelTable(
            self.compound_ids, tuple(targets), self.values[:, cols].reshape(len(self.compound_ids), len(cols))
        )


class SynonymMap:
    """Case-insensitive alias -> canonical name lookup."""

    def __init__(self, pairs: Iterable[tuple[str, str]] = ()):
        self._map: dict[str, str] = {}
        for alias, canonical in pairs:
            self.add(alias, canonical)

    def add(self, alias: str, canonical: str) -> None:
        key = alias.strip().casefold()
        canonical = canonical.strip()
        if not canonical:
            raise DataError(f"empty canonical name for alias {alias!r}")
        previous = self._map.get(key)
        if previous is not None and previous != canonical:
            raise DataError(f"alias {alias!r} maps to both {previous!r} and {canonical!r}")
        self._map[key] = canonical

    def get(self, name: str) -> str | None:
        return self._map.get(name.strip().casefold())

    def __len__(self) -> int:
        return len(self._map)

    def __contains__(self, name: str) -> bool:
        return self.get(name) is not None


@dataclass(frozen=True)
class DatasetBundle:
    """Feature tables, labels and registry aligned on one sorted id list."""

    compound_ids: tuple[str, ...]
    tables: Mapping[str, FeatureTable]
    labels: LabelTable | None = None
    records: Mapping[str, CompoundRecord] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.compound_ids)

    def market_date(self, cid: str) -> MonthDate | None:
        rec = self.records.get(cid)
        return rec.market_date if rec is not None else None


# --------------------------------------------------------------------------
# CSV ingestion


def _read_rows(path: PathLike) -> tuple[list[str], list[list[str]]]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {os.fspath(path)}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{os.fspath(path)}: empty file") from None
        rows = [row for row in reader if row]
    if header and header[0].startswith("﻿"):
        header[0] = header[0][1:]
    return header, rows


def _parse_cell(text: str, row: int, column: str, path: PathLike) -> float:
    text = text.strip()
    if text in MISSING_TOKENS:
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise DataError(
            f"{os.fspath(path)}: non-numeric value {text!r} at row {row}, column {column!r}"
        ) from None


def _numeric_table(path: PathLike, kind: str) -> tuple[list[str], list[str], np.ndarray]:
    header, rows = _read_rows(path)
    if not header or header[0].strip() != "compound_id":
        raise DataError(f"{os.fspath(path)}: first column header must be 'compound_id'")
    names = [h.strip() for h in header[1:]]
    seen: set[str] = set()
    for name in names:
        if name in seen:
            raise DataError(f"{os.fspath(path)}: duplicate {kind} name {name!r}")
        seen.add(name)
    ids: list[str] = []
    seen_ids: set[str] = set()
    values = np.empty((len(rows), len(names)))
    for r, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise DataError(f"{os.fspath(path)}: row {r} has {len(row)} cells, expected {len(header)}")
        cid = row[0].strip()
        if cid in seen_ids:
            raise DataError(f"{os.fspath(path)}: duplicate compound id {cid!r}")
        seen_ids.add(cid)
        ids.append(cid)
        for j, cell in enumerate(row[1:]):
            values[r - 2, j] = _parse_cell(cell, r, names[j], path)
    return ids, names, values


def load_feature_table(path: PathLike, dataset_name: str) -> FeatureTable:
    ids, names, values = _numeric_table(path, "feature")
    return FeatureTable(dataset_name, tuple(ids), tuple(names), values)


def load_label_table(path: PathLike) -> LabelTable:
    ids, names, values = _numeric_table(path, "target")
    return LabelTable(tuple(ids), tuple(names), values)


def _two_column(path: PathLike, expected: tuple[str, ...]) -> list[list[str]]:
    header, rows = _read_rows(path)
    got = tuple(h.strip() for h in header[: len(expected)])
    if got != expected:
        raise DataError(f"{os.fspath(path)}: expected header {','.join(expected)}, got {','.join(header)}")
    out = []
    for r, row in enumerate(rows, start=2):
        if len(row) < len(expected):
            raise DataError(f"{os.fspath(path)}: row {r} is short")
        out.append([c.strip() for c in row[: len(expected)]])
    return out


def load_dates(path: PathLike) -> dict[str, MonthDate | None]:
    """``dates.csv`` -> id -> market date (``None`` where the cell is empty)."""
    out: dict[str, MonthDate | None] = {}
    for cid, text in _two_column(path, ("compound_id", "market_date")):
        if cid in out:
            raise DataError(f"{os.fspath(path)}: duplicate compound id {cid!r}")
        out[cid] = None if text in MISSING_TOKENS else MonthDate.parse(text)
    return out


def load_smiles(path: PathLike) -> dict[str, str]:
    out: dict[str, str] = {}
    for cid, smi in _two_column(path, ("compound_id", "smiles")):
        if cid in out:
            raise DataError(f"{os.fspath(path)}: duplicate compound id {cid!r}")
        if smi:
            out[cid] = smi
    return out


def load_synonyms(path: PathLike) -> SynonymMap:
    return SynonymMap((alias, canonical) for alias, canonical in _two_column(path, ("alias", "canonical")))


def build_registry(
    ids: Iterable[str],
    dates: Mapping[str, MonthDate | None] | None = None,
    smiles: Mapping[str, str] | None = None,
) -> list[CompoundRecord]:
    dates = dates or {}
    smiles = smiles or {}
    return [CompoundRecord(cid, cid, smiles.get(cid), dates.get(cid)) for cid in ids]


def format_float(x: float) -> str:
    """17 significant digits; empty string for missing."""
    if math.isnan(x):
        return ""
    return f"{x:.17g}"


def write_feature_table(table: FeatureTable, path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["compound_id", *table.feature_names])
        for cid, row in zip(table.compound_ids, table.values):
            writer.writerow([cid, *(format_float(v) for v in row)])


def write_label_table(labels: LabelTable, path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["compound_id", *labels.target_names])
        for cid, row in zip(labels.compound_ids, labels.values):
            writer.writerow([cid, *("" if math.isnan(v) else str(int(v)) for v in row)])


# --------------------------------------------------------------------------
# Name normalization, intersection, target filtering


def normalize_names(names: Sequence[str], synonyms: SynonymMap) -> tuple[list[str | None], list[str]]:
    """Map raw names to canonical names.

    Returns the mapped list (``None`` where no mapping exists) and the list of
    excluded raw names, in input order.
    """
    mapped: list[str | None] = []
    excluded: list[str] = []
    for name in names:
        canonical = synonyms.get(name)
        mapped.append(canonical)
        if canonical is None:
            excluded.append(name)
    return mapped, excluded


def normalize_table_ids(table: FeatureTable, synonyms: SynonymMap) -> tuple[FeatureTable, list[str]]:
    """Rewrite a table's ids through ``synonyms``, dropping unmapped rows."""
    mapped, excluded = normalize_names(table.compound_ids, synonyms)
    keep = [i for i, m in enumerate(mapped) if m is not None]
    new_ids = [mapped[i] for i in keep]
    if len(set(new_ids)) != len(new_ids):
        dup = next(n for n in new_ids if new_ids.count(n) > 1)
        raise DataError(f"{table.dataset_name}: several rows normalize to {dup!r}")
    return FeatureTable(table.dataset_name, tuple(new_ids), table.feature_names, table.values[keep]), excluded


def intersect_compounds(
    tables: Sequence[FeatureTable],
    labels: LabelTable | None = None,
    registry: Sequence[CompoundRecord] | None = None,
) -> DatasetBundle:
    """Restrict everything to the compounds present in every input."""
    if not tables:
        raise DataError("intersect_compounds needs at least one feature table")
    names = [t.dataset_name for t in tables]
    if len(set(names)) != len(names):
        raise DataError("feature tables must have distinct dataset names")
    shared = set(tables[0].compound_ids)
    for t in tables[1:]:
        shared &= set(t.compound_ids)
    if labels is not None:
        shared &= set(labels.compound_ids)
    records = {}
    if registry is not None:
        records = {r.id: r for r in registry}
        if len(records) != len(registry):
            raise DataError("duplicate compound id in registry")
        shared &= set(records)
    if not shared:
        raise DataError("no compound is common to all inputs")
    ids = tuple(sorted(shared))
    return DatasetBundle(
        compound_ids=ids,
        tables={t.dataset_name: t.take_rows(ids) for t in tables},
        labels=labels.take_rows(ids) if labels is not None else None,
        records={cid: records[cid] for cid in ids} if registry is not None else {},
    )


def filter_targets_by_positive_ratio(labels: LabelTable, low: float = 0.2, high: float = 0.8) -> LabelTable:
    """Keep targets whose positive ratio lies in ``[low, high]`` (inclusive)."""
    if not 0 <= low < high <= 1:
        raise ValueError("need 0 <= low < high <= 1")
    ratios = labels.positive_ratios()
    keep = [t for t, r in zip(labels.target_names, ratios) if not np.isnan(r) and low <= r <= high]
    return labels.take_targets(keep)
