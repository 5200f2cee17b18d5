"""Config-driven orchestration behind the command-line interface.

A run config is one JSON document. Relative input paths resolve against the
config file's directory. Every run writes ``effective_config.json`` (absolute
paths, all defaults filled in) next to its reports, and re-running that file
reproduces the reports.
"""

from __future__ import annotations

import copy
import csv
import json
import logging
import os
from dataclasses import dataclass
from typing import Any

import numpy as np

from .chem.fingerprint import morgan_fingerprint
from .chem.network import all_pairs_shortest_paths, pmfg_construct
from .chem.smiles import SmilesError, parse_smiles
from .chem.space import (
    correlation_distance_matrix,
    group_pairwise,
    histogram_rows,
    pca_embed,
    row_correlation,
    summarize,
    tanimoto_matrix,
    zscore_fill,
)
from .data import (
    DataError,
    DatasetBundle,
    FeatureTable,
    LabelTable,
    MonthDate,
    build_registry,
    filter_targets_by_positive_ratio,
    intersect_compounds,
    load_dates,
    load_feature_table,
    load_label_table,
    load_smiles,
    load_synonyms,
    normalize_names,
    normalize_table_ids,
)
from .evaluation import (
    build_comparison_report,
    concatenate_datasets,
    ensemble_records,
    run_grid,
    write_records_jsonl,
)
from .features import FilterReport, apply_filter_pipeline
from .importance import ImportanceReport, permutation_importance
from .leakage import compute_time_lags, feature_mean_lags, load_approvals, load_publications, top_feature_lag_test
from .learners import DEFAULT_HYPERPARAMETERS, LearnerError, LearnerSpec
from .rng import Xoshiro256, derive_seed
from .splits import SplitPlan, random_split, time_split

logger = logging.getLogger(__name__)

DEFAULT_CONFIG: dict[str, Any] = {
    "inputs": {
        "features": {},
        "labels": None,
        "dates": None,
        "smiles": None,
        "synonyms": None,
        "approvals": None,
        "publications": None,
    },
    "filter": {"cv_threshold": 0.05, "r2_threshold": 0.85, "positive_ratio_low": 0.2, "positive_ratio_high": 0.8},
    "split": {
        "methods": ["time", "random"],
        "threshold": "1998-10",
        "n_train": None,
        "n_test": None,
        "repetitions": 20,
        "fixed_test_positive_count": None,
        "fixed_positive_target": None,
        "k_folds": 5,
    },
    "learners": [{"kind": "elastic_net"}],
    "targets": None,
    "concatenate": False,
    "ensemble": False,
    "protein_datasets": [],
    "pairing": "cell",
    "importance": {
        "dataset": None,
        "target": None,
        "learner": {"kind": "elastic_net"},
        "split": "time",
        "n_folds": 4,
        "n_shuffles": 25,
        "top_n": 20,
    },
    "leakage": {"k": 15, "n_permutations": 100_000, "restrict_to": "test"},
    "chemspace": {"radius": 2, "n_bits": 2048, "n_components": 2, "pmfg_max_nodes": 200, "bins": 40},
    "seed": None,
    "output_dir": None,
}

_PATH_KEYS = ("labels", "dates", "smiles", "synonyms", "approvals", "publications")


class ConfigError(ValueError):
    def __init__(self, messages: list[str]):
        super().__init__("; ".join(messages))
        self.messages = messages


def _merge(base: dict, override: dict, prefix: str, errors: list[str]) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            errors.append(f"unknown config key {prefix}{key}")
            continue
        if isinstance(base[key], dict) and key != "features":
            if not isinstance(value, dict):
                errors.append(f"{prefix}{key} must be an object")
                continue
            out[key] = _merge(base[key], value, f"{prefix}{key}.", errors)
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve_config(raw: dict, base_dir: str = ".", seed: int | None = None, output_dir: str | None = None,
                   require: tuple[str, ...] = ()) -> dict:
    """Merge defaults, resolve paths and validate; every problem is reported at once."""
    errors: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a JSON object"])
    cfg = _merge(DEFAULT_CONFIG, raw, "", errors)
    if seed is not None:
        cfg["seed"] = seed
    if output_dir is not None:
        cfg["output_dir"] = output_dir
    inputs = cfg["inputs"]

    def absolute(p: str) -> str:
        return os.path.abspath(os.path.join(base_dir, p))

    if not isinstance(inputs["features"], dict) or not inputs["features"]:
        errors.append("inputs.features must map dataset names to CSV paths")
    else:
        inputs["features"] = {name: absolute(p) for name, p in inputs["features"].items()}
        for name, p in inputs["features"].items():
            if not os.path.isfile(p):
                errors.append(f"missing input file: {p}")
    for key in _PATH_KEYS:
        if inputs[key] is not None:
            inputs[key] = absolute(inputs[key])
            if not os.path.isfile(inputs[key]):
                errors.append(f"missing input file: {inputs[key]}")
    for key in require:
        if inputs.get(key) is None:
            errors.append(f"inputs.{key} is required for this command")

    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool) or cfg["seed"] < 0:
        errors.append("seed must be a non-negative integer (set it in the config or with --seed)")
    if cfg["output_dir"] is None:
        errors.append("output_dir is not set (use --out)")
    else:
        cfg["output_dir"] = os.path.abspath(cfg["output_dir"])

    f = cfg["filter"]
    if not 0 <= f["positive_ratio_low"] < f["positive_ratio_high"] <= 1:
        errors.append("filter.positive_ratio_low/high must satisfy 0 <= low < high <= 1")
    if not 0 <= f["r2_threshold"] <= 1:
        errors.append("filter.r2_threshold must lie in [0, 1]")
    if f["cv_threshold"] < 0:
        errors.append("filter.cv_threshold must be non-negative")

    s = cfg["split"]
    methods = s["methods"]
    if not methods or any(m not in ("time", "random") for m in methods):
        errors.append("split.methods must be a non-empty subset of ['time', 'random']")
    try:
        MonthDate.parse(str(s["threshold"]))
    except (DataError, ValueError) as exc:
        errors.append(f"split.threshold: {exc}")
    if not isinstance(s["repetitions"], int) or s["repetitions"] < 1:
        errors.append("split.repetitions must be a positive integer")
    if not isinstance(s["k_folds"], int) or s["k_folds"] < 2:
        errors.append("split.k_folds must be an integer >= 2")
    if s["fixed_test_positive_count"] is not None and not s["fixed_positive_target"]:
        errors.append("split.fixed_positive_target is required with fixed_test_positive_count")

    if not cfg["learners"]:
        errors.append("learners must list at least one learner")
    for i, spec in enumerate(cfg["learners"]):
        try:
            learner_from_config(spec)
        except (LearnerError, TypeError, KeyError) as exc:
            errors.append(f"learners[{i}]: {exc}")
    kinds = [sp.get("kind") for sp in cfg["learners"] if isinstance(sp, dict)]
    if len(set(kinds)) != len(kinds):
        errors.append("learners must have distinct kinds")
    try:
        learner_from_config(cfg["importance"]["learner"])
    except (LearnerError, TypeError, KeyError) as exc:
        errors.append(f"importance.learner: {exc}")
    if cfg["pairing"] not in ("cell", "repetition"):
        errors.append("pairing must be 'cell' or 'repetition'")
    if cfg["importance"]["split"] not in ("time", "random"):
        errors.append("importance.split must be 'time' or 'random'")
    if cfg["leakage"]["restrict_to"] not in ("test", "all"):
        errors.append("leakage.restrict_to must be 'test' or 'all'")
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path: str, seed: int | None = None, output_dir: str | None = None,
                require: tuple[str, ...] = ()) -> dict:
    if not os.path.isfile(path):
        raise ConfigError([f"missing config file: {os.path.abspath(path)}"])
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config is not valid JSON: {exc}"]) from None
    return resolve_config(raw, os.path.dirname(os.path.abspath(path)), seed, output_dir, require)


def learner_from_config(spec: dict) -> LearnerSpec:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise LearnerError("learner entries need a 'kind'")
    extra = set(spec) - {"kind", "hyperparameters"}
    if extra:
        raise LearnerError(f"unknown learner keys {sorted(extra)}")
    if spec["kind"] not in DEFAULT_HYPERPARAMETERS:
        raise LearnerError(f"unknown learner kind {spec['kind']!r}")
    return LearnerSpec(spec["kind"], dict(spec.get("hyperparameters") or {}))


def _dump_json(obj, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _write_text(text: str, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# shared preparation


@dataclass
class Prepared:
    bundle: DatasetBundle
    tables: dict[str, FeatureTable]  # filtered, in config order
    filter_reports: dict[str, FilterReport]
    targets: list[str]
    excluded_names: dict[str, list[str]]


def prepare(cfg: dict) -> Prepared:
    inputs = cfg["inputs"]
    synonyms = load_synonyms(inputs["synonyms"]) if inputs["synonyms"] else None
    tables, excluded = [], {}
    for name, path in inputs["features"].items():
        t = load_feature_table(path, name)
        if synonyms is not None:
            t, dropped = normalize_table_ids(t, synonyms)
            excluded[name] = dropped
        tables.append(t)
    labels = load_label_table(inputs["labels"]) if inputs["labels"] else None
    if labels is not None and synonyms is not None:
        mapped, dropped = normalize_names(labels.compound_ids, synonyms)
        keep = [i for i, m in enumerate(mapped) if m is not None]
        if len({mapped[i] for i in keep}) != len(keep):
            raise DataError("labels: two rows map to the same canonical compound")
        labels = LabelTable(tuple(mapped[i] for i in keep), labels.target_names, labels.values[keep])
        excluded["labels"] = dropped
    dates = load_dates(inputs["dates"]) if inputs["dates"] else {}
    smiles = load_smiles(inputs["smiles"]) if inputs["smiles"] else {}
    ids = set().union(*(t.compound_ids for t in tables))
    registry = build_registry(sorted(ids), dates, smiles)
    bundle = intersect_compounds(tables, labels, registry)
    f = cfg["filter"]
    targets: list[str] = []
    if bundle.labels is not None:
        kept = filter_targets_by_positive_ratio(bundle.labels, f["positive_ratio_low"], f["positive_ratio_high"])
        wanted = cfg["targets"] if cfg["targets"] is not None else list(bundle.labels.target_names)
        for t in wanted:
            if t not in bundle.labels.target_names:
                raise DataError(f"unknown target {t!r}")
            if t in kept.target_names:
                targets.append(t)
            else:
                logger.warning("target %s dropped by the positive-ratio filter", t)
    filtered, reports = {}, {}
    for name, table in bundle.tables.items():
        ft, rep = apply_filter_pipeline(table, f["cv_threshold"], f["r2_threshold"])
        filtered[name] = ft
        reports[name] = rep
    return Prepared(bundle, filtered, reports, targets, excluded)


def make_plans(cfg: dict, bundle: DatasetBundle) -> dict[str, SplitPlan | list[SplitPlan]]:
    s = cfg["split"]
    threshold = MonthDate.parse(str(s["threshold"]))
    plans: dict[str, SplitPlan | list[SplitPlan]] = {}
    n_train, n_test = s["n_train"], s["n_test"]
    if "time" in s["methods"] or n_train is None or n_test is None:
        tp = time_split(bundle, threshold)
        if "time" in s["methods"]:
            plans["time"] = tp
        if n_train is None or n_test is None:
            n_train, n_test = len(tp.train_ids), len(tp.test_ids)
    if "random" in s["methods"]:
        plans["random"] = [
            random_split(bundle, n_train, n_test, derive_seed(cfg["seed"], "random-split", i),
                         s["fixed_test_positive_count"], s["fixed_positive_target"])
            for i in range(s["repetitions"])
        ]
    return plans


# --------------------------------------------------------------------------
# commands


def run_evaluate(cfg: dict, jobs: int = 1) -> dict[str, str]:
    out = cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    prep = prepare(cfg)
    if prep.bundle.labels is None:
        raise DataError("evaluate needs inputs.labels")
    tables = list(prep.tables.values())
    if cfg["concatenate"] and len(tables) > 1:
        tables.append(concatenate_datasets(tables, "concat"))
    plans = make_plans(cfg, prep.bundle)
    learners = [learner_from_config(sp) for sp in cfg["learners"]]
    records = run_grid(prep.bundle, tables, learners, prep.targets, plans,
                       cfg["split"]["repetitions"], cfg["seed"], cfg["split"]["k_folds"], jobs)
    if cfg["ensemble"] and len(prep.tables) > 1:
        base = [r for r in records if r.dataset in prep.tables]
        records = records + ensemble_records(base, prep.bundle.labels, "ensemble")
    report = build_comparison_report(records, cfg["protein_datasets"], "roc_auc", cfg["pairing"])
    paths = {
        "records": os.path.join(out, "records.jsonl"),
        "comparison_json": os.path.join(out, "comparison.json"),
        "comparison_csv": os.path.join(out, "comparison.csv"),
        "filters": os.path.join(out, "filters.json"),
        "splits": os.path.join(out, "splits.json"),
        "effective_config": os.path.join(out, "effective_config.json"),
    }
    write_records_jsonl(records, paths["records"])
    _write_text(report.to_json() + "\n", paths["comparison_json"])
    _write_text(report.to_csv(), paths["comparison_csv"])
    _dump_json({name: rep.to_dict() for name, rep in prep.filter_reports.items()}, paths["filters"])
    _dump_json({label: ([p.to_dict() for p in v] if isinstance(v, list) else v.to_dict())
                for label, v in plans.items()}, paths["splits"])
    _dump_json(cfg, paths["effective_config"])
    return paths


def _importance_inputs(cfg: dict, prep: Prepared):
    icfg = cfg["importance"]
    name = icfg["dataset"] or next(iter(prep.tables))
    if name == "concat":
        table = concatenate_datasets(list(prep.tables.values()), "concat")
    elif name in prep.tables:
        table = prep.tables[name]
    else:
        raise DataError(f"importance.dataset {name!r} is not an input dataset")
    target = icfg["target"] or (prep.targets[0] if prep.targets else None)
    if target is None:
        raise DataError("no target available for importance")
    if icfg["split"] == "time":
        plan = time_split(prep.bundle, MonthDate.parse(str(cfg["split"]["threshold"])))
    else:
        plan = make_plans({**cfg, "split": {**cfg["split"], "methods": ["random"], "repetitions": 1}},
                          prep.bundle)["random"][0]
    labels = prep.bundle.labels
    tr = [c for c in plan.train_ids if not np.isnan(labels.labels_for(target, [c])[0])]
    te = [c for c in plan.test_ids if not np.isnan(labels.labels_for(target, [c])[0])]
    return table, target, plan, tr, te


def compute_importance(cfg: dict, prep: Prepared) -> tuple[ImportanceReport, SplitPlan, str, str]:
    icfg = cfg["importance"]
    table, target, plan, tr, te = _importance_inputs(cfg, prep)
    labels = prep.bundle.labels
    report = permutation_importance(
        learner_from_config(icfg["learner"]),
        table.matrix(tr), labels.labels_for(target, tr),
        table.matrix(te), labels.labels_for(target, te),
        table.feature_names, icfg["n_folds"], icfg["n_shuffles"],
        derive_seed(cfg["seed"], "importance"),
    )
    return report, plan, table.dataset_name, target


def run_importance(cfg: dict, jobs: int = 1) -> dict[str, str]:
    out = cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    prep = prepare(cfg)
    report, plan, dataset, target = compute_importance(cfg, prep)
    paths = {
        "importance_csv": os.path.join(out, "importance.csv"),
        "importance_json": os.path.join(out, "importance.json"),
        "effective_config": os.path.join(out, "effective_config.json"),
    }
    _write_text(report.to_csv(), paths["importance_csv"])
    doc = report.to_dict()
    doc.update({"dataset": dataset, "target": target, "split": plan.descriptor(),
                "top": [{"feature": f, "importance": v} for f, v in report.ranked(cfg["importance"]["top_n"])]})
    _dump_json(doc, paths["importance_json"])
    _dump_json(cfg, paths["effective_config"])
    return paths


def run_leakage(cfg: dict, jobs: int = 1) -> dict[str, str]:
    out = cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    prep = prepare(cfg)
    report, plan, dataset, target = compute_importance(cfg, prep)
    approvals = load_approvals(cfg["inputs"]["approvals"])
    publications = load_publications(cfg["inputs"]["publications"])
    restrict = plan.test_ids if cfg["leakage"]["restrict_to"] == "test" else None
    lags = compute_time_lags(approvals, publications, restrict)
    ranked = [f for f, _ in report.ranked()]
    lcfg = cfg["leakage"]
    result = top_feature_lag_test(lags, ranked, lcfg["k"], lcfg["n_permutations"],
                                  derive_seed(cfg["seed"], "leakage"), jobs)
    paths = {
        "leakage": os.path.join(out, "leakage.json"),
        "feature_lags": os.path.join(out, "feature_lags.csv"),
        "importance_csv": os.path.join(out, "importance.csv"),
        "effective_config": os.path.join(out, "effective_config.json"),
    }
    doc = result.to_dict()
    doc.update({"dataset": dataset, "target": target, "split": plan.descriptor(),
                "n_lag_pairs": len(lags.lags), "skipped_pairs": lags.skipped})
    _dump_json(doc, paths["leakage"])
    means = feature_mean_lags(lags)
    importance = dict(report.importances)
    with open(paths["feature_lags"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "mean_lag_months", "n_pairs", "importance"])
        by = lags.by_feature()
        for f in sorted(means):
            w.writerow([f, repr(means[f]), len(by[f]), repr(importance[f]) if f in importance else ""])
    _write_text(report.to_csv(), paths["importance_csv"])
    _dump_json(cfg, paths["effective_config"])
    return paths


def run_chemspace(cfg: dict, jobs: int = 1) -> dict[str, str]:
    out = os.path.join(cfg["output_dir"], "chemspace")
    os.makedirs(out, exist_ok=True)
    ccfg = cfg["chemspace"]
    prep = prepare(cfg)
    ids = list(prep.bundle.compound_ids)
    table = concatenate_datasets(list(prep.tables.values()), "all")
    Z = zscore_fill(table.values)
    threshold = MonthDate.parse(str(cfg["split"]["threshold"]))
    dated = [prep.bundle.market_date(c) for c in ids]
    if any(d is None for d in dated):
        raise DataError("chemspace groups compounds by market date; some dates are missing")
    is_test = np.array([not d < threshold for d in dated])
    bins = int(ccfg["bins"])
    summary: dict[str, Any] = {"n_compounds": len(ids), "n_test": int(is_test.sum()),
                               "threshold": str(threshold), "n_features": table.shape[1]}
    paths = {}

    pca = pca_embed(Z, min(ccfg["n_components"], *Z.shape))
    paths["pca"] = os.path.join(out, "pca_scores.csv")
    with open(paths["pca"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["compound_id", "group", *[f"pc{i + 1}" for i in range(pca.scores.shape[1])]])
        for cid, t, row in zip(ids, is_test, pca.scores):
            w.writerow([cid, "test" if t else "train", *(repr(float(v)) for v in row)])
    summary["pca_explained_fraction"] = [float(v) for v in pca.explained_fraction]
    summary["pca_degenerate"] = pca.degenerate

    dist = correlation_distance_matrix(Z)
    groups = group_pairwise(dist.distances, is_test)
    paths["correlation_distance"] = os.path.join(out, "correlation_distance_hist.csv")
    _write_hist(histogram_rows(groups, np.linspace(0.0, 2.0, bins + 1)), paths["correlation_distance"])
    summary["correlation_distance"] = summarize(groups)
    summary["constant_rows"] = len(dist.constant_rows)

    smiles = {c: prep.bundle.records[c].smiles for c in ids}
    if all(smiles.values()):
        fps, bad = [], []
        for c in ids:
            try:
                fps.append(morgan_fingerprint(parse_smiles(smiles[c]), ccfg["radius"], ccfg["n_bits"]))
            except SmilesError as exc:
                raise DataError(f"compound {c}: {exc}") from None
        T = tanimoto_matrix(fps)
        tg = group_pairwise(T, is_test)
        paths["tanimoto"] = os.path.join(out, "tanimoto_hist.csv")
        _write_hist(histogram_rows(tg, np.linspace(0.0, 1.0, bins + 1)), paths["tanimoto"])
        summary["tanimoto"] = summarize(tg)

    # PMFG construction is roughly cubic; cap the node count with a seeded sample
    cap = int(ccfg["pmfg_max_nodes"])
    idx = list(range(len(ids)))
    if len(idx) > cap:
        rng = Xoshiro256(derive_seed(cfg["seed"], "pmfg-sample"))
        idx = sorted(rng.sample_indices(len(ids), cap))
    summary["pmfg_nodes"] = len(idx)
    if len(idx) >= 3:
        R = row_correlation(Z[idx])
        graph = pmfg_construct(R)
        paths["pmfg"] = os.path.join(out, "pmfg_edges.csv")
        graph.write_edge_list(paths["pmfg"], [ids[i] for i in idx])
        D = all_pairs_shortest_paths(graph)
        sg = group_pairwise(D, is_test[idx])
        finite_max = int(np.max(D[np.isfinite(D)])) if np.isfinite(D).any() else 1
        paths["shortest_paths"] = os.path.join(out, "shortest_path_hist.csv")
        _write_hist(histogram_rows(sg, np.arange(0.5, finite_max + 1.5)), paths["shortest_paths"])
        summary["pmfg_edges"] = len(graph.edges)
        summary["shortest_path"] = summarize(sg)
    paths["summary"] = os.path.join(out, "summary.json")
    _dump_json(summary, paths["summary"])
    paths["effective_config"] = os.path.join(cfg["output_dir"], "effective_config.json")
    _dump_json(cfg, paths["effective_config"])
    return paths


def _write_hist(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "bin_low", "bin_high", "count"])
        for r in rows:
            w.writerow([r["group"], repr(r["bin_low"]), repr(r["bin_high"]), r["count"]])
