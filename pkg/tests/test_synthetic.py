import filecmp

import numpy as np
import pytest

from timesplit.chem import parse_smiles
from timesplit.data import MonthDate
from timesplit.splits import time_split
from timesplit.synthetic import SyntheticError, SyntheticSpec, generate_synthetic, write_synthetic


def test_same_seed_identical_files(tmp_path):
    spec = SyntheticSpec(n_compounds=80, seed=3)
    write_synthetic(generate_synthetic(spec), tmp_path / "a")
    write_synthetic(generate_synthetic(spec), tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    assert mismatch == [] and errors == [] and len(match) == len(names)


def test_generated_content_is_consistent():
    data = generate_synthetic(SyntheticSpec(n_compounds=120, seed=1))
    b = data.bundle()
    assert len(b) == 120
    for rec in data.registry:
        parse_smiles(rec.smiles)
    assert set(b.tables) == {"fragments", "descriptors", "knowledge"}
    plan = time_split(b, MonthDate.parse(data.spec.drift_point))
    assert plan.train_ids and plan.test_ids
    assert len(data.informative_proteins) == data.spec.n_informative_proteins
    ratios = b.labels.positive_ratios()
    assert np.all((ratios > 0.05) & (ratios < 0.95))


def test_leaky_publications_follow_approval():
    data = generate_synthetic(SyntheticSpec(n_compounds=100, seed=2))
    lo, hi = data.spec.leak_lag_months
    leaky = set(data.informative_proteins)
    lags = [pub.index() - data.approvals[c].index()
            for (c, p), pub in data.publications.items() if p in leaky]
    assert lags and all(lo <= v <= hi for v in lags)


@pytest.mark.parametrize("bad", [
    {"drift_point": "2030-01"}, {"leak_rate": 1.5}, {"n_compounds": 5}, {"drifting_motifs": ("nope",)},
])
def test_infeasible_specs(bad):
    with pytest.raises(SyntheticError):
        generate_synthetic(SyntheticSpec(**bad))


def test_spec_dict_round_trip():
    spec = SyntheticSpec(seed=9, drift_strength=0.0)
    assert SyntheticSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(SyntheticError):
        SyntheticSpec.from_dict({"bogus": 1})
