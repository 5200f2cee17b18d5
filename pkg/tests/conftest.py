import numpy as np
import pytest

from timesplit.data import FeatureTable, LabelTable, MonthDate, build_registry, intersect_compounds


@pytest.fixture
def write_csv(tmp_path):
    def _write(name: str, text: str):
        p = tmp_path / name
        p.write_text(text)
        return p

    return _write


def toy_bundle(n=40, seed=0, threshold_frac=0.75):
    """Small bundle with one informative feature and monthly dates."""
    rng = np.random.default_rng(seed)
    ids = [f"C{i:03d}" for i in range(n)]
    y = (np.arange(n) % 2).astype(float)
    X = np.column_stack([y + rng.normal(0, 0.5, n), rng.normal(size=n), rng.normal(size=n)])
    dates = {cid: MonthDate.from_index(MonthDate(1990, 1).index() + i) for i, cid in enumerate(ids)}
    table = FeatureTable("toy", tuple(ids), ("signal", "n1", "n2"), X)
    labels = LabelTable(tuple(ids), ("ae",), y[:, None])
    return intersect_compounds([table], labels, build_registry(ids, dates))
