import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from timesplit.stats import normal_cdf, normal_quantile, normal_sf, paired_t_test_one_sided, stouffer_combine

from . import oracles


def test_normal_quantile_known_values():
    assert normal_quantile(0.5) == 0.0
    assert normal_quantile(0.975) == pytest.approx(1.959963984540054, abs=1e-12)


def test_normal_quantile_against_mpmath():
    rng = np.random.default_rng(0)
    ps = np.concatenate([rng.uniform(0, 1, 900), 10.0 ** -rng.uniform(1, 15, 100)])
    for p in ps:
        if p <= 0:
            continue
        assert abs(normal_quantile(p) - oracles.normal_quantile(p)) < 1e-9


def test_normal_cdf_against_mpmath():
    for z in np.random.default_rng(1).uniform(-8, 8, 1000):
        assert abs(normal_cdf(z) - oracles.normal_cdf(z)) < 1e-9
        assert normal_sf(z) == pytest.approx(oracles.normal_cdf(-z), rel=1e-12)


def test_round_trip():
    for p in np.random.default_rng(2).uniform(1e-6, 1 - 1e-6, 1000):
        assert abs(normal_cdf(normal_quantile(p)) - p) < 1e-9


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_quantile_domain(p):
    with pytest.raises(ValueError):
        normal_quantile(p)


def test_t_test_df2_closed_form():
    r = paired_t_test_one_sided([1, 2, 3], [0, 0, 0])
    assert r.statistic == pytest.approx(2 * math.sqrt(3))
    assert r.df == 2
    expected = 1 - oracles.t_cdf_df2(2 * math.sqrt(3))
    assert r.p_value == pytest.approx(expected, abs=1e-12)
    assert r.p_value == pytest.approx(0.0371, abs=1e-4)


def test_t_test_alternative_direction():
    a = paired_t_test_one_sided([0, 0, 0], [1, 2, 3], alternative="b_greater")
    assert a.p_value == pytest.approx(0.0371, abs=1e-4)


def test_t_test_degenerate_cases():
    r = paired_t_test_one_sided([0.1, -0.1], [0, 0])
    assert r.statistic == 0 and r.p_value == 0.5
    z = paired_t_test_one_sided([1, 1, 1], [1, 1, 1])
    assert z.p_value == 0.5 and z.degenerate
    assert paired_t_test_one_sided([2, 2], [1, 1]).p_value == 0.0
    assert paired_t_test_one_sided([1, 1], [2, 2]).p_value == 1.0


def test_t_test_errors():
    with pytest.raises(ValueError):
        paired_t_test_one_sided([1], [0])
    with pytest.raises(ValueError):
        paired_t_test_one_sided([1, 2], [0])


def test_stouffer():
    assert stouffer_combine([0.5, 0.5]) == pytest.approx(0.5)
    assert stouffer_combine([0.05, 0.05]) == pytest.approx(0.0100, abs=1e-4)
    z = 2 * oracles.normal_quantile(0.95) / math.sqrt(2)
    assert stouffer_combine([0.05, 0.05]) == pytest.approx(1 - oracles.normal_cdf(z), rel=1e-9)
    assert stouffer_combine([0.3]) == pytest.approx(0.3, abs=1e-15)
    with pytest.raises(ValueError):
        stouffer_combine([0.0, 0.5])
    with pytest.raises(ValueError):
        stouffer_combine([])


@given(st.floats(1e-6, 0.499), st.integers(1, 30))
def test_stouffer_copies_decrease(p, k):
    assert stouffer_combine([p] * (k + 1)) < stouffer_combine([p] * k)
