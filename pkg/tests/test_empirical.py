import math

import numpy as np
import pytest

from chartests import empirical
from chartests._common import DomainError, ExactModeRefused, Mode, TestKind
from chartests.distributions import NullFamily
from chartests.empirical import GridSpec

PA, LO, EX = TestKind.PARETO, TestKind.LOGISTIC, TestKind.EXPONENTIAL


def test_pareto_examples():
    s = [2.0, 4.0, 8.0]
    assert empirical.diff_pa(s, 1 + 1e-9, 1 + 1e-9) == pytest.approx(0.0, abs=1e-15)
    assert empirical.diff_pa(s, 2.5, 3.0) == pytest.approx(0.0, abs=1e-15)
    assert empirical.diff_pa(s, 1.5, 1.5) == pytest.approx(1 / 3, abs=1e-15)
    with pytest.raises(DomainError):
        empirical.diff_pa(s, 1.0, 2.0)


def test_logistic_examples():
    s = [-1.0, 0.0, 2.0]
    assert empirical.diff_lo(s, -0.5, 0.5) == pytest.approx(empirical.brute_force_diff(LO, s, -0.5, 0.5), abs=1e-12)
    assert empirical.diff_lo(s, 1e300, 0.3) == 0.0
    assert empirical.diff_lo(s, 0.2, -0.7) == empirical.diff_lo(s, -0.7, 0.2)


def test_exponential_examples():
    s = [0.1, 0.5, 1.2, 2.0]
    assert empirical.diff_ex(s, 0.6, 0.8) == pytest.approx(empirical.brute_force_diff(EX, s, 0.6, 0.8), abs=1e-12)
    assert empirical.diff_ex(s, 2.0, 1.9) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        empirical.diff_ex(s, 0.0, 1.0)


def test_pareto_statistic_matches_dense_scan():
    s = np.array([2.0, 4.0, 8.0])
    axis = np.union1d(np.linspace(1.0, 8.8, 2001)[1:], s)
    dense = np.abs(empirical.field_grid(PA, s, axis, axis)).max()
    assert empirical.k_statistic(PA, s).value == pytest.approx(dense, abs=1e-9)


@pytest.mark.parametrize("kind", list(TestKind), ids=lambda k: k.short)
def test_brute_force_bounds(kind, rng):
    x = NullFamily(kind).sample(8, rng).values
    t = NullFamily(kind).quantile(rng.uniform(0.1, 0.9, (30, 2)))
    for t1, t2 in t:
        assert -1.0 <= empirical.brute_force_diff(kind, x, t1, t2) <= 1.0


def test_brute_force_cap():
    with pytest.raises(DomainError):
        empirical.brute_force_diff(PA, np.arange(2.0, 33.0), 2.0, 2.0)


@pytest.mark.parametrize("kind", list(TestKind), ids=lambda k: k.short)
def test_exact_dominates_grid(kind, rng):
    for _ in range(5):
        s = NullFamily(kind).sample(40, rng)
        exact = empirical.k_statistic(kind, s, Mode.EXACT)
        grid = empirical.k_statistic(kind, s, Mode.GRID, GridSpec(64, 64))
        assert exact.value >= grid.value - 1e-12
        assert 0.0 <= exact.value <= 1.0
        t1, t2 = exact.argmax
        assert abs(empirical.diff(kind, s, t1, t2)) == pytest.approx(exact.value, abs=1e-12)


def test_exact_cap_refusal():
    s = NullFamily(LO).sample(101, np.random.default_rng(0))
    with pytest.raises(ExactModeRefused, match="GRID"):
        empirical.k_statistic(LO, s)
    assert empirical.k_statistic(LO, s, Mode.GRID).value > 0


def test_sample_too_small():
    with pytest.raises(DomainError):
        empirical.k_statistic(EX, [0.1, 0.2, 0.3])


def test_statistic_shrinks_with_n():
    rng = np.random.default_rng(7)
    small = [empirical.k_statistic(PA, NullFamily(PA).sample(100, rng)).value for _ in range(100)]
    big = [empirical.k_statistic(PA, NullFamily(PA).sample(1000, rng), Mode.GRID).value for _ in range(100)]
    assert np.median(big) < np.median(small)


def test_power_transform_example():
    s = NullFamily(PA).sample(30, np.random.default_rng(2)).values
    assert empirical.k_statistic(PA, s**3).value == pytest.approx(empirical.k_statistic(PA, s).value, abs=1e-12)


def test_grid_spec_parse():
    assert GridSpec.parse("100x50") == GridSpec(100, 50)
    assert GridSpec.parse("0x10").empty
    with pytest.raises(DomainError):
        GridSpec.parse("ten")


def test_field_grid_agrees_with_pointwise(rng):
    s = NullFamily(EX).sample(12, rng)
    a, b = np.array([0.2, 0.7, 1.5]), np.array([0.1, 0.4])
    g = empirical.field_grid(EX, s, a, b)
    for i, t1 in enumerate(a):
        for j, t2 in enumerate(b):
            assert g[i, j] == pytest.approx(empirical.diff_ex(s, t1, t2), abs=1e-15)
