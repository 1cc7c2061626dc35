"""Acceptance criteria 1-9, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
PASS/FAIL line per criterion.  Seeds are fixed in advance.
"""

import csv
import io
import math
import time
from contextlib import redirect_stdout

import numpy as np
import pytest
from scipy import stats

from chartests import bahadur, cli, empirical, montecarlo, projection
from chartests._common import TestKind
from chartests.distributions import AlternativeFamily, NullFamily
from chartests.optimize import to_region

PA, LO, EX = TestKind.PARETO, TestKind.LOGISTIC, TestKind.EXPONENTIAL


def crit(n):
    return pytest.mark.criterion(n)


# ---------------------------------------------------------------------------
# 1. variance suprema

@pytest.fixture(scope="module")
def sups():
    out = {}
    for kind in TestKind:
        t0 = time.perf_counter()
        res = projection.sigma2_sup(kind)
        out[kind] = (res, time.perf_counter() - t0)
    return out


@crit(1)
def test_c1_pareto_sup(sups):
    res, secs = sups[PA]
    assert projection.sigma2(PA, math.sqrt(2), math.sqrt(2)) == pytest.approx(1 / 16, abs=1e-12)
    assert res.argmax == pytest.approx((1.414, 1.414), abs=0.01)
    assert res.sigma0_sq == pytest.approx(0.0625, abs=1e-4)
    assert secs < 60


@crit(1)
def test_c1_logistic_sup_value(sups):
    res, secs = sups[LO]
    assert res.sigma0_sq == pytest.approx(0.00945, abs=2e-4)
    assert secs < 60


@crit(1)
def test_c1_logistic_sup_argmax(sups):
    res, _ = sups[LO]
    assert res.argmax == pytest.approx((0.669, 0.669), abs=0.01)


@crit(1)
def test_c1_exponential_sup_argmax(sups):
    res, secs = sups[EX]
    assert res.argmax == pytest.approx((0.453, 0.669), abs=0.01)
    assert secs < 60


@crit(1)
def test_c1_exponential_sup_value(sups):
    res, _ = sups[EX]
    assert res.sigma0_sq == pytest.approx(0.0223, abs=2e-4)


# ---------------------------------------------------------------------------
# 2. large-deviation coefficients

@crit(2)
def test_c2_pareto_ld():
    assert bahadur.ld_coefficient(PA) == pytest.approx(2.00, abs=0.01)


@crit(2)
def test_c2_logistic_ld():
    assert bahadur.ld_coefficient(LO) == pytest.approx(5.88, abs=0.05)


@crit(2)
def test_c2_exponential_ld_flagged():
    rep = bahadur.efficiency(EX, "makeham")
    assert "0.715" in rep.discrepancy_note and "inconsistent" in rep.discrepancy_note


@crit(2)
def test_c2_exponential_ld_value():
    assert bahadur.ld_coefficient(EX) == pytest.approx(1.401, abs=0.02)


# ---------------------------------------------------------------------------
# 3. efficiencies

@crit(3)
def test_c3_pareto_mixture():
    rep = bahadur.efficiency(PA, "mixture", "paper-compat")
    assert rep.efficiency == pytest.approx(0.29, abs=0.01)
    assert rep.sup_abs_aprime == pytest.approx(0.170, abs=0.005)
    assert rep.argmax == pytest.approx((1.43, 1.43), abs=0.02)
    assert rep.kl2_coef == pytest.approx(1.58, abs=0.01)


@crit(3)
def test_c3_pareto_ley_paindaveine():
    assert bahadur.efficiency(PA, "ley-paindaveine", "paper-compat").efficiency == pytest.approx(0.23, abs=0.02)


@crit(3)
def test_c3_logistic_shifted():
    rep = bahadur.efficiency(LO, "shifted", "paper-compat")
    assert rep.efficiency == pytest.approx(0.55, abs=0.02)
    assert rep.sup_abs_aprime == pytest.approx(0.0417, abs=0.001)
    assert rep.argmax == pytest.approx((0.0, 0.0), abs=0.01)
    assert rep.kl2_coef == pytest.approx(0.33, abs=0.01)


@crit(3)
def test_c3_logistic_gld():
    rep = bahadur.efficiency(LO, "gld", "paper-compat")
    assert rep.efficiency == pytest.approx(0.43, abs=0.02)
    assert rep.kl2_coef == pytest.approx(0.82, abs=0.01)


@crit(3)
def test_c3_logistic_gld_lambda_slope():
    assert bahadur.kl2_coefficient(LO, "gld").lambda_slope == pytest.approx(-0.35, abs=0.02)


@crit(3)
def test_c3_exponential_makeham_and_notes():
    slope = bahadur.b_slope(EX, "makeham", "lemma")
    assert slope.b_coef == pytest.approx(0.00617, abs=1e-4)
    assert slope.argmax == pytest.approx((0.405, 0.693), abs=0.01)
    assert bahadur.kl2_coefficient(EX, "makeham").kl2_coef == pytest.approx(1 / 12, abs=1e-4)
    assert bahadur.kl2_coefficient(EX, "makeham").kl2_coef == pytest.approx(0.0833, abs=1e-4)
    for alt, ref in (("makeham", 0.38), ("weibull", 0.20)):
        rep = bahadur.efficiency(EX, alt, "paper-compat")
        assert rep.paper_value == ref
        assert f"vs reference {ref:g}" in rep.discrepancy_note


# ---------------------------------------------------------------------------
# 4. oracle equivalence

def _random_t(kind, x, rng):
    """Parameters that often sit exactly on jump abscissae."""
    pick = rng.integers(3)
    i, j = rng.integers(x.size, size=2)
    if kind is PA:
        t = [x[i], x[i] / x[j] if x[i] > x[j] else x[i], rng.uniform(1.0, x.max() * 1.1)][pick]
        return max(t, 1.0 + 1e-9)
    if kind is LO:
        return [x[i], x[i] - x[j], rng.uniform(x.min() - 1, x.max() + 1)][pick]
    return max([x[i], abs(x[i] - x[j]), rng.uniform(0, x.max() * 1.1)][pick], 1e-9)


@crit(4)
@pytest.mark.parametrize("kind", list(TestKind), ids=lambda k: k.short)
def test_c4_counts_match_brute_force(kind):
    rng = np.random.default_rng(404 + kind.degree)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(kind.degree, 21))
        x = NullFamily(kind).sample(n, rng).values
        t1, t2 = _random_t(kind, x, rng), _random_t(kind, x, rng)
        fast = empirical.diff(kind, x, t1, t2)
        slow = empirical.brute_force_diff(kind, x, t1, t2)
        worst = max(worst, abs(fast - slow))
    assert worst < 1e-12


def _dense_axes(kind, x, m=2000):
    """Uniform grid over the data window plus the jump abscissae of each axis."""
    lo, hi = x.min(), x.max()
    pad = 0.1 * (hi - lo)
    if kind is PA:
        u = np.linspace(1.0, hi + pad, m + 1)[1:]
        a = np.union1d(u, x[x > 1.0])
        return a, a
    if kind is LO:
        a = np.union1d(np.linspace(lo - pad, hi + pad, m), x)
        return a, a
    gaps = np.abs(x[:, None] - x[None, :])[np.triu_indices(x.size, 1)]
    a1 = np.union1d(np.linspace(0.0, hi + pad, m + 1)[1:], x[x > 0])
    a2 = np.union1d(np.linspace(0.0, 1.1 * gaps.max(), m + 1)[1:], gaps[gaps > 0])
    return a1, a2


@crit(4)
@pytest.mark.parametrize("kind", list(TestKind), ids=lambda k: k.short)
def test_c4_exact_matches_dense_grid(kind):
    rng = np.random.default_rng(2026)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        s = NullFamily(kind).sample(15, rng)
        exact = empirical.k_statistic(kind, s).value
        a1, a2 = _dense_axes(kind, s.values)
        dense = float(np.abs(empirical.field_grid(kind, s, a1, a2)).max())
        assert exact >= dense - 1e-12
        worst = max(worst, abs(exact - dense))
    assert worst < 1e-9
    assert time.perf_counter() - t0 < 300


# ---------------------------------------------------------------------------
# 5. invariances

@crit(5)
def test_c5_invariances():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(6, 16))
        xp = NullFamily(PA).sample(n, rng).values
        a = rng.uniform(0.2, 5.0)
        assert empirical.k_statistic(PA, xp ** a).value == pytest.approx(empirical.k_statistic(PA, xp).value, abs=1e-12)
        for kind in (LO, EX):
            x = NullFamily(kind).sample(n, rng).values
            c = rng.uniform(0.1, 10.0)
            assert empirical.k_statistic(kind, c * x).value == pytest.approx(
                empirical.k_statistic(kind, x).value, abs=1e-12)
        xe = NullFamily(EX).sample(n, rng).values
        t1, t2 = rng.uniform(0, 2, 20), rng.uniform(0, 2, 20)
        low = empirical.diff_ex(xe, t1, t2, "lower")
        up = empirical.diff_ex(xe, t1, t2, "upper")
        np.testing.assert_allclose(low, -up, atol=1e-12)
        for kind, x in ((PA, xp), (LO, NullFamily(LO).sample(n, rng).values)):
            u = to_region(kind, rng.random((20, 2)))
            assert np.array_equal(empirical.diff(kind, x, u[:, 0], u[:, 1]), empirical.diff(kind, x, u[:, 1], u[:, 0]))


# ---------------------------------------------------------------------------
# 6. projection cross-checks

@crit(6)
@pytest.mark.parametrize("kind", list(TestKind), ids=lambda k: k.short)
def test_c6_xi_matches_conditional_expectation(kind):
    rng = np.random.default_rng(600 + kind.degree)
    null = NullFamily(kind)
    reps = 10**5
    for _ in range(20):
        s, t1, t2 = null.quantile(rng.uniform(0.05, 0.95, 3))
        others = null.quantile(rng.random((reps, kind.degree - 1)))
        args = np.concatenate([np.full((reps, 1), s), others], axis=1)
        v = projection.kernel(kind, args, t1, t2)
        se = v.std(ddof=1) / math.sqrt(reps)
        exact = projection.xi(kind, s, t1, t2)
        assert abs(v.mean() - exact) <= max(3 * se, 1e-12), (s, t1, t2, v.mean(), exact, se)


@crit(6)
@pytest.mark.parametrize("kind", [PA, EX], ids=lambda k: k.short)
def test_c6_closed_variance_matches_quadrature(kind):
    rng = np.random.default_rng(650)
    t = to_region(kind, rng.random((50, 2)))
    closed = projection.sigma2(kind, t[:, 0], t[:, 1])
    quad = projection.sigma2(kind, t[:, 0], t[:, 1], form=projection.Form.QUADRATURE)
    np.testing.assert_allclose(closed, quad, rtol=0, atol=1e-8)


# ---------------------------------------------------------------------------
# 7. Monte Carlo calibration

@crit(7)
def test_c7_null_rejection_rate():
    plan = montecarlo.SimPlan(PA, 50, 20000, seed=70, alpha=0.05)
    c = montecarlo.critical_value(plan)
    fresh = montecarlo.simulate_null(montecarlo.SimPlan(PA, 50, 20000, seed=71))
    assert montecarlo.rejection_rate(fresh, c) == pytest.approx(0.05, abs=0.005)


@crit(7)
def test_c7_p_values_uniform():
    null = montecarlo.simulate_null(montecarlo.SimPlan(PA, 30, 2000, seed=72))
    p = []
    for r in range(200):
        x = NullFamily(PA).sample(30, montecarlo.replication_rng(73, r))
        p.append(montecarlo.p_value_from(empirical.k_statistic(PA, x).value, null))
    assert stats.kstest(p, "uniform").pvalue > 0.01


# ---------------------------------------------------------------------------
# 8. large-deviation empirics

@crit(8)
def test_c8_pareto_rate_trend():
    t0 = time.perf_counter()
    eps = 0.1
    target = 2 * eps**2
    pts = montecarlo.ld_empirical(PA, eps, [50, 100, 200], reps=10**5, seed=80)
    secs = time.perf_counter() - t0
    rates = [p.rate for p in pts]
    print("\nPA eps=0.1 rates:", [(p.n, p.hits, p.rate) for p in pts], f"target {target}, {secs:.0f}s")
    assert all(r is not None for r in rates)
    gaps = [abs(r - target) / target for r in rates]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[-1] < 0.5
    assert secs < 600


# ---------------------------------------------------------------------------
# 9. reproduction table

@crit(9)
def test_c9_efficiency_table():
    t0 = time.perf_counter()
    buf = io.StringIO()
    with redirect_stdout(buf):
        status = cli.main(["efficiency", "--all", "--format", "csv"])
    assert status == 0
    rows = list(csv.DictReader(io.StringIO(buf.getvalue())))
    assert len(rows) == 6
    refs = sorted(float(r["paper_value"]) for r in rows)
    assert refs == sorted([0.29, 0.23, 0.55, 0.43, 0.38, 0.20])
    for r in rows:
        assert r["efficiency"] and r["discrepancy_note"]
    assert time.perf_counter() - t0 < 300
