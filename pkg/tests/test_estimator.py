import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prdkit.classifiers import ScoredTestSet
from prdkit.core import PRCurve, make_lambda_grid
from prdkit.errors import InvalidArgument
from prdkit.estimator import (
    CurveEnsemble,
    SweepTable,
    aggregate,
    alpha_std,
    argmin_threshold,
    estimate_curve,
    pareto_clean,
    sweep_alphas,
    threshold_risk,
)

GRID = make_lambda_grid(21)

score_values = st.sampled_from([0.0, 0.25, 0.5, 1.0, 2.0, 3.0, math.inf])
scored_sets = st.tuples(
    st.lists(score_values, min_size=1, max_size=12), st.lists(score_values, min_size=1, max_size=12)
).map(lambda t: ScoredTestSet.from_parts(*t))


def member_rates(s: ScoredTestSet) -> list[tuple[float, float]]:
    """(fpr, fnr) of every family member and of both trivial classifiers."""
    out = [(1.0, 0.0), (0.0, 1.0)]  # f = 0 and f = 1
    for g in list(np.unique(s.scores)) + [math.inf]:
        for strict in (False, True):
            f = s.classify(g, strict)
            out.append((1.0 - f[s.from_x].mean(), f[~s.from_x].mean()))
    return out


def brute_alpha(s: ScoredTestSet, lam: float) -> float:
    return min(lam * fpr + fnr for fpr, fnr in member_rates(s))


def test_perfect_separation():
    s = ScoredTestSet.from_parts([0, 0, 0], [math.inf, math.inf])
    c = estimate_curve(s, GRID)
    assert np.all(c.alphas == 0) and np.all(c.betas == 0)


def test_constant_scores():
    s = ScoredTestSet.from_parts([1, 1, 1], [1, 1])
    c = estimate_curve(s, GRID)
    np.testing.assert_allclose(c.alphas, np.minimum(1.0, GRID.values), rtol=1e-15)


def test_empty_origin():
    with pytest.raises(InvalidArgument):
        SweepTable.build(ScoredTestSet.from_parts([1.0], []))


def test_sweep_table_counts():
    t = SweepTable.build(ScoredTestSet.from_parts([0, 1, 1, 3], [1, 2]))
    assert t.values.tolist() == [-math.inf, 0, 1, 2, 3]
    assert t.cum_x.tolist() == [0, 1, 3, 3, 4]
    assert t.cum_y.tolist() == [0, 0, 1, 2, 2]


def test_metadata_carried():
    s = ScoredTestSet.from_parts([0.5], [2.0], method="knn", k=3)
    c = estimate_curve(s, GRID, seed=9)
    assert c.metadata == {"method": "knn", "k": 3, "seed": 9}


@given(scored_sets)
def test_matches_brute_force(s):
    c = estimate_curve(s, GRID)
    for lam, a in zip(GRID.values[1:-1], c.alphas[1:-1]):
        assert a == pytest.approx(min(1.0, brute_alpha(s, lam)), abs=1e-12)
    rates = member_rates(s)
    f_inf = s.classify(math.inf)
    if not f_inf[s.from_x].all():
        assert c.alphas[-1] == min(fnr for fpr, fnr in rates if fpr == 0)
    else:
        assert c.alphas[-1] == f_inf[~s.from_x].mean()
    f_0 = s.classify(0.0)
    if f_0[~s.from_x].any():
        assert c.betas[0] == min(fpr for fpr, fnr in rates if fnr == 0)
    else:
        assert c.betas[0] == 1.0 - f_0[s.from_x].mean()


def test_endpoint_is_extreme_member():
    # f_inf keeps every X point; a tighter threshold would drop the y at 5.
    s = ScoredTestSet.from_parts([0.5, 2.0], [5.0, math.inf])
    c = estimate_curve(s, GRID)
    assert c.alphas[-1] == 0.5
    # threshold 2.0 separates perfectly, so every finite lambda has zero risk
    assert np.all(c.alphas[:-1] == 0)


@given(scored_sets)
def test_alpha_bounded_by_trivial(s):
    c = estimate_curve(s, GRID)
    assert np.all(c.alphas <= np.minimum(1.0, GRID.values) + 1e-15)
    assert np.all((c.betas >= 0) & (c.betas <= 1))
    fin = np.isfinite(GRID.values) & (GRID.values > 0)
    np.testing.assert_allclose(c.betas[fin], c.alphas[fin] / GRID.values[fin], rtol=1e-12)


@given(scored_sets)
def test_monotone_before_clipping(s):
    raw, _ = sweep_alphas(SweepTable.build(s), GRID.values)
    assert np.all(np.diff(raw) >= -1e-15)


@given(scored_sets)
def test_exchange_symmetry(s):
    c = estimate_curve(s, GRID)
    w = estimate_curve(s.swapped(), GRID)
    # w at lambda equals c at 1/lambda with alpha and beta exchanged
    np.testing.assert_allclose(w.alphas, c.betas[::-1], atol=1e-12)
    np.testing.assert_allclose(w.betas, c.alphas[::-1], atol=1e-12)


@given(scored_sets, st.sampled_from(GRID.values[1:-1].tolist()))
def test_argmin_threshold_reaches_minimum(s, lam):
    g, r = argmin_threshold(s, lam)
    assert r == pytest.approx(brute_alpha(s, lam), abs=1e-12)
    if np.isfinite(g):
        assert threshold_risk(s, g, lam) == pytest.approx(r, abs=1e-12)


def _pc(betas, alphas):
    n = len(betas)
    return PRCurve(np.arange(n, dtype=float), np.array(alphas, float), np.array(betas, float))


def test_pareto_domination():
    c = pareto_clean(_pc([1, 1], [0.2, 0.5]))
    assert c.alphas.tolist() == [0.5] and c.lambdas.tolist() == [1.0]


def test_pareto_unit_square():
    lam = np.array([0.0, 1.0, np.inf])
    c = pareto_clean(PRCurve(lam, np.array([0.0, 1.0, 1.0]), np.array([1.0, 1.0, 0.0])))
    assert list(zip(c.betas, c.alphas)) == [(1.0, 1.0)]


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=30))
def test_pareto_properties(pts):
    c = _pc([p[0] for p in pts], [p[1] for p in pts])
    p = pareto_clean(c)
    assert np.all(np.diff(p.betas) > 0) and np.all(np.diff(p.alphas) < 0)
    for b, a in zip(c.betas, c.alphas):
        assert np.any((p.betas >= b) & (p.alphas >= a))
    again = pareto_clean(p)
    np.testing.assert_array_equal(again.alphas, p.alphas)
    np.testing.assert_array_equal(again.lambdas, p.lambdas)


def _flat(alpha):
    lam = GRID.values
    a = np.minimum(alpha, lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        b = np.where(lam == 0, 1.0, np.where(np.isinf(lam), 0.0, a / lam))
    return PRCurve(lam, a, np.minimum(b, 1.0))


def test_aggregate_identical():
    c = _flat(0.5)
    mean, plus, minus = aggregate([c, c, c])
    np.testing.assert_allclose(mean.alphas, c.alphas, rtol=1e-15)
    np.testing.assert_array_equal(alpha_std([c, c]), 0.0)
    np.testing.assert_allclose(plus.alphas, minus.alphas, rtol=1e-15)


def test_aggregate_two_point_statistics():
    lam = np.array([0.0, 1.0, np.inf])
    a = PRCurve(lam, np.array([0.0, 0.4, 0.4]), np.array([1.0, 0.4, 0.0]))
    b = PRCurve(lam, np.array([0.0, 0.6, 0.6]), np.array([1.0, 0.6, 0.0]))
    mean, plus, minus = aggregate(CurveEnsemble([a, b]))
    assert mean.alphas[1] == pytest.approx(0.5)
    assert alpha_std([a, b])[1] == pytest.approx(0.1)
    assert plus.alphas[1] == pytest.approx(0.6) and minus.alphas[1] == pytest.approx(0.4)
    assert mean.metadata["repetitions"] == 2


@given(st.lists(st.floats(0, 1), min_size=1, max_size=6))
def test_mean_curve_inherits_beta_relation(levels):
    mean, plus, minus = aggregate([_flat(v) for v in levels])
    fin = np.isfinite(GRID.values) & (GRID.values > 0)
    np.testing.assert_allclose(mean.betas[fin], mean.alphas[fin] / GRID.values[fin], rtol=1e-12, atol=1e-15)
    for c in (plus, minus):
        assert np.all((c.alphas >= 0) & (c.alphas <= 1))


def test_aggregate_errors():
    with pytest.raises(InvalidArgument):
        aggregate([])
    other = PRCurve(np.array([0.0, np.inf]), np.zeros(2), np.zeros(2))
    with pytest.raises(InvalidArgument):
        CurveEnsemble([_flat(0.5), other])
