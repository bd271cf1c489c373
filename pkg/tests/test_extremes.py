import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from prdkit.classifiers import score_families
from prdkit.core import SampleSet, SplitSpec, make_lambda_grid
from prdkit.errors import InvalidArgument
from prdkit.estimator import estimate_curve
from prdkit.extremes import (
    EXTREMES,
    coverage_extreme,
    default_ppr_radius,
    eas_extreme,
    extreme_report,
    ipr_extreme,
    ppr_extreme,
    prc_extreme,
)


def col(*v):
    return np.array(v, float).reshape(-1, 1)


X, Y = col(0, 1), col(0.5, 10)
FAR = col(1e6, 1e6 + 1)


def test_ipr_examples():
    assert ipr_extreme(X, Y, 1) == 0.5
    assert ipr_extreme(col(0, 1, 2), col(1, 2), 1) == 1.0
    assert ipr_extreme(X, FAR, 1) == 0.0


def test_coverage_examples():
    assert coverage_extreme(X, Y, 1) == 1.0
    assert coverage_extreme(Y, Y, 1) == 1.0
    assert coverage_extreme(FAR, Y, 1) == 0.0


def test_eas_examples():
    assert eas_extreme(X, Y, 1) == 0.5
    assert eas_extreme(Y, Y, 1) == 1.0
    assert eas_extreme(FAR, Y, 1) == 0.0


def test_prc_examples():
    assert prc_extreme(X, Y, 1, kprime=1) == coverage_extreme(X, Y, 1)
    assert prc_extreme(X, Y, 1, kprime=2) == 0.5
    assert prc_extreme(X, Y, 1, kprime=3) == 0.0
    with pytest.raises(InvalidArgument):
        prc_extreme(X, Y, 1, kprime=0)


def test_ppr_examples():
    assert ppr_extreme(col(0), col(0.5), 1.0) == 0.5
    assert ppr_extreme(col(0, 3), col(3), 1.0) == 1.0
    assert ppr_extreme(col(0), col(5), 1.0) == 0.0
    with pytest.raises(InvalidArgument):
        ppr_extreme(col(0), col(5), 0.0)


def test_ppr_product_form():
    # Two kernels of 0.5 each: 1 - (1 - .5)(1 - .5) = .75
    assert ppr_extreme(col(-0.5, 0.5), col(0), 1.0) == pytest.approx(0.75)


def test_k_validation():
    with pytest.raises(InvalidArgument):
        ipr_extreme(X, Y, 2)
    with pytest.raises(InvalidArgument):
        coverage_extreme(X, Y, 2)


def test_default_radius():
    x = col(0, 1, 2, 3, 4, 10)
    r = default_ppr_radius(x, k=1)
    assert r == pytest.approx(np.mean([1, 1, 1, 1, 1, 6]))


pts = lambda n: arrays(np.float64, (n, 2), elements=st.integers(-5, 5).map(float))


@given(pts(9), pts(8), st.integers(1, 7))
def test_outputs_in_unit_interval(x, y, k):
    for v in (ipr_extreme(x, y, k), coverage_extreme(x, y, k), eas_extreme(x, y, k), prc_extreme(x, y, k, 2)):
        assert 0.0 <= v <= 1.0


@given(pts(9), pts(8), st.integers(1, 7))
def test_prc_non_increasing_in_kprime(x, y, k):
    vals = [prc_extreme(x, y, k, kp) for kp in range(1, 11)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert vals[0] == coverage_extreme(x, y, k)


@given(pts(6), pts(5), st.lists(st.floats(0.1, 20), min_size=2, max_size=5))
def test_ppr_non_decreasing_in_radius(x, y, radii):
    vals = [ppr_extreme(x, y, r) for r in sorted(radii)]
    assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))
    assert all(0.0 <= v <= 1.0 for v in vals)


@given(pts(9), pts(8), st.integers(1, 7))
def test_family_extremes_match_published_metrics(x, y, k):
    # No split: f_inf of each family, evaluated on Y, reproduces its metric.
    fams = score_families(x, y, methods=("ipr", "cov", "knn"), k=k)
    for m, metric in (("ipr", ipr_extreme), ("cov", coverage_extreme), ("knn", coverage_extreme)):
        s = fams[m]
        fnr_inf = s.classify(math.inf)[~s.from_x].mean()
        assert fnr_inf == metric(x, y, k)
    curve = estimate_curve(fams["knn"], make_lambda_grid(11))
    assert curve.alpha_inf == coverage_extreme(x, y, k)


def test_report_roles_and_params():
    rng = np.random.default_rng(0)
    x = SampleSet(rng.normal(size=(40, 3)))
    y = SampleSet(rng.normal(1.0, 1, size=(30, 3)))
    r = extreme_report(x, y, "prc", k=3, kprime=2)
    assert r.alpha_inf == prc_extreme(x, y, 3, 2)
    assert r.beta_0 == prc_extreme(y, x, 3, 2)
    assert r.to_dict() == {"method": "prc", "alpha_inf": r.alpha_inf, "beta_0": r.beta_0,
                           "params": {"k": 3, "kprime": 2}}
    s = extreme_report(x, y, "ipr", k=3, split=SplitSpec(0.5, seed=1))
    assert s.params["split"] == 0.5
    p = extreme_report(x, y, "ppr")
    assert p.alpha_inf == ppr_extreme(x, y, default_ppr_radius(x))
    for m in EXTREMES:
        assert 0 <= extreme_report(x, y, m).alpha_inf <= 1
    with pytest.raises(InvalidArgument):
        extreme_report(x, y, "fid")
