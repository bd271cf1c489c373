"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (repeated in the terminal summary).
The full run takes roughly an hour on one core; PRDKIT_THREADS spreads the
repetitions over worker processes.
"""

import math
import os
import tempfile
import time

import numpy as np
import pytest

import test_analysis
import test_classifiers
import test_estimator
import test_extremes
import test_ground_truth
import test_linalg
from oracles import gaussian_alpha_tv
from prdkit.classifiers import resolve_k, score_families
from prdkit.core import RngStream, SampleSet, SplitSpec, make_lambda_grid, split_samples
from prdkit.estimator import argmin_threshold, estimate_curve, threshold_risk
from prdkit.experiments import (
    HYBRID_REGIME,
    ExperimentConfig,
    Regime,
    generate_surrogate,
    hybrid_series,
    run_gmm,
    run_hybrid,
    run_shift,
    run_variability,
)
from prdkit.extremes import coverage_extreme, ipr_extreme, prc_extreme
from prdkit.ground_truth import Gaussian, GtConfig, gt_curve

WORKERS = int(os.environ.get("PRDKIT_THREADS", "1"))


def verdict(record, cid: str, ok: bool, what: str) -> None:
    record(f"{cid:<4} {'PASS' if ok else 'FAIL'}  {what}")
    assert ok, what


# Mean IoU for shifted Gaussians (d=64, n=10K), k = sqrt(n).
PUBLISHED_SHIFT = {
    (0.5, 0.12): {"ipr": 0.81, "knn": 0.87, "kde": 0.84, "cov": 0.92},
    (0.5, 0.38): {"ipr": 0.63, "knn": 0.84, "kde": 0.75, "cov": 0.93},
    (None, 0.12): {"ipr": 0.91, "knn": 0.93, "kde": 0.94, "cov": 0.96},
    (None, 0.38): {"ipr": 0.83, "knn": 0.91, "kde": 0.90, "cov": 0.96},
}


def test_c1_shift_table(record):
    cfg = ExperimentConfig(suite="shift", mus=(0.12, 0.38), regimes=(Regime(0.5, "sqrt_n"), Regime(None, "sqrt_n")),
                           repetitions=10, n=10_000, d=64, workers=WORKERS)
    res = run_shift(cfg)
    bad = []
    for (split, mu), ref in PUBLISHED_SHIFT.items():
        for m, want in ref.items():
            row = res.table.lookup(mu, m, split, "sqrt_n")
            off = abs(row["mean_iou"] - want)
            tag = f"{'split' if split else 'nosplit'} mu={mu} {m}"
            print(f"  {tag:<22} iou={row['mean_iou']:.3f} (published {want:.2f}) std={row['std_iou']:.4f}")
            if off > 0.05 or row["std_iou"] >= 1e-2:
                bad.append(f"{tag}: {row['mean_iou']:.3f} vs {want:.2f}, std {row['std_iou']:.4f}")
    verdict(record, "C1", not bad, "shift table within 0.05, std < 1e-2" + (f"; off: {'; '.join(bad)}" if bad else ""))


def test_c2_ground_truth_vs_quadrature(record):
    grid = make_lambda_grid(101)
    worst = 0.0
    for i, mu in enumerate((0.5, 1.0, 2.0)):
        c = gt_curve(Gaussian.isotropic([0.0]), Gaussian.isotropic([mu]), GtConfig(100_000, grid, seed=11 + i))
        want = np.array([0.0 if lam == 0 else 1.0 if math.isinf(lam) else gaussian_alpha_tv(mu, lam) for lam in grid.values])
        worst = max(worst, float(np.max(np.abs(c.alphas - want))))
    verdict(record, "C2", worst <= 0.01, f"MC ground truth vs quadrature, max |d alpha| = {worst:.4f} (tol 0.01)")


def _instance(i: int):
    g = np.random.default_rng(1000 + i)
    d = int(g.integers(1, 6))
    nx, ny = int(g.integers(6, 40)), int(g.integers(6, 40))
    # every other instance lives on an integer lattice, so distance ties occur
    draw = (lambda n: g.integers(-3, 4, size=(n, d)).astype(float)) if i % 2 else (lambda n: g.normal(size=(n, d)))
    k = int(g.integers(1, min(nx, ny) - 1))
    return SampleSet(draw(nx)), SampleSet(draw(ny) + 0.3 * (i % 3)), k


def test_c3_extreme_equivalences(record):
    fails = {"a": 0, "b": 0, "c": 0}
    grid = make_lambda_grid(11)
    for i in range(100):
        x, y, k = _instance(i)
        cov = coverage_extreme(x, y, k)
        fails["a"] += prc_extreme(x, y, k, 1) != cov
        fams = score_families(x, y, methods=("knn", "ipr", "cov"), k=k)
        fails["b"] += estimate_curve(fams["knn"], grid).alpha_inf != cov
        for m, metric in (("ipr", ipr_extreme(x, y, k)), ("cov", cov)):
            s = fams[m]
            fails["c"] += s.classify(math.inf)[~s.from_x].mean() != metric
    for part, what in (("a", "PRC(k'=1) == Coverage"), ("b", "no-split kNN alpha_inf == Coverage"),
                       ("c", "iPR/Cov extremes == fnr of f_inf")):
        record(f"C3{part:<2} {'PASS' if not fails[part] else 'FAIL'}  {what}: {100 - fails[part]}/100 exact")
    assert not any(fails.values()), fails


def test_c4_consistency_spot_check(record):
    p, q = Gaussian.isotropic([0.0]), Gaussian.isotropic([1.0])
    alpha_1 = math.erfc(0.5 / math.sqrt(2.0))  # 1 - TV of N(0,1), N(1,1)
    bias, gap, excess = {}, {}, {}
    for j, n in enumerate((100, 1000, 10_000)):
        est, gaps, fixed = [], [], []
        for r in range(50):
            s = RngStream(4, j).child(r)
            x = SampleSet(p.sample(n, s.child(0).generator()))
            y = SampleSet(q.sample(n, s.child(1).generator()))
            tx, ty, sx, sy = split_samples(x, y, SplitSpec(0.5, True, 4), s.child(2).generator())
            k = resolve_k("sqrt_n", min(tx.n, ty.n), n)
            sc = score_families(tx, ty, sx, sy, ("knn",), k=k)["knn"]
            _, risk = argmin_threshold(sc, 1.0)
            est.append(min(1.0, risk))
            fixed.append(threshold_risk(sc, 1.0, 1.0))
            gaps.append(abs(fixed[-1] - risk))
        bias[n] = abs(float(np.mean(est)) - alpha_1)
        gap[n] = float(np.mean(gaps))
        excess[n] = float(np.mean(fixed)) - alpha_1
    ok_gap = gap[10_000] <= 0.02
    ok_bias = bias[100] > bias[1000] > bias[10_000]
    record(f"C4a  {'PASS' if ok_gap else 'FAIL'}  ERM risk vs gamma=lambda risk at N=1e4: {gap[10_000]:.4f} (tol 0.02)")
    record(f"C4b  {'PASS' if ok_bias else 'FAIL'}  |E alpha_1 - alpha_1| over N=1e2,1e3,1e4: "
           + ", ".join(f"{bias[n]:.4f}" for n in (100, 1000, 10_000))
           + " (risk excess at gamma=lambda: " + ", ".join(f"{excess[n]:.4f}" for n in (100, 1000, 10_000)) + ")")
    assert ok_gap and ok_bias


def test_c5_gmm_ordering(record):
    cfg = ExperimentConfig(suite="gmm", methods=("knn", "ipr", "cov"), regimes=(Regime(0.5, "sqrt_n"),),
                           repetitions=10, n=10_000, d=64, workers=WORKERS)
    res = run_gmm(cfg)
    v = {m: res.table.lookup("main", m, 0.5)["mean_iou"] for m in cfg.methods}
    ok = v["knn"] - v["ipr"] >= 0.05 and v["cov"] - v["ipr"] >= 0.05
    verdict(record, "C5", ok, f"GMM IoU knn={v['knn']:.3f} cov={v['cov']:.3f} ipr={v['ipr']:.3f} (margins >= 0.05)")


def test_c6_variability(record):
    cfg = ExperimentConfig(suite="variability", methods=("knn", "ipr", "cov"), ns=(100, 10_000), mu=0.21, d=64,
                           repetitions=100, regimes=(Regime(0.5, "sqrt_n"),), workers=WORKERS)
    res = run_variability(cfg)
    lam = np.array(res.extra["lambdas"])
    interior = (lam > 0) & np.isfinite(lam)
    frac = {}
    for m in cfg.methods:
        lo, hi = np.array(res.extra["alpha_std"][m][10_000]), np.array(res.extra["alpha_std"][m][100])
        frac[m] = float(np.mean(lo[interior] < hi[interior]))
    ok = all(f >= 0.9 for f in frac.values())
    verdict(record, "C6", ok, "sigma_alpha(n=1e4) < sigma_alpha(n=1e2) on "
            + ", ".join(f"{m} {100 * f:.0f}%" for m, f in frac.items()) + " of interior lambdas (need 90%)")


PROPERTIES = [
    test_estimator.test_exchange_symmetry,
    test_estimator.test_alpha_bounded_by_trivial,
    test_estimator.test_monotone_before_clipping,
    test_estimator.test_mean_curve_inherits_beta_relation,
    test_classifiers.test_swap_inverts_scores,
    test_extremes.test_family_extremes_match_published_metrics,
    test_analysis.test_iou_against_raster_and_symmetric,
    test_analysis.test_auc_against_raster,
    test_analysis.test_median_splits_area,
    test_analysis.test_eps_non_increasing,
    test_analysis.test_summarize_unit_square,
    test_linalg.test_sym_eig_residual_50,
    test_linalg.test_sym_eig_property,
    test_linalg.test_cholesky_reconstruction,
    test_ground_truth.test_gt_exchange_and_monotone,
    test_ground_truth.test_gt_reproducible,
]


def test_c7_property_suites(record):
    failed = []
    for fn in PROPERTIES:
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - collect, then report
            failed.append(f"{fn.__module__}.{fn.__name__}: {type(exc).__name__}")
    verdict(record, "C7", not failed, f"{len(PROPERTIES) - len(failed)}/{len(PROPERTIES)} property suites hold"
            + (f"; failing: {', '.join(failed)}" if failed else ""))


def test_c8_truncation_figures_not_reproducible(record):
    record("C8   N/A   not reproducible at desk scale: the StyleGAN truncation figures need FFHQ and "
           "StyleGAN2 inference; the hybrid suite on surrogate embeddings stands in (C9)")
    pytest.skip("not reproducible at desk scale")


def test_c9_hybrid_ordinal(record):
    start = time.monotonic()
    with tempfile.TemporaryDirectory() as tmp:
        conf = generate_surrogate(tmp, n=4000, d=64)
        series = {}
        for setting in ("a", "b"):
            cfg = ExperimentConfig.from_dict({**conf, "n": 2000, "dims": [1, 4, 16, 32, 64], "setting": setting,
                                              "repetitions": 1, "methods": ["knn", "ipr"], "workers": WORKERS})
            res = run_hybrid(cfg)
            series[setting] = {m: hybrid_series(res.table, m, HYBRID_REGIME.split) for m in cfg.methods}
    elapsed = time.monotonic() - start
    a, b = series["a"], series["b"]
    for s, v in series.items():
        print(f"  setting {s}: " + "; ".join(f"{m} " + " ".join(f"{x:.3f}" for x in v[m].values()) for m in v))
    ok_b = all(b["ipr"][d] < b["knn"][d] for d in (16, 32, 64))
    ok_a = a["ipr"][64] >= a["knn"][64]
    record(f"C9b  {'PASS' if ok_b else 'FAIL'}  setting b: iPR < kNN at d=16,32,64: "
           + ", ".join(f"{b['ipr'][d]:.3f}<{b['knn'][d]:.3f}" for d in (16, 32, 64)))
    record(f"C9a  {'PASS' if ok_a else 'FAIL'}  setting a: iPR >= kNN at d=64: {a['ipr'][64]:.3f} vs {a['knn'][64]:.3f}")
    ok_t = elapsed <= 15 * 60
    record(f"C9t  {'PASS' if ok_t else 'FAIL'}  hybrid runtime {elapsed:.0f} s (limit 900 s)")
    assert ok_a and ok_b and ok_t
