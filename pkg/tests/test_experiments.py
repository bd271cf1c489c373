import json

import numpy as np
import pytest

from prdkit.core import PRCurve
from prdkit.errors import InvalidArgument, ParseError
from prdkit.experiments import (
    ExperimentConfig,
    Regime,
    generate_surrogate,
    hybrid_series,
    run_gmm,
    run_hybrid,
    run_shift,
    run_suite,
    run_variability,
)

SMALL = dict(n=120, d=4, lambdas=21, n_gt=4000, repetitions=2, methods=("knn", "cov"))


def test_config_validation(tmp_path):
    with pytest.raises(ParseError, match="unknown config keys"):
        ExperimentConfig.from_dict({"suite": "shift", "colour": 1})
    with pytest.raises(InvalidArgument):
        ExperimentConfig(suite="nope")
    with pytest.raises(InvalidArgument):
        ExperimentConfig(repetitions=0)
    with pytest.raises(InvalidArgument):
        ExperimentConfig(methods=("svm",))
    p = tmp_path / "c.json"
    p.write_text('{"suite": "gmm", "regimes": [{"split": null, "k": 4}]}')
    cfg = ExperimentConfig.from_json(p)
    assert cfg.regimes == (Regime(None, 4),)
    p.write_text("{")
    with pytest.raises(ParseError, match="line 1"):
        ExperimentConfig.from_json(p)


def test_shift_is_reproducible_and_writes_outputs(tmp_path):
    cfg = ExperimentConfig(suite="shift", mus=(0.38,), regimes=(Regime(0.5, "sqrt_n"),), **SMALL)
    a = run_suite(cfg, tmp_path / "a")
    b = run_shift(cfg)
    assert a.table.rows == b.table.rows
    for r in a.table.rows:
        assert 0.0 <= r["mean_iou"] <= 1.0 and r["std_iou"] >= 0.0
    out = tmp_path / "a"
    assert {p.name for p in out.iterdir()} == {"curves", "iou_table.csv", "summary.json", "config_echo.json"}
    assert json.loads((out / "config_echo.json").read_text())["mus"] == [0.38]
    assert (out / "iou_table.csv").read_text().splitlines()[0].startswith("mu,method,split")
    mean = PRCurve.from_csv(out / "curves" / "shift_mu0.38_split_ksqrt_n_knn_mean.csv")
    assert len(mean) == 23


def test_parallel_matches_sequential():
    cfg = ExperimentConfig(suite="shift", mus=(0.21,), regimes=(Regime(None, 5),), **SMALL)
    seq = run_shift(cfg)
    par = run_shift(ExperimentConfig(**{**cfg.to_dict(), "regimes": cfg.regimes, "workers": 2}))
    assert seq.table.rows == par.table.rows


def test_variability_single_repetition_has_zero_sigma():
    cfg = ExperimentConfig(suite="variability", ns=(20, 40), **{**SMALL, "repetitions": 1})
    res = run_variability(cfg)
    for m in cfg.methods:
        for n in cfg.ns:
            assert np.all(np.array(res.extra["alpha_std"][m][n]) == 0.0)
    mean = res.curves["variability_n40_knn_mean"]
    lam = mean.lambdas
    fin = (lam > 0) & np.isfinite(lam)
    np.testing.assert_allclose(mean.betas[fin], np.minimum(1.0, mean.alphas[fin] / lam[fin]), rtol=1e-12)


def test_gmm_runs():
    res = run_gmm(ExperimentConfig(suite="gmm", regimes=(Regime(None, "sqrt_n"),), **{**SMALL, "d": 2}))
    assert {r["method"] for r in res.table.rows} == {"knn", "cov"}


def test_hybrid_self_check(tmp_path):
    # same file on both sides at d=1: the truth is the unit square. Checked in
    # the consistent split regime; the no-split k=4 regime is biased by design.
    conf = generate_surrogate(tmp_path, n=500, d=8, psis=(1.0,))
    cfg = ExperimentConfig.from_dict({**conf, "dims": [1, 4], "setting": "b", "n_gt": 20000, "lambdas": 41,
                                      "repetitions": 1, "regimes": [{"split": 0.5, "k": "sqrt_n"}]})
    res = run_hybrid(cfg)
    for m in cfg.methods:
        s = hybrid_series(res.table, m, 0.5)
        assert set(s) == {1, 4}
        print(f"hybrid self-check d=1 {m}: {s[1]:.3f}")
        assert s[1] == pytest.approx(1.0, abs=0.05)


def test_hybrid_errors(tmp_path):
    conf = generate_surrogate(tmp_path, n=50, d=4, psis=(1.0,))
    with pytest.raises(InvalidArgument, match="exceeds"):
        run_hybrid(ExperimentConfig.from_dict({**conf, "dims": [8]}))
    with pytest.raises(InvalidArgument):
        run_hybrid(ExperimentConfig(suite="hybrid"))
    with pytest.raises(InvalidArgument, match="setting c"):
        run_hybrid(ExperimentConfig.from_dict({**conf, "dims": [2], "setting": "c"}))


def test_table_skips_undefined_iou():
    from prdkit.experiments import IoUTable

    t = IoUTable("d")
    t.add(1, "knn", Regime(None, 4), 4, [0.5, float("nan"), 0.7], 0.6)
    row = t.lookup(1, "knn", None)
    assert row["mean_iou"] == pytest.approx(0.6) and row["undefined"] == 1 and row["repetitions"] == 3
    t.add(2, "knn", Regime(None, 4), 4, [float("nan")], float("nan"))
    assert np.isnan(t.lookup(2, "knn", None)["mean_iou"])
    assert np.isnan(hybrid_series(t, "knn", None)[2])
