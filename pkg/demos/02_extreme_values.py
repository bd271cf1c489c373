"""Published single-number metrics are the endpoints of curves.

Coverage (the share of Y points whose k-NN ball within Y holds a point of X)
equals the kNN curve's value at lambda = +inf when no split is used, and PRC
with k'=1 collapses to it.
"""

import numpy as np

from prdkit import SampleSet, estimate_curve, make_lambda_grid, score_families
from prdkit.extremes import coverage_extreme, extreme_report, ipr_extreme, prc_extreme

rng = np.random.default_rng(7)
# Q drops one of P's two modes and adds a mode of its own.
x = SampleSet(np.vstack([rng.normal(0, 1, (300, 4)), rng.normal(6, 1, (300, 4))]), "P")
y = SampleSet(np.vstack([rng.normal(0, 1, (300, 4)), rng.normal(-6, 1, (300, 4))]), "Q")
k = 5

for m in ("ipr", "cov", "eas", "prc", "ppr"):
    r = extreme_report(x, y, m, k=k)
    print(f"{m:>4}: alpha_inf={r.alpha_inf:.3f} beta_0={r.beta_0:.3f}")

fams = score_families(x, y, methods=("knn", "ipr"), k=k)
curve = estimate_curve(fams["knn"], make_lambda_grid(101))
print("kNN curve alpha_inf :", curve.alpha_inf)
print("coverage            :", coverage_extreme(x, y, k))
print("PRC with k'=1       :", prc_extreme(x, y, k, 1))
s = fams["ipr"]
print("iPR metric          :", ipr_extreme(x, y, k), "= fnr of f_inf", s.classify(np.inf)[~s.from_x].mean())
