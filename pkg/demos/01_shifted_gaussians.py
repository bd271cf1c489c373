"""Curves between two shifted Gaussians, against the Monte-Carlo truth.

Run: python3 demos/01_shifted_gaussians.py [out_dir]
"""

import sys
from pathlib import Path

from prdkit import SampleSet, SplitSpec, build_envelope, estimate_curve, iou, make_lambda_grid, score_families, split_samples, summarize
from prdkit.core import RngStream
from prdkit.ground_truth import GtConfig, gt_curve
from prdkit.plotting import write_svg
from prdkit.synthetic import ShiftConfig, shift_pair

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
d, n, mu = 16, 2000, 0.3
grid = make_lambda_grid(101)
rng = RngStream(0)

p, q = shift_pair(ShiftConfig(mu, d, n))
x = SampleSet(p.sample(n, rng.child(0).generator()), "P")
y = SampleSet(q.sample(n, rng.child(1).generator()), "Q")

# Half of each set trains the classifiers, the other half is scored.
tx, ty, sx, sy = split_samples(x, y, SplitSpec(0.5, True, 0))
k = int(round(tx.n ** 0.5))
scores = score_families(tx, ty, sx, sy, k=k)

truth = gt_curve(p, q, GtConfig(100_000, grid, seed=0))
truth_env = build_envelope(truth)
print(f"truth: auc={summarize(truth).auc:.3f}")

curves = {"truth": truth}
for m, s in scores.items():
    c = estimate_curve(s, grid, method=m)
    curves[m] = c
    r = summarize(c)
    print(f"{m:>4}: IoU vs truth {iou(truth_env, build_envelope(c)):.3f}  auc {r.auc:.3f}  "
          f"alpha_inf {r.alpha_inf:.3f}  beta_0 {r.beta_0:.3f}")

path = write_svg(list(curves.values()), out / "shift.svg", list(curves), title=f"d={d}, mu={mu}")
print("figure:", path)
