"""Hybrid suite on synthetic surrogate embeddings (a small version of C9).

Gaussians are fitted to PCA projections of the embedding files, so the
truth is known at every projection dimension.
"""

import sys
import tempfile

from prdkit.experiments import HYBRID_REGIME, ExperimentConfig, generate_surrogate, hybrid_series, run_hybrid

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp()
conf = generate_surrogate(out, n=1500, d=32, psis=(0.5, 0.9, 1.0))
print("files in", out)

for setting, what in (("a", "reference vs truncated"), ("b", "each file vs itself")):
    cfg = ExperimentConfig.from_dict({**conf, "n": 800, "dims": [1, 4, 16, 32], "setting": setting,
                                      "repetitions": 1, "methods": ["knn", "ipr", "cov"]})
    table = run_hybrid(cfg).table
    print(f"setting {setting} ({what}), mean IoU per d:")
    for m in cfg.methods:
        s = hybrid_series(table, m, HYBRID_REGIME.split)
        print(f"  {m:>4}: " + "  ".join(f"d={d}:{v:.2f}" for d, v in s.items()))
