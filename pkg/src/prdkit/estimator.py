"""Empirical-risk-minimization sweep turning scores into a PR curve.

For a fixed set of test scores the classifier family, completed with the two
trivial classifiers, is exactly the set of "prefix" classifiers: assign to P
every test point whose score is <= t, for t ranging over the distinct score
values, plus the empty prefix. Loose and strict thresholds at a value t are
both prefixes (the strict one is the prefix ending just before t), so the
sweep below is an exact minimization over the family.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifiers import ScoredTestSet
from .core import LambdaGrid, PRCurve
from .errors import InvalidArgument


@dataclass(frozen=True)
class SweepTable:
    """Distinct sorted scores and cumulative counts of each origin at ``score <= t``.

    Row 0 is the empty prefix (nothing assigned to P).
    """

    values: np.ndarray
    cum_x: np.ndarray
    cum_y: np.ndarray
    n_x: int
    n_y: int

    @classmethod
    def build(cls, scores: ScoredTestSet) -> "SweepTable":
        sx, sy = scores.scores_x, scores.scores_y
        if sx.size == 0 or sy.size == 0:
            raise InvalidArgument("both test origins need at least one point")
        values = np.unique(np.concatenate([sx, sy]))
        cx = np.searchsorted(np.sort(sx), values, side="right")
        cy = np.searchsorted(np.sort(sy), values, side="right")
        return cls(
            values=np.concatenate([[-np.inf], values]),
            cum_x=np.concatenate([[0], cx]),
            cum_y=np.concatenate([[0], cy]),
            n_x=sx.size,
            n_y=sy.size,
        )

    @property
    def fpr(self) -> np.ndarray:
        """Fraction of X test points assigned to Q, per prefix."""
        return 1.0 - self.cum_x / self.n_x

    @property
    def fnr(self) -> np.ndarray:
        """Fraction of Y test points assigned to P, per prefix."""
        return self.cum_y / self.n_y


def sweep_alphas(table: SweepTable, lambdas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Minimal weighted risk per lambda, returned as (alpha, beta) before clipping.

    The endpoints are the errors of the extreme members: alpha at +inf is the
    fnr of f_inf (all finite scores go to P) and beta at 0 the fpr of f_0
    (only zero scores go to P), as long as that member is admissible, i.e.
    makes no false positive (resp. no false negative). Otherwise they fall
    back to the constrained minimum over the family.
    """
    fpr, fnr = table.fpr, table.fnr
    vals = table.values
    lambdas = np.asarray(lambdas, dtype=np.float64)
    alpha = np.empty(lambdas.size)
    beta = np.empty(lambdas.size)
    finite = np.isfinite(lambdas) & (lambdas > 0)
    if finite.any():
        lam = lambdas[finite]
        risks = lam[:, None] * fpr[None, :] + fnr[None, :]
        alpha[finite] = risks.min(axis=1)
        beta[finite] = alpha[finite] / lam
    zero = lambdas == 0
    if zero.any():
        j0 = int(np.searchsorted(vals, 0.0, side="right")) - 1
        alpha[zero] = 0.0
        beta[zero] = fpr[j0] if fnr[j0] == 0 else fpr[fnr == 0].min()
    inf = np.isposinf(lambdas)
    if inf.any():
        fin = np.flatnonzero(np.isfinite(vals))
        j = int(fin[-1]) if fin.size else 0
        alpha[inf] = fnr[j] if fpr[j] == 0 else fnr[fpr == 0].min()
        beta[inf] = 0.0
    return alpha, beta


def estimate_curve(scores: ScoredTestSet, grid: LambdaGrid, **metadata) -> PRCurve:
    """ERM estimate of alpha over the grid; beta = alpha / lambda."""
    table = SweepTable.build(scores)
    alpha, beta = sweep_alphas(table, grid.values)
    alpha = np.clip(alpha, 0.0, 1.0)
    beta = np.clip(beta, 0.0, 1.0)
    meta = {**scores.params, **metadata}
    return PRCurve(grid.values, alpha, beta, meta)


def threshold_risk(scores: ScoredTestSet, gamma: float, lam: float, strict: bool = False) -> float:
    """Empirical weighted risk lam * fpr + fnr of the single family member ``gamma``."""
    f = scores.classify(gamma, strict=strict)
    fpr = 1.0 - f[scores.from_x].mean()
    fnr = f[~scores.from_x].mean()
    return float(lam * fpr + fnr)


def argmin_threshold(scores: ScoredTestSet, lam: float) -> tuple[float, float]:
    """Score threshold reaching the ERM minimum at ``lam``, and that minimal risk."""
    table = SweepTable.build(scores)
    risks = lam * table.fpr + table.fnr
    j = int(np.argmin(risks))
    return float(table.values[j]), float(risks[j])


def pareto_clean(curve: PRCurve) -> PRCurve:
    """Drop points weakly dominated in (beta, alpha) by another point.

    Survivors keep their lambda labels and are returned in increasing beta
    order (alpha then strictly decreasing). Exact duplicates keep one copy.
    """
    a, b = curve.alphas, curve.betas
    # Sort by beta descending, alpha descending; keep a point iff its alpha beats
    # every point with larger-or-equal beta seen so far.
    order = np.lexsort((-a, -b))
    keep = []
    best = -np.inf
    for i in order:
        if a[i] > best:
            keep.append(i)
            best = a[i]
    keep = np.array(keep[::-1], dtype=int)
    return PRCurve(curve.lambdas[keep], a[keep], b[keep], dict(curve.metadata))


@dataclass(frozen=True)
class CurveEnsemble:
    repetitions: list[PRCurve] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.repetitions:
            lam0 = self.repetitions[0].lambdas
            for c in self.repetitions[1:]:
                if c.lambdas.shape != lam0.shape or not np.array_equal(c.lambdas, lam0):
                    raise InvalidArgument("all curves of an ensemble must share one lambda grid")

    def __len__(self) -> int:
        return len(self.repetitions)


def aggregate(ensemble: CurveEnsemble | list[PRCurve]) -> tuple[PRCurve, PRCurve, PRCurve]:
    """Per-lambda mean curve and mean +/- population standard deviation curves."""
    if not isinstance(ensemble, CurveEnsemble):
        ensemble = CurveEnsemble(list(ensemble))
    if len(ensemble) == 0:
        raise InvalidArgument("cannot aggregate an empty ensemble")
    curves = ensemble.repetitions
    lam = curves[0].lambdas
    A = np.stack([c.alphas for c in curves])
    B = np.stack([c.betas for c in curves])
    ma, mb = A.mean(axis=0), B.mean(axis=0)
    sa, sb = A.std(axis=0), B.std(axis=0)
    meta = {**curves[0].metadata, "repetitions": len(curves)}
    mean = PRCurve(lam, ma, mb, {**meta, "kind": "mean"})
    plus = PRCurve(lam, np.clip(ma + sa, 0, 1), np.clip(mb + sb, 0, 1), {**meta, "kind": "plus_sigma"})
    minus = PRCurve(lam, np.clip(ma - sa, 0, 1), np.clip(mb - sb, 0, 1), {**meta, "kind": "minus_sigma"})
    return mean, plus, minus


def alpha_std(ensemble: CurveEnsemble | list[PRCurve]) -> np.ndarray:
    curves = ensemble.repetitions if isinstance(ensemble, CurveEnsemble) else list(ensemble)
    return np.stack([c.alphas for c in curves]).std(axis=0)
