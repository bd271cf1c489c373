"""Frontier envelopes and scalar curve summaries (area, F-scores, median, PR@eps, IoU)."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import PRCurve, _json_default
from .errors import InvalidArgument, UndefinedMetric
from .estimator import pareto_clean


@dataclass(frozen=True)
class _Piecewise:
    """Piecewise-linear chain on [0, xs[-1]]: constant ys[0] left of xs[0], 0 right of xs[-1].

    ``xs`` is non-decreasing; a repeated x encodes a vertical jump, whose
    upper end is the value at x (upper semicontinuity) and lower end the
    right limit.
    """

    xs: np.ndarray
    ys: np.ndarray

    @property
    def x_max(self) -> float:
        return float(self.xs[-1])

    def _interp(self, x: np.ndarray, i: np.ndarray) -> np.ndarray:
        """Value on the open piece (xs[i-1], xs[i]) containing x."""
        x0, x1, y0, y1 = self.xs[i - 1], self.xs[i], self.ys[i - 1], self.ys[i]
        return y0 + (x - x0) / (x1 - x0) * (y1 - y0)

    def left(self, x: np.ndarray) -> np.ndarray:
        """Value at x, which is also the left limit."""
        x = np.asarray(x, dtype=np.float64)
        xv = np.atleast_1d(x)
        i = np.searchsorted(self.xs, xv, side="left")
        out = np.zeros(xv.shape)
        out[i == 0] = self.ys[0]
        mid = (i > 0) & (i < self.xs.size)
        im = i[mid]
        on = self.xs[im] == xv[mid]
        out[mid] = np.where(on, self.ys[im], self._interp(xv[mid], np.maximum(im, 1)))
        return out.reshape(x.shape)

    __call__ = left

    def right(self, x: np.ndarray) -> np.ndarray:
        """Right limit at x."""
        x = np.asarray(x, dtype=np.float64)
        xv = np.atleast_1d(x)
        j = np.searchsorted(self.xs, xv, side="right")
        out = np.zeros(xv.shape)
        out[j == 0] = self.ys[0]
        mid = (j > 0) & (j < self.xs.size)
        jm = j[mid]
        on = self.xs[jm - 1] == xv[mid]
        out[mid] = np.where(on, self.ys[jm - 1], self._interp(xv[mid], jm))
        return out.reshape(x.shape)


@dataclass(frozen=True)
class Envelope(_Piecewise):
    """Upper boundary alpha(beta) of a down-closed PR region.

    ``xs`` (beta) is non-decreasing and ``ys`` (alpha) non-increasing along
    the chain, so vertical and horizontal runs are allowed. Left of the first
    point the frontier is extended horizontally to beta = 0; right of the
    last point it drops vertically to 0.
    """

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.float64)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size == 0:
            raise InvalidArgument("envelope needs at least one (beta, alpha) point")
        if np.any(np.diff(xs) < 0) or np.any(np.diff(ys) > 0) or xs[0] < 0 or ys[-1] < 0:
            raise InvalidArgument("envelope points must have non-decreasing beta >= 0 and non-increasing alpha >= 0")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def betas(self) -> np.ndarray:
        return self.xs

    @property
    def alphas(self) -> np.ndarray:
        return self.ys

    def swapped(self) -> "Envelope":
        """The transposed region, i.e. beta as a function of alpha."""
        return _chain(self.ys[::-1], self.xs[::-1])


def _chain(xs: np.ndarray, ys: np.ndarray) -> Envelope:
    """Envelope from a monotone point chain, dropping redundant points."""
    xs = np.maximum.accumulate(np.asarray(xs, dtype=np.float64))
    ys = np.minimum.accumulate(np.asarray(ys, dtype=np.float64))
    keep = np.ones(xs.size, bool)
    keep[1:] = (np.diff(xs) != 0) | (np.diff(ys) != 0)
    xs, ys = xs[keep], ys[keep]
    # A leading horizontal run or a trailing drop to 0 repeats the implicit extensions.
    lo = 0
    while lo + 1 < xs.size and ys[lo + 1] == ys[lo]:
        lo += 1
    hi = xs.size
    if hi - lo > 1 and ys[hi - 1] == 0 and xs[hi - 1] == xs[hi - 2]:
        hi -= 1
    return Envelope(xs[lo:hi], ys[lo:hi])


def _upper(f: _Piecewise, g: _Piecewise) -> Envelope:
    """Exact pointwise maximum of two envelopes, jumps and crossings included."""
    xb = np.unique(np.concatenate([[0.0], f.xs, g.xs]))
    fl, gl, fr, gr = f.left(xb), g.left(xb), f.right(xb), g.right(xb)
    top, bottom = np.maximum(fl, gl), np.maximum(fr, gr)
    du, dv = (fr - gr)[:-1], (fl - gl)[1:]
    k = np.flatnonzero(du * dv < 0)
    t = du[k] / (du[k] - dv[k])
    xc = xb[k] + t * (xb[k + 1] - xb[k])
    yc = fr[k] + t * (fl[k + 1] - fr[k])
    n = xb.size
    key = np.concatenate([3 * np.arange(n), 3 * np.arange(n) + 1, 3 * k + 2])
    X = np.concatenate([xb, xb, xc])[np.argsort(key, kind="stable")]
    Y = np.concatenate([top, bottom, yc])[np.argsort(key, kind="stable")]
    return _chain(X, Y)


def build_envelope(curve: PRCurve) -> Envelope:
    """Boundary of the down-closure of the curve's polyline in lambda order.

    A monotone chain (alpha non-decreasing and beta non-increasing in lambda,
    which ERM and mean curves always are) is its own boundary. Otherwise the
    boundary is the exact maximum of the staircase over the points and the
    chords of consecutive points that move up-left.
    """
    if len(curve) == 0:
        raise InvalidArgument("cannot build an envelope from an empty curve")
    order = np.argsort(curve.lambdas, kind="stable")
    b, a = curve.betas[order], curve.alphas[order]
    if np.all(np.diff(b) <= 0) and np.all(np.diff(a) >= 0):
        return _chain(b[::-1], a[::-1])
    clean = pareto_clean(curve)
    pb, pa = clean.betas, clean.alphas
    env = _chain(np.repeat(pb, 2)[:-1], np.repeat(pa, 2)[1:]) if pb.size > 1 else _chain(pb, pa)
    db, da = np.diff(b), np.diff(a)
    for i in np.flatnonzero(db * da < 0):
        lo, hi = (i + 1, i) if db[i] < 0 else (i, i + 1)
        env = _upper(env, Envelope(np.array([b[lo], b[hi]]), np.array([a[lo], a[hi]])))
    return env


def _breaks(fs: list[_Piecewise], upto: float) -> np.ndarray:
    pts = np.concatenate([[0.0, upto]] + [f.xs for f in fs])
    return np.unique(pts[(pts >= 0) & (pts <= upto)])


def _integrate_minmax(f: _Piecewise, g: _Piecewise) -> tuple[float, float]:
    """Exact integrals of min(f, g) and max(f, g) over [0, inf)."""
    upto = max(f.x_max, g.x_max)
    grid = _breaks([f, g], upto)
    if grid.size < 2:
        return 0.0, 0.0
    u, v = grid[:-1], grid[1:]
    fu, fv, gu, gv = f.right(u), f.left(v), g.right(u), g.left(v)
    du, dv = fu - gu, fv - gv
    w = v - u
    lo = 0.5 * w * (np.minimum(fu, gu) + np.minimum(fv, gv))
    hi = 0.5 * w * (np.maximum(fu, gu) + np.maximum(fv, gv))
    cross = du * dv < 0
    if cross.any():
        # Split at the crossing point; each side is then a single linear piece.
        t = du[cross] / (du[cross] - dv[cross])
        yc = fu[cross] + t * (fv[cross] - fu[cross])
        wl, wr = t * w[cross], (1 - t) * w[cross]
        lo[cross] = 0.5 * wl * (np.minimum(fu, gu)[cross] + yc) + 0.5 * wr * (yc + np.minimum(fv, gv)[cross])
        hi[cross] = 0.5 * wl * (np.maximum(fu, gu)[cross] + yc) + 0.5 * wr * (yc + np.maximum(fv, gv)[cross])
    return float(lo.sum()), float(hi.sum())


def auc(env: Envelope) -> float:
    """Area of the down-closed region under the envelope."""
    return float(np.sum(0.5 * np.diff(env.xs) * (env.ys[1:] + env.ys[:-1])) + env.xs[0] * env.ys[0])


def iou(a: Envelope, b: Envelope) -> float:
    inter, union = _integrate_minmax(a, b)
    if union <= 0:
        raise UndefinedMetric("IoU undefined: both regions have zero area")
    return min(1.0, inter / union)


def f_score(curve: PRCurve, b: float) -> float:
    """max over curve points of (b^2 + 1) / (b^2 / alpha + 1 / beta); 0 where alpha or beta is 0."""
    if not b > 0:
        raise InvalidArgument(f"b must be positive, got {b}")
    a, be = curve.alphas, curve.betas
    ok = (a > 0) & (be > 0)
    if not ok.any():
        return 0.0
    b2 = b * b
    vals = (b2 + 1.0) / (b2 / a[ok] + 1.0 / be[ok])
    return float(min(1.0, vals.max()))


def _area_below(env: Envelope, lam: float) -> float:
    """Area of the part of the region lying under the line alpha = lam * beta."""
    if lam <= 0:
        return 0.0
    if math.isinf(lam):
        return auc(env)
    line = _Piecewise(np.array([0.0, env.x_max]), np.array([0.0, lam * env.x_max]))
    return _integrate_minmax(env, line)[0]


def _ray_hit(env: Envelope, lam: float) -> tuple[float, float]:
    """Point where the ray alpha = lam * beta leaves the region."""
    xs, ys = env.xs, env.ys
    if ys[-1] >= lam * xs[-1]:
        # Exits through the vertical drop at beta_max.
        return lam * xs[-1], float(xs[-1])
    if ys[0] <= lam * xs[0]:
        # Exits through the horizontal extension.
        return float(ys[0]), float(ys[0] / lam)
    h = ys - lam * xs
    j = int(np.flatnonzero(h <= 0)[0])
    t = h[j - 1] / (h[j - 1] - h[j])
    beta = xs[j - 1] + t * (xs[j] - xs[j - 1])
    return float(lam * beta), float(beta)


@dataclass(frozen=True)
class MedianPoint:
    lam: float
    alpha: float
    beta: float


def pr_median(env: Envelope) -> MedianPoint:
    """Ray alpha = lam * beta splitting the region into two equal areas, and its frontier point.

    Bisection on the angle arctan(lam) down to floating-point resolution.
    """
    total = auc(env)
    if total <= 0:
        raise UndefinedMetric("PR median undefined: region has zero area")
    half = 0.5 * total
    lo, hi = 0.0, 0.5 * math.pi
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if _area_below(env, math.tan(mid)) < half:
            lo = mid
        else:
            hi = mid
    lam = math.tan(0.5 * (lo + hi))
    alpha, beta = _ray_hit(env, lam)
    return MedianPoint(lam, alpha, beta)


def pr_at_eps(env: Envelope, eps: float = 0.05) -> float:
    """Largest alpha with (beta = eps, alpha) in the region."""
    if not 0 < eps < 1:
        raise InvalidArgument(f"eps must lie in (0, 1), got {eps}")
    return float(env(eps))


def beta_at_eps(env: Envelope, eps: float = 0.05) -> float:
    """Largest beta with (beta, alpha = eps) in the region."""
    return pr_at_eps(env.swapped(), eps)


@dataclass(frozen=True)
class SummaryReport:
    auc: float
    f8: float
    f1_8: float
    pr_median: dict
    alpha_at_eps: float
    beta_at_eps: float
    alpha_inf: float
    beta_0: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict(), default=_json_default, indent=2) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def summarize(curve: PRCurve, eps: float = 0.05, b: float = 8.0) -> SummaryReport:
    """All scalar digests of a curve. The median is null when the region is empty."""
    env = build_envelope(curve)
    try:
        med = pr_median(env)
        median = {"lambda": med.lam, "alpha": med.alpha, "beta": med.beta}
    except UndefinedMetric:
        median = {"lambda": None, "alpha": None, "beta": None}
    return SummaryReport(
        auc=auc(env),
        f8=f_score(curve, b),
        f1_8=f_score(curve, 1.0 / b),
        pr_median=median,
        alpha_at_eps=pr_at_eps(env, eps),
        beta_at_eps=beta_at_eps(env, eps),
        alpha_inf=float(env.ys[0]),
        beta_0=float(env.xs[-1]),
    )
