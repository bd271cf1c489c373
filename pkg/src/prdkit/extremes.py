"""Published scalar extreme-precision metrics.

Each function estimates alpha_inf(P, Q) from real samples ``x`` and generated
samples ``y``; swapping the arguments gives the extreme recall beta_0.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .core import SampleSet, SplitSpec, split_samples
from .errors import InvalidArgument
from .neighbors import _as_array, iter_distance_blocks, self_radii


@dataclass(frozen=True)
class ExtremeReport:
    method: str
    alpha_inf: float
    beta_0: float
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _k_ok(k: int, n: int, name: str) -> None:
    if int(k) != k or k < 1:
        raise InvalidArgument(f"k must be a positive integer, got {k}")
    if k > n - 1:
        raise InvalidArgument(f"k={k} too large: {name} has only {n} points")


def ipr_extreme(x, y, k: int) -> float:
    """Fraction of y inside at least one k-NN ball of x (radii computed within x)."""
    X, Y = _as_array(x), _as_array(y)
    _k_ok(k, X.shape[0], "x")
    r = self_radii(X, k)
    hit = np.zeros(Y.shape[0], bool)
    for i0, i1, dist in iter_distance_blocks(Y, X):
        hit[i0:i1] = np.any(dist <= r[None, :], axis=1)
    return float(hit.mean())


def _coverage_counts(x, y, k: int) -> np.ndarray:
    """For each y: number of x inside y's k-NN ball computed within y."""
    X, Y = _as_array(x), _as_array(y)
    _k_ok(k, Y.shape[0], "y")
    r = self_radii(Y, k)
    counts = np.empty(Y.shape[0], np.int64)
    for i0, i1, dist in iter_distance_blocks(Y, X):
        counts[i0:i1] = np.count_nonzero(dist <= r[i0:i1, None], axis=1)
    return counts


def coverage_extreme(x, y, k: int) -> float:
    """Fraction of y whose k-NN ball (within y) contains at least one x."""
    return float(np.mean(_coverage_counts(x, y, k) >= 1))


def eas_extreme(x, y, k: int) -> float:
    return min(ipr_extreme(x, y, k), coverage_extreme(x, y, k))


def prc_extreme(x, y, k: int, kprime: int = 3) -> float:
    """Fraction of y whose k-NN ball (within y) contains at least ``kprime`` x."""
    if int(kprime) != kprime or kprime < 1:
        raise InvalidArgument(f"kprime must be a positive integer, got {kprime}")
    return float(np.mean(_coverage_counts(x, y, k) >= kprime))


def ppr_extreme(x, y, radius: float) -> float:
    """Mean over y of 1 - prod_x (1 - tent(|y - x| / radius))."""
    if not radius > 0:
        raise InvalidArgument(f"radius must be positive, got {radius}")
    X, Y = _as_array(x), _as_array(y)
    out = np.empty(Y.shape[0])
    for i0, i1, dist in iter_distance_blocks(Y, X):
        tau = np.maximum(0.0, 1.0 - dist / radius)
        # prod(1 - tau) underflows harmlessly to 0; any tau == 1 gives exactly 0.
        out[i0:i1] = 1.0 - np.prod(1.0 - tau, axis=1)
    return float(out.mean())


def default_ppr_radius(x, k: int = 4) -> float:
    """Mean distance to the ``k``-th nearest neighbor within x."""
    return float(np.mean(self_radii(_as_array(x), k)))


EXTREMES = ("ipr", "cov", "eas", "prc", "ppr")


def extreme_report(
    x: SampleSet,
    y: SampleSet,
    method: str,
    k: int = 3,
    kprime: int = 3,
    radius: float | None = None,
    split: SplitSpec | None = None,
) -> ExtremeReport:
    """alpha_inf and beta_0 for one published metric.

    With a split, the reference side comes from the training half and the
    evaluated side from the test half of the other set.
    """
    if method not in EXTREMES:
        raise InvalidArgument(f"unknown extreme method {method!r}; expected one of {EXTREMES}")
    if split is not None and split.enabled:
        tx, ty, sx, sy = split_samples(x, y, split)
    else:
        tx, ty, sx, sy = x, y, x, y

    def one(real, fake):
        if method == "ipr":
            return ipr_extreme(real, fake, k)
        if method == "cov":
            return coverage_extreme(real, fake, k)
        if method == "eas":
            return eas_extreme(real, fake, k)
        if method == "prc":
            return prc_extreme(real, fake, k, kprime)
        r = radius if radius is not None else default_ppr_radius(real)
        return ppr_extreme(real, fake, r)

    alpha = one(tx, sy)
    beta = one(ty, sx)
    params = {"k": k}
    if method == "prc":
        params["kprime"] = kprime
    if method == "ppr":
        params = {"radius": radius if radius is not None else "auto(4-NN mean)"}
    if split is not None and split.enabled:
        params["split"] = split.fraction
    return ExtremeReport(method, alpha, beta, params)
