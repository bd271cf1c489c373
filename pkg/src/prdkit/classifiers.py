"""Per-test-point scores whose thresholding realizes each classifier family.

Every family is reduced to a ratio ``s(z) = c_Y(z) / c_X(z)`` of two matching
counts. The classifier with parameter gamma assigns z to P (output 1) when
``gamma * c_X(z) >= c_Y(z)``, i.e. when ``s(z) <= gamma``; at gamma = +inf it
assigns to P exactly the points with a finite score. Conventions:

* ``c_Y = 0``            -> s = 0 (including 0/0: no evidence means "real")
* ``c_X = 0, c_Y > 0``   -> s = +inf

The four families differ only in the counts:

knn  closed k-NN ball of z in X u Y; counts of X and Y members.
kde  fixed-radius ball of z; counts of X and Y members.
ipr  number of X points (resp. Y points) whose own within-class k-NN ball contains z.
cov  X points inside z's k-NN ball computed within Y (denominator) and Y points
     inside z's k-NN ball computed within X (numerator).

When the test sets are the training sets (no split) a test point never counts
as its own neighbor for radius purposes but is a member of its own balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import SampleSet
from .errors import InvalidArgument
from .neighbors import _as_array, block_rows, iter_distance_blocks, kth_smallest

METHODS = ("knn", "kde", "ipr", "cov")


@dataclass(frozen=True)
class ScoredTestSet:
    """Scores of the test points, with a flag telling which set each came from."""

    scores: np.ndarray
    from_x: np.ndarray
    params: dict = field(default_factory=dict)
    count_x: np.ndarray | None = field(default=None, repr=False, compare=False)
    count_y: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        s = np.asarray(self.scores, dtype=np.float64)
        fx = np.asarray(self.from_x, dtype=bool)
        if s.shape != fx.shape or s.ndim != 1:
            raise InvalidArgument("scores and origin flags must be 1-D and aligned")
        if np.any(np.isnan(s)) or np.any(s < 0):
            raise InvalidArgument("scores must be non-negative extended reals")
        object.__setattr__(self, "scores", s)
        object.__setattr__(self, "from_x", fx)

    @property
    def scores_x(self) -> np.ndarray:
        return self.scores[self.from_x]

    @property
    def scores_y(self) -> np.ndarray:
        return self.scores[~self.from_x]

    @classmethod
    def from_parts(cls, scores_x: Sequence[float], scores_y: Sequence[float], **params) -> "ScoredTestSet":
        sx, sy = np.asarray(scores_x, float), np.asarray(scores_y, float)
        return cls(
            np.concatenate([sx, sy]),
            np.concatenate([np.ones(sx.size, bool), np.zeros(sy.size, bool)]),
            dict(params),
        )

    def classify(self, gamma: float, strict: bool = False) -> np.ndarray:
        """Output of the family member with parameter ``gamma`` (1 = assigned to P)."""
        if np.isposinf(gamma):
            return np.isfinite(self.scores)
        return self.scores < gamma if strict else self.scores <= gamma

    def swapped(self) -> "ScoredTestSet":
        """Scores with the roles of the two sets exchanged (s -> 1/s)."""
        with np.errstate(divide="ignore"):
            inv = np.where(self.scores == 0, np.inf, 1.0 / self.scores)
        inv = np.where(np.isposinf(self.scores), 0.0, inv)
        return ScoredTestSet(inv, ~self.from_x, dict(self.params), self.count_y, self.count_x)


@dataclass(frozen=True)
class FamilyConfig:
    method: str
    k: int | str = "sqrt"
    sigma: float | str = "auto"

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise InvalidArgument(f"unknown method {self.method!r}; expected one of {METHODS}")
        if isinstance(self.k, str):
            if self.k not in K_RULES:
                raise InvalidArgument(f"unknown k rule {self.k!r}")
        elif int(self.k) != self.k or self.k < 1:
            raise InvalidArgument(f"k must be a positive integer, got {self.k}")
        if isinstance(self.sigma, str):
            if self.sigma != "auto":
                raise InvalidArgument(f"sigma must be positive or 'auto', got {self.sigma!r}")
        elif not self.sigma > 0:
            raise InvalidArgument(f"sigma must be positive, got {self.sigma}")


# k rules: 'sqrt' uses the per-class training size; 'sqrt_n' the per-distribution
# sample size before splitting (the two coincide without a split).
K_RULES = ("sqrt", "sqrt_n")


def resolve_k(k: int | str, n_train: int, n_total: int | None = None) -> int:
    if isinstance(k, str):
        if k == "sqrt":
            return max(1, math.ceil(math.sqrt(n_train)))
        if k == "sqrt_n":
            return max(1, math.ceil(math.sqrt(n_total if n_total is not None else n_train)))
        raise InvalidArgument(f"unknown k rule {k!r}")
    if int(k) != k or k < 1:
        raise InvalidArgument(f"k must be a positive integer, got {k}")
    return int(k)


def ratio_scores(count_y: np.ndarray, count_x: np.ndarray) -> np.ndarray:
    cy = np.asarray(count_y, dtype=np.float64)
    cx = np.asarray(count_x, dtype=np.float64)
    s = np.zeros(np.broadcast(cy, cx).shape)
    pos = cx > 0
    s[pos] = cy[pos] / cx[pos]
    s[(cx == 0) & (cy > 0)] = np.inf
    return s


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidArgument(msg)


def score_families(
    train_x: SampleSet | np.ndarray,
    train_y: SampleSet | np.ndarray,
    test_x: SampleSet | np.ndarray | None = None,
    test_y: SampleSet | np.ndarray | None = None,
    methods: Iterable[str] = METHODS,
    k: int = 1,
    sigma: float | str = "auto",
    k_sigma: int | None = None,
) -> dict[str, ScoredTestSet]:
    """Score the test points under several families, sharing the distance passes.

    Passing ``test_x=None`` (or the training objects themselves) means no
    split: the training points are scored and exclude themselves from their
    own neighbor radii.

    ``sigma='auto'`` resolves to the mean, over the training union, of each
    point's ``k_sigma``-th NN distance in the union (default
    ``ceil(sqrt(N))`` with N the per-class training size).
    """
    methods = tuple(dict.fromkeys(methods))
    for m in methods:
        _check(m in METHODS, f"unknown method {m!r}")
    shared = test_x is None or (test_x is train_x and test_y is train_y)
    X, Y = _as_array(train_x), _as_array(train_y)
    _check(X.shape[1] == Y.shape[1], "train sets differ in dimension")
    nx, ny = X.shape[0], Y.shape[0]
    n_r = nx + ny
    R = np.vstack([X, Y])
    if shared:
        T = R
        n_tx, n_ty = nx, ny
        self_col = np.arange(n_r)
    else:
        TX, TY = _as_array(test_x), _as_array(test_y)
        _check(TX.shape[1] == X.shape[1] and TY.shape[1] == X.shape[1], "test/train dimension mismatch")
        T = np.vstack([TX, TY])
        n_tx, n_ty = TX.shape[0], TY.shape[0]
        self_col = np.full(T.shape[0], -1)
    _check(n_tx >= 1 and n_ty >= 1, "both test classes must be non-empty")

    k = int(k)
    _check(k >= 1, f"k must be a positive integer, got {k}")
    slack = 1 if shared else 0
    if "knn" in methods:
        _check(k <= n_r - slack, f"knn: k={k} exceeds the {n_r - slack} available training points")
    if "cov" in methods:
        _check(k <= nx - slack and k <= ny - slack, f"cov: k={k} too large for class sizes ({nx}, {ny})")
    if "ipr" in methods:
        _check(k <= nx - 1 and k <= ny - 1, f"ipr: k={k} too large for class sizes ({nx}, {ny})")
    auto_sigma = "kde" in methods and isinstance(sigma, str)
    if "kde" in methods:
        if isinstance(sigma, str):
            _check(sigma == "auto", f"sigma must be positive or 'auto', got {sigma!r}")
        else:
            _check(sigma > 0, f"sigma must be positive, got {sigma}")
    if k_sigma is None:
        k_sigma = max(1, math.ceil(math.sqrt(min(nx, ny))))
    if auto_sigma:
        _check(k_sigma <= n_r - 1, f"kde: k_sigma={k_sigma} too large for {n_r} training points")

    # Pass 1: training radii (within-class k-NN for ipr, union k-NN for sigma).
    r_own = r_sig = None
    if "ipr" in methods or auto_sigma:
        r_own = np.empty(n_r)
        r_sig = np.empty(n_r)
        for i0, i1, dist in iter_distance_blocks(R, R, block_rows(n_r)):
            rows = np.arange(i0, i1)
            if auto_sigma:
                r_sig[i0:i1] = kth_smallest(dist, k_sigma, rows)
            if "ipr" in methods:
                in_x = rows < nx
                if in_x.any():
                    r_own[rows[in_x]] = kth_smallest(dist[in_x][:, :nx], k, rows[in_x])
                if (~in_x).any():
                    r_own[rows[~in_x]] = kth_smallest(dist[~in_x][:, nx:], k, rows[~in_x] - nx)
    sig = float(np.mean(r_sig)) if auto_sigma else (float(sigma) if "kde" in methods else None)

    n_t = T.shape[0]
    counts = {m: (np.zeros(n_t, np.int64), np.zeros(n_t, np.int64)) for m in methods}
    for i0, i1, dist in iter_distance_blocks(T, R, block_rows(n_r)):
        sc = self_col[i0:i1]
        dx, dy = dist[:, :nx], dist[:, nx:]
        if "knn" in methods:
            r = kth_smallest(dist, k, sc)[:, None]
            counts["knn"][0][i0:i1] = np.count_nonzero(dx <= r, axis=1)
            counts["knn"][1][i0:i1] = np.count_nonzero(dy <= r, axis=1)
        if "cov" in methods:
            sc_x = np.where((sc >= 0) & (sc < nx), sc, -1)
            sc_y = np.where(sc >= nx, sc - nx, -1)
            r_in_y = kth_smallest(dy, k, sc_y)[:, None]
            r_in_x = kth_smallest(dx, k, sc_x)[:, None]
            counts["cov"][0][i0:i1] = np.count_nonzero(dx <= r_in_y, axis=1)
            counts["cov"][1][i0:i1] = np.count_nonzero(dy <= r_in_x, axis=1)
        if "kde" in methods:
            counts["kde"][0][i0:i1] = np.count_nonzero(dx <= sig, axis=1)
            counts["kde"][1][i0:i1] = np.count_nonzero(dy <= sig, axis=1)
        if "ipr" in methods:
            counts["ipr"][0][i0:i1] = np.count_nonzero(dx <= r_own[None, :nx], axis=1)
            counts["ipr"][1][i0:i1] = np.count_nonzero(dy <= r_own[None, nx:], axis=1)

    from_x = np.concatenate([np.ones(n_tx, bool), np.zeros(n_ty, bool)])
    out = {}
    for m in methods:
        cx, cy = counts[m]
        params = {"method": m, "split": not shared}
        if m == "kde":
            params["sigma"] = sig
            if auto_sigma:
                params["k_sigma"] = k_sigma
        else:
            params["k"] = k
        out[m] = ScoredTestSet(ratio_scores(cy, cx), from_x, params, cx, cy)
    return out


def score_knn(test_x, test_y, train_x, train_y, k: int) -> ScoredTestSet:
    return score_families(train_x, train_y, test_x, test_y, ("knn",), k=k)["knn"]


def score_kde(test_x, test_y, train_x, train_y, sigma: float | str) -> ScoredTestSet:
    return score_families(train_x, train_y, test_x, test_y, ("kde",), sigma=sigma)["kde"]


def score_ipr(test_x, test_y, train_x, train_y, k: int) -> ScoredTestSet:
    return score_families(train_x, train_y, test_x, test_y, ("ipr",), k=k)["ipr"]


def score_cov(test_x, test_y, train_x, train_y, k: int) -> ScoredTestSet:
    return score_families(train_x, train_y, test_x, test_y, ("cov",), k=k)["cov"]
