"""Shared domain types: sample sets, lambda grids, splits, PR curves, RNG streams."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, NamedTuple

import numpy as np

from .errors import InvalidArgument, InvalidSplit, ParseError

__all__ = [
    "SampleSet",
    "SplitSpec",
    "LambdaGrid",
    "PRPoint",
    "PRCurve",
    "RngStream",
    "split_samples",
    "make_lambda_grid",
]


@dataclass(frozen=True)
class SampleSet:
    """An N x d matrix of finite feature vectors plus a free-form label.

    float32 input is kept as float32 so that binary round-trips stay bit-exact;
    anything else is converted to float64. The stored array is read-only.
    """

    points: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        pts = np.asarray(self.points)
        if pts.dtype != np.float32:
            pts = pts.astype(np.float64, copy=False)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise InvalidArgument(f"points must be 2-D, got shape {pts.shape}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidArgument(f"sample set must have N >= 1 and d >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            bad = int(np.argwhere(~np.isfinite(pts))[0, 0])
            raise InvalidArgument(f"non-finite value in row {bad}")
        if pts is self.points or np.shares_memory(pts, self.points):
            pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def take(self, rows: np.ndarray, label: str | None = None) -> "SampleSet":
        return SampleSet(self.points[np.asarray(rows)], self.label if label is None else label)


@dataclass(frozen=True)
class SplitSpec:
    """Train/test split configuration. ``fraction`` is the training share."""

    fraction: float = 0.5
    enabled: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.enabled and not (0.0 < self.fraction < 1.0):
            raise InvalidSplit(f"split fraction must lie in (0, 1), got {self.fraction}")
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidArgument("split seed must be a 64-bit unsigned integer")

    @classmethod
    def disabled(cls) -> "SplitSpec":
        return cls(fraction=1.0, enabled=False)


@dataclass(frozen=True)
class RngStream:
    """Deterministic substream ``stream_index`` of a master seed.

    Streams are derived with :class:`numpy.random.SeedSequence` spawn keys, so
    they are statistically independent and do not depend on execution order.
    """

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.master_seed), spawn_key=(int(self.stream_index),))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngStream":
        # Mix the child index into the stream index; collisions need >2**32 children.
        return RngStream(self.master_seed, (int(self.stream_index) << 32) + int(index) + 1)


def split_samples(
    x: SampleSet,
    y: SampleSet,
    spec: SplitSpec,
    rng: np.random.Generator | None = None,
) -> tuple[SampleSet, SampleSet, SampleSet, SampleSet]:
    """Partition both sets into (train_x, train_y, test_x, test_y).

    With the split disabled the test sets *are* the training sets (same
    objects), which downstream code uses to detect self-membership.
    """
    if not spec.enabled:
        return x, y, x, y
    if rng is None:
        rng = RngStream(spec.seed, 0).generator()
    out = []
    for s in (x, y):
        n_train = int(math.floor(spec.fraction * s.n))
        if n_train < 1 or s.n - n_train < 1:
            raise InvalidSplit(
                f"split fraction {spec.fraction} leaves an empty half for '{s.label}' (N={s.n})"
            )
        perm = rng.permutation(s.n)
        out.append((s.take(np.sort(perm[:n_train])), s.take(np.sort(perm[n_train:]))))
    (tx, sx), (ty, sy) = out
    return tx, ty, sx, sy


@dataclass(frozen=True)
class LambdaGrid:
    """Strictly increasing lambda values with 0 and +inf sentinels."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 2:
            raise InvalidArgument("lambda grid needs at least the two sentinels")
        if v[0] != 0.0 or not np.isposinf(v[-1]):
            raise InvalidArgument("lambda grid must start at 0 and end at +inf")
        inner = v[1:-1]
        if inner.size and not (np.all(np.isfinite(inner)) and np.all(inner > 0)):
            raise InvalidArgument("interior lambda values must be finite and positive")
        if np.any(np.diff(v) <= 0):
            raise InvalidArgument("lambda grid must be strictly increasing")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def __iter__(self) -> Iterator[float]:
        return iter(self.values.tolist())


def make_lambda_grid(m: int = 101) -> LambdaGrid:
    """Angular grid: 0, tan(i*pi/(2(m+1))) for i=1..m, +inf.

    The upper half is built as reciprocals of the lower half so the grid is
    exactly closed under lambda -> 1/lambda and contains 1.0 when m is odd.
    """
    if int(m) != m or m < 1:
        raise InvalidArgument(f"grid size must be a positive integer, got {m}")
    m = int(m)
    inner = np.empty(m)
    for i in range(1, m + 1):
        j = m + 1 - i
        if 2 * i < m + 1:
            inner[i - 1] = math.tan(i * math.pi / (2 * (m + 1)))
        elif 2 * i == m + 1:
            inner[i - 1] = 1.0
        else:
            inner[i - 1] = 1.0 / math.tan(j * math.pi / (2 * (m + 1)))
    return LambdaGrid(np.concatenate([[0.0], inner, [np.inf]]))


class PRPoint(NamedTuple):
    lam: float
    alpha: float
    beta: float


def _fmt_lambda(v: float) -> str:
    if np.isposinf(v):
        return "inf"
    if v == 0.0:
        return "0"
    return repr(float(v))


def _json_default(o: Any) -> Any:
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (SplitSpec,)):
        return {"fraction": o.fraction, "enabled": o.enabled, "seed": o.seed}
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


@dataclass(frozen=True)
class PRCurve:
    """Precision/recall pairs indexed by a lambda grid.

    ``alphas`` and ``betas`` have one entry per grid value. ``metadata`` is a
    free-form dict (method, k, sigma, split, seed, ...).
    """

    lambdas: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        lam = np.asarray(self.lambdas, dtype=np.float64)
        a = np.asarray(self.alphas, dtype=np.float64)
        b = np.asarray(self.betas, dtype=np.float64)
        if not (lam.shape == a.shape == b.shape) or lam.ndim != 1:
            raise InvalidArgument("lambdas, alphas and betas must be 1-D arrays of equal length")
        for arr in (lam, a, b):
            arr.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "betas", b)

    def __len__(self) -> int:
        return self.lambdas.size

    @property
    def points(self) -> list[PRPoint]:
        return [PRPoint(*t) for t in zip(self.lambdas.tolist(), self.alphas.tolist(), self.betas.tolist())]

    @property
    def alpha_inf(self) -> float:
        """Precision at the largest lambda (the +inf sentinel on a full grid)."""
        return float(self.alphas[-1])

    @property
    def beta_0(self) -> float:
        return float(self.betas[0])

    def with_metadata(self, **kw: Any) -> "PRCurve":
        return PRCurve(self.lambdas, self.alphas, self.betas, {**self.metadata, **kw})

    def swapped(self) -> "PRCurve":
        """Exchange the roles of P and Q: (alpha, beta) -> (beta, alpha), lambda -> 1/lambda."""
        with np.errstate(divide="ignore"):
            lam = np.where(self.lambdas == 0, np.inf, 1.0 / self.lambdas)
        lam = np.where(np.isposinf(self.lambdas), 0.0, lam)
        order = np.argsort(lam, kind="stable")
        return PRCurve(lam[order], self.betas[order], self.alphas[order], dict(self.metadata))

    # -- serialization -------------------------------------------------

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "alpha", "beta"])
        for lam, a, b in zip(self.lambdas, self.alphas, self.betas):
            w.writerow([_fmt_lambda(lam), repr(float(a)), repr(float(b))])
        return buf.getvalue()

    def to_csv(self, path: str | Path, sidecar: bool = True) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.csv_text())
        if sidecar:
            path.with_suffix(".json").write_text(
                json.dumps(self.metadata, default=_json_default, indent=2, sort_keys=True) + "\n"
            )

    @classmethod
    def from_csv(cls, path: str | Path) -> "PRCurve":
        path = Path(path)
        try:
            lines = path.read_text().splitlines()
        except OSError as exc:
            raise ParseError(f"{path}: {exc}") from exc
        if not lines or [c.strip() for c in lines[0].split(",")] != ["lambda", "alpha", "beta"]:
            raise ParseError(f"{path}: expected header 'lambda,alpha,beta'")
        rows = []
        for i, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError(f"{path}:{i}: expected 3 fields, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ParseError(f"{path}:{i}: {exc}") from exc
        if not rows:
            raise ParseError(f"{path}: curve has no points")
        arr = np.array(rows)
        meta: dict = {}
        side = path.with_suffix(".json")
        if side.exists():
            try:
                meta = json.loads(side.read_text())
            except json.JSONDecodeError as exc:
                raise ParseError(f"{side}: {exc}") from exc
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], meta)
