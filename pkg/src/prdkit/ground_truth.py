"""Analytic densities and the Monte-Carlo likelihood-ratio ground-truth curve."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .core import LambdaGrid, PRCurve, RngStream, SampleSet, make_lambda_grid
from .errors import InvalidArgument, ParseError
from .linalg import SymmetricFactor, cholesky_jittered

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Gaussian:
    """N(mean, L L^T); ``factor=None`` means identity covariance."""

    mean: np.ndarray
    factor: SymmetricFactor | None = None

    def __post_init__(self) -> None:
        m = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        if m.ndim != 1 or m.size < 1 or not np.all(np.isfinite(m)):
            raise InvalidArgument("Gaussian mean must be a non-empty finite vector")
        if self.factor is not None:
            L = self.factor.lower
            if L.shape != (m.size, m.size):
                raise InvalidArgument(f"covariance factor shape {L.shape} does not match d={m.size}")
            if not np.all(np.diag(L) > 0):
                raise InvalidArgument("covariance factor needs a positive diagonal")
        m.setflags(write=False)
        object.__setattr__(self, "mean", m)

    @classmethod
    def isotropic(cls, mean) -> "Gaussian":
        return cls(np.asarray(mean, dtype=np.float64))

    @classmethod
    def from_cov(cls, mean, cov) -> "Gaussian":
        return cls(np.asarray(mean, dtype=np.float64), cholesky_jittered(np.asarray(cov, dtype=np.float64)))

    @property
    def d(self) -> int:
        return self.mean.size

    @property
    def cov(self) -> np.ndarray:
        if self.factor is None:
            return np.eye(self.d)
        L = self.factor.lower
        return L @ L.T

    def log_pdf(self, z: np.ndarray) -> np.ndarray:
        z = _rows(z, self.d)
        c = z - self.mean
        if self.factor is None:
            quad = np.einsum("ij,ij->i", c, c)
            logdet = 0.0
        else:
            w = solve_triangular(self.factor.lower, c.T, lower=True)
            quad = np.einsum("ij,ij->j", w, w)
            logdet = self.factor.log_det()
        return -0.5 * (self.d * _LOG_2PI + logdet + quad)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        e = rng.standard_normal((n, self.d))
        if self.factor is not None:
            e = e @ self.factor.lower.T
        return e + self.mean


@dataclass(frozen=True)
class GMM:
    weights: np.ndarray
    components: tuple[Gaussian, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        comps = tuple(self.components)
        if w.ndim != 1 or w.size != len(comps) or w.size == 0:
            raise InvalidArgument("GMM needs one weight per component")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidArgument(f"GMM weights must be non-negative and sum to 1, got {w.tolist()}")
        if len({c.d for c in comps}) != 1:
            raise InvalidArgument("GMM components differ in dimension")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @property
    def d(self) -> int:
        return self.components[0].d

    def log_pdf(self, z: np.ndarray) -> np.ndarray:
        z = _rows(z, self.d)
        live = [i for i, w in enumerate(self.weights) if w > 0]
        if len(live) == 1:
            return self.components[live[0]].log_pdf(z)
        terms = np.stack([math.log(self.weights[i]) + self.components[i].log_pdf(z) for i in live])
        return logsumexp(terms, axis=0)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        labels = rng.choice(len(self.components), size=n, p=self.weights)
        out = np.empty((n, self.d))
        for i, comp in enumerate(self.components):
            rows = np.flatnonzero(labels == i)
            if rows.size:
                out[rows] = comp.sample(rows.size, rng)
        return out


DensityModel = Union[Gaussian, GMM]


def _rows(z: np.ndarray, d: int) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.ndim == 1:
        z = z.reshape(1, -1) if z.size == d else z.reshape(-1, 1)
    if z.shape[1] != d:
        raise InvalidArgument(f"dimension mismatch: model d={d}, points d={z.shape[1]}")
    return z


def log_pdf(model: DensityModel, z: np.ndarray) -> np.ndarray | float:
    """Log density at one point (returns a float) or at each row of a matrix."""
    single = np.ndim(z) <= 1 and np.size(z) == model.d
    out = model.log_pdf(z)
    return float(out[0]) if single else out


def _generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngStream) else rng


def sample(model: DensityModel, n: int, rng: RngStream | np.random.Generator, label: str = "") -> SampleSet:
    if int(n) != n or n < 1:
        raise InvalidArgument(f"sample size must be a positive integer, got {n}")
    return SampleSet(model.sample(int(n), _generator(rng)), label)


@dataclass(frozen=True)
class GtConfig:
    n_gt: int = 100_000
    grid: LambdaGrid = field(default_factory=make_lambda_grid)
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.n_gt) != self.n_gt or self.n_gt < 2:
            raise InvalidArgument(f"n_gt must be an integer >= 2, got {self.n_gt}")


def gt_rates(llr_p: np.ndarray, llr_q: np.ndarray, lambdas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Error rates of the likelihood-ratio classifiers 1{llr <= ln lambda}.

    ``llr_p`` / ``llr_q`` are log q - log p evaluated on P- and Q-samples.
    Returns (fpr, fnr) per lambda, using the limit conventions at 0 and +inf.
    """
    sp, sq = np.sort(llr_p), np.sort(llr_q)
    lam = np.asarray(lambdas, dtype=np.float64)
    with np.errstate(divide="ignore"):
        t = np.log(lam)  # 0 -> -inf, inf -> inf
    t_p = t.copy()
    # At lambda = 0 only llr = -inf is assigned to P; at +inf everything finite.
    t_p[np.isposinf(lam)] = np.finfo(float).max
    fnr = np.searchsorted(sq, t_p, side="right") / sq.size
    fpr = 1.0 - np.searchsorted(sp, t_p, side="right") / sp.size
    return fpr, fnr


def gt_curve(p: DensityModel, q: DensityModel, cfg: GtConfig | None = None) -> PRCurve:
    """Monte-Carlo risk of the Bayes classifier over the grid.

    P samples come from stream 0 of ``cfg.seed`` and Q samples from stream 1.
    alpha is clipped to [0, min(1, lambda)] so that beta = alpha / lambda stays
    in [0, 1].
    """
    cfg = cfg or GtConfig()
    if p.d != q.d:
        raise InvalidArgument(f"models differ in dimension: {p.d} vs {q.d}")
    xp = p.sample(cfg.n_gt, RngStream(cfg.seed, 0).generator())
    xq = q.sample(cfg.n_gt, RngStream(cfg.seed, 1).generator())
    llr_p = q.log_pdf(xp) - p.log_pdf(xp)
    llr_q = q.log_pdf(xq) - p.log_pdf(xq)
    lam = cfg.grid.values
    fpr, fnr = gt_rates(llr_p, llr_q, lam)
    alpha = np.empty(lam.size)
    beta = np.empty(lam.size)
    fin = np.isfinite(lam) & (lam > 0)
    alpha[fin] = np.clip(lam[fin] * fpr[fin] + fnr[fin], 0.0, np.minimum(1.0, lam[fin]))
    beta[fin] = alpha[fin] / lam[fin]
    zero = lam == 0
    alpha[zero] = 0.0
    beta[zero] = np.clip(fpr[zero], 0.0, 1.0)
    inf = np.isposinf(lam)
    alpha[inf] = np.clip(fnr[inf], 0.0, 1.0)
    beta[inf] = 0.0
    meta = {"method": "ground_truth", "n_gt": int(cfg.n_gt), "seed": int(cfg.seed)}
    return PRCurve(lam, alpha, beta, meta)


# -- JSON -----------------------------------------------------------------


def model_to_dict(model: DensityModel) -> dict:
    if isinstance(model, Gaussian):
        cov = "identity" if model.factor is None else model.cov.tolist()
        return {"type": "gaussian", "mean": model.mean.tolist(), "cov": cov}
    return {
        "type": "gmm",
        "weights": model.weights.tolist(),
        "components": [model_to_dict(c) for c in model.components],
    }


def model_from_dict(obj: dict, where: str = "model") -> DensityModel:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ParseError(f"{where}: expected an object with a 'type' field")
    kind = obj["type"]
    try:
        if kind == "gaussian":
            mean = np.asarray(obj["mean"], dtype=np.float64)
            cov = obj.get("cov", "identity")
            if isinstance(cov, str):
                if cov != "identity":
                    raise ParseError(f"{where}: cov must be a matrix or 'identity', got {cov!r}")
                return Gaussian.isotropic(mean)
            return Gaussian.from_cov(mean, np.asarray(cov, dtype=np.float64))
        if kind == "gmm":
            comps = obj["components"]
            return GMM(
                np.asarray(obj["weights"], dtype=np.float64),
                tuple(model_from_dict(c, f"{where}.components[{i}]") for i, c in enumerate(comps)),
            )
    except KeyError as exc:
        raise ParseError(f"{where}: missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{where}: {exc}") from exc
    raise ParseError(f"{where}: unknown model type {kind!r}")


def load_model(path: str | Path) -> DensityModel:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return model_from_dict(obj, str(path))


def save_model(model: DensityModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")
