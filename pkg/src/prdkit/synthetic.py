"""Toy distribution pairs: shifted isotropic Gaussians and 4-mode mixtures."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .ground_truth import GMM, Gaussian

SHIFT_MUS = (0.12, 0.21, 0.29, 0.38)

GMM_CENTERS = (0.0, -5.0, 3.0, 5.0)
# Two published weight pairs for the same four modes.
GMM_PRESETS = {
    "main": ((0.2, 0.2, 0.6, 0.0), (0.0, 0.5, 0.1, 0.4)),
    "alternate": ((0.3, 0.2, 0.5, 0.0), (0.0, 0.5, 0.2, 0.3)),
}


@dataclass(frozen=True)
class ShiftConfig:
    mu: float
    d: int = 64
    n: int = 10_000

    def __post_init__(self) -> None:
        if self.d < 1 or self.n < 2 or not self.mu >= 0:
            raise InvalidArgument(f"invalid shift config: d={self.d}, n={self.n}, mu={self.mu}")


def shift_pair(cfg: ShiftConfig) -> tuple[Gaussian, Gaussian]:
    """P = N(0, I_d), Q = N(mu 1_d, I_d)."""
    return Gaussian.isotropic(np.zeros(cfg.d)), Gaussian.isotropic(np.full(cfg.d, float(cfg.mu)))


@dataclass(frozen=True)
class GmmConfig:
    d: int = 64
    weights_p: tuple[float, ...] = GMM_PRESETS["main"][0]
    weights_q: tuple[float, ...] = GMM_PRESETS["main"][1]
    centers: tuple[float, ...] = field(default=GMM_CENTERS)
    n: int = 10_000

    @classmethod
    def preset(cls, name: str, **kw) -> "GmmConfig":
        if name not in GMM_PRESETS:
            raise InvalidArgument(f"unknown GMM preset {name!r}; expected one of {sorted(GMM_PRESETS)}")
        wp, wq = GMM_PRESETS[name]
        return cls(weights_p=wp, weights_q=wq, **kw)

    def __post_init__(self) -> None:
        if self.d < 1 or self.n < 2:
            raise InvalidArgument(f"invalid GMM config: d={self.d}, n={self.n}")
        if not (len(self.weights_p) == len(self.weights_q) == len(self.centers)):
            raise InvalidArgument("weights and centers must have the same length")


def gmm_pair(cfg: GmmConfig) -> tuple[GMM, GMM]:
    comps = tuple(Gaussian.isotropic(np.full(cfg.d, float(c))) for c in cfg.centers)
    return GMM(np.asarray(cfg.weights_p), comps), GMM(np.asarray(cfg.weights_q), comps)
