"""Dense symmetric linear algebra: covariance fits, Jacobi eigensolver, PCA, Cholesky."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SampleSet
from .errors import InvalidArgument, NotPositiveDefinite


def _points(s: SampleSet | np.ndarray) -> np.ndarray:
    arr = s.points if isinstance(s, SampleSet) else np.asarray(s)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return np.asarray(arr, dtype=np.float64)


def fit_gaussian(s: SampleSet | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and unbiased (N - 1) covariance, symmetrized."""
    x = _points(s)
    if x.shape[0] < 2:
        raise InvalidArgument(f"need at least 2 points to fit a covariance, got {x.shape[0]}")
    mean = x.mean(axis=0)
    c = x - mean
    cov = c.T @ c / (x.shape[0] - 1)
    return mean, 0.5 * (cov + cov.T)


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """n - 1 rounds (n even) of disjoint index pairs covering every pair once."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def sym_eig(
    a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors (columns) of a symmetric matrix.

    Cyclic Jacobi with a round-robin ordering, so each round applies n/2
    disjoint rotations at once. Stops when the off-diagonal Frobenius mass is
    at most ``tol * ||A||_F`` or after ``max_sweeps`` sweeps.
    """
    A = np.array(a, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-8 * scale):
        raise InvalidArgument("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    V = np.eye(n)
    if n <= 1:
        return np.diag(A).copy(), V
    # Pad odd sizes with a decoupled zero row/column.
    m = n + (n % 2)
    if m != n:
        A = np.pad(A, ((0, 1), (0, 1)))
        V = np.eye(m)
    rounds = _round_robin(m)
    norm = np.linalg.norm(A)
    target = tol * norm

    def off(M: np.ndarray) -> float:
        # Direct sum; subtracting the diagonal from the total cancels badly.
        return float(np.linalg.norm(M - np.diag(np.diag(M))))

    for _ in range(max_sweeps):
        if off(A) <= target:
            break
        for p, q in rounds:
            apq = A[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            with np.errstate(over="ignore"):
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = c * Ap - s * Aq
            A[:, q] = s * Ap + c * Aq
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            A[p, q] = 0.0
            A[q, p] = 0.0
            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = c * Vp - s * Vq
            V[:, q] = s * Vp + c * Vq
    w = np.diag(A)[:n].copy()
    V = V[:n, :n] if m != n else V
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


@dataclass(frozen=True)
class SymmetricFactor:
    """Lower-triangular L with L @ L.T = matrix + jitter * I."""

    lower: np.ndarray
    jitter: float = 0.0

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def log_det(self) -> float:
        return float(2.0 * np.sum(np.log(np.diag(self.lower))))


def cholesky_jittered(a: np.ndarray, attempts: int = 3) -> SymmetricFactor:
    """Cholesky factor, retrying with diagonal jitter 1e-9*trace/d (x10 per retry)."""
    A = np.array(a, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {A.shape}")
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-8 * max(1.0, float(np.max(np.abs(A))))):
        raise InvalidArgument("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    d = A.shape[0]
    base = 1e-9 * max(float(np.trace(A)) / d, np.finfo(float).tiny)
    jitter = 0.0
    for attempt in range(attempts + 1):
        try:
            L = np.linalg.cholesky(A + jitter * np.eye(d))
        except np.linalg.LinAlgError:
            L = None
        if L is not None and np.all(np.diag(L) > 0):
            return SymmetricFactor(L, jitter)
        jitter = base * 10.0**attempt
    raise NotPositiveDefinite(f"matrix is not positive semi-definite (jitter up to {jitter:.3g} failed)")


@dataclass(frozen=True)
class PcaBasis:
    mean: np.ndarray
    components: np.ndarray  # d x d_max, orthonormal columns
    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return self.components.shape[1]


def fit_pca(s: SampleSet | np.ndarray, d_max: int | None = None) -> PcaBasis:
    mean, cov = fit_gaussian(s)
    w, V = sym_eig(cov)
    if d_max is not None:
        w, V = w[:d_max], V[:, :d_max]
    return PcaBasis(mean, V, w)


def pca_project(basis: PcaBasis, s: SampleSet | np.ndarray, d_out: int, label: str | None = None) -> SampleSet:
    if int(d_out) != d_out or d_out < 1 or d_out > basis.dim:
        raise InvalidArgument(f"d_out must lie in [1, {basis.dim}], got {d_out}")
    x = _points(s)
    if x.shape[1] != basis.mean.size:
        raise InvalidArgument(f"dimension mismatch: basis d={basis.mean.size}, data d={x.shape[1]}")
    lab = label if label is not None else (s.label if isinstance(s, SampleSet) else "")
    return SampleSet((x - basis.mean) @ basis.components[:, : int(d_out)], lab)
