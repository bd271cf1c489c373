"""Brute-force Euclidean distances, k-th nearest-neighbor radii and ball counts.

All distances go through :func:`scipy.spatial.distance.cdist`, which sums
squared coordinate differences in double precision. That makes every distance
bitwise symmetric and exactly zero between identical rows, which the tie rules
below rely on (closed balls, every point at the radius counted).
"""

from __future__ import annotations

from typing import Iterator

import numpy as np
from scipy.spatial.distance import cdist

from .core import SampleSet
from .errors import InvalidArgument

# ~256 MB of float64 per distance block.
_BLOCK_ELEMS = 1 << 25


def _as_array(s: SampleSet | np.ndarray) -> np.ndarray:
    arr = s.points if isinstance(s, SampleSet) else np.asarray(s)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return np.asarray(arr, dtype=np.float64)


def pairwise_distances(queries: SampleSet | np.ndarray, refs: SampleSet | np.ndarray) -> np.ndarray:
    """Q x R table of Euclidean distances."""
    q, r = _as_array(queries), _as_array(refs)
    if q.shape[1] != r.shape[1]:
        raise InvalidArgument(f"dimension mismatch: queries d={q.shape[1]}, refs d={r.shape[1]}")
    return cdist(q, r, "euclidean")


def block_rows(n_cols: int) -> int:
    return max(1, _BLOCK_ELEMS // max(1, n_cols))


def iter_distance_blocks(
    queries: np.ndarray, refs: np.ndarray, rows: int | None = None
) -> Iterator[tuple[int, int, np.ndarray]]:
    """Yield ``(start, stop, D)`` with D the distances of query rows start:stop."""
    if queries.shape[1] != refs.shape[1]:
        raise InvalidArgument(f"dimension mismatch: queries d={queries.shape[1]}, refs d={refs.shape[1]}")
    rows = rows or block_rows(refs.shape[0])
    for i0 in range(0, queries.shape[0], rows):
        i1 = min(queries.shape[0], i0 + rows)
        yield i0, i1, cdist(queries[i0:i1], refs, "euclidean")


def kth_smallest(dist: np.ndarray, k: int, self_cols: np.ndarray | None = None) -> np.ndarray:
    """Row-wise k-th smallest entry (1-based k), optionally ignoring one column per row.

    ``self_cols[i]`` is the column to skip for row i, or -1 for none.
    """
    if self_cols is not None and np.any(self_cols >= 0):
        dist = dist.copy()
        rows = np.flatnonzero(self_cols >= 0)
        dist[rows, self_cols[rows]] = np.inf
    return np.partition(dist, k - 1, axis=1)[:, k - 1]


def _check_k(k: int, available: int, what: str = "references") -> None:
    if int(k) != k or k < 1:
        raise InvalidArgument(f"k must be a positive integer, got {k}")
    if k > available:
        raise InvalidArgument(f"k={k} exceeds the {available} available {what}")


def knn_radii(
    queries: SampleSet | np.ndarray,
    refs: SampleSet | np.ndarray,
    k: int,
    self_index: np.ndarray | None = None,
) -> np.ndarray:
    """k-th NN distance of every query within ``refs``.

    ``self_index[i]`` names the reference row that *is* query i (excluded from
    its own neighbors), or -1 when query i is not a member of ``refs``.
    """
    q, r = _as_array(queries), _as_array(refs)
    has_self = self_index is not None and np.any(np.asarray(self_index) >= 0)
    _check_k(k, r.shape[0] - (1 if has_self else 0))
    out = np.empty(q.shape[0])
    for i0, i1, dist in iter_distance_blocks(q, r):
        sc = None if self_index is None else np.asarray(self_index[i0:i1])
        out[i0:i1] = kth_smallest(dist, k, sc)
    return out


def self_radii(s: SampleSet | np.ndarray, k: int) -> np.ndarray:
    """k-th NN distance of every point within its own set, self excluded."""
    arr = _as_array(s)
    return knn_radii(arr, arr, k, np.arange(arr.shape[0]))


def kth_radius(z: int | np.ndarray, refs: SampleSet | np.ndarray, k: int, exclude_self: bool = False) -> float:
    """k-th smallest distance from ``z`` to the references.

    ``z`` is either a row index into ``refs`` (then ``exclude_self`` drops that
    row) or an external point.
    """
    r = _as_array(refs)
    if isinstance(z, (int, np.integer)):
        idx = int(z)
        point = r[idx]
        self_idx = np.array([idx if exclude_self else -1])
    else:
        point = np.asarray(z, dtype=np.float64).reshape(1, -1)
        self_idx = None
    return float(knn_radii(point, r, k, self_idx)[0])


def ball_counts(
    z: int | np.ndarray,
    train_x: SampleSet | np.ndarray,
    train_y: SampleSet | np.ndarray,
    k: int,
    member_of: str | None = None,
) -> tuple[int, int]:
    """Class counts inside the closed k-NN ball of ``z`` within X u Y.

    When ``z`` is an int, ``member_of`` ('x' or 'y') says which training set it
    indexes; the radius then skips z itself, but z still counts as a member of
    its own ball (distance 0). Every point at exactly the radius is counted.
    """
    x, y = _as_array(train_x), _as_array(train_y)
    union = np.vstack([x, y])
    if isinstance(z, (int, np.integer)):
        if member_of not in ("x", "y"):
            raise InvalidArgument("member_of must be 'x' or 'y' when z is an index")
        col = int(z) if member_of == "x" else x.shape[0] + int(z)
        point = union[col : col + 1]
        self_idx = np.array([col])
    else:
        point = np.asarray(z, dtype=np.float64).reshape(1, -1)
        self_idx = None
    radius = knn_radii(point, union, k, self_idx)[0]
    dist = pairwise_distances(point, union)[0]
    nx = x.shape[0]
    return int(np.count_nonzero(dist[:nx] <= radius)), int(np.count_nonzero(dist[nx:] <= radius))
