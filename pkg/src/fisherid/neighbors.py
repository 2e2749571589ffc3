"""Exact Euclidean k-nearest-neighbour search.

Two paths produce identical graphs: a blocked brute-force scan (the
reference) and a KD-tree that only proposes candidates.  Both score
candidates with the same squared-distance routine and break distance ties by
ascending point index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import InsufficientDataError
from .preprocess import as_data_matrix

__all__ = ["NeighborGraph", "knn"]

_TREE_MAX_DIM = 16
_TREE_MIN_POINTS = 256
_BLOCK_ROWS = 256


@dataclass(frozen=True)
class NeighborGraph:
    indices: np.ndarray
    distances: np.ndarray

    @property
    def k(self) -> int:
        return self.indices.shape[1]


def _sq_dists(X: np.ndarray, rows, cols) -> np.ndarray:
    # features accumulated in a fixed order so every path gets the same bits
    Xr = X[rows]
    Xc = X[cols]
    out = np.zeros((Xr.shape[0], Xc.shape[0]))
    for f in range(X.shape[1]):
        diff = Xr[:, f, None] - Xc[None, :, f]
        out += diff * diff
    return out


def _select(d2_row: np.ndarray, cand: np.ndarray, k: int):
    order = np.lexsort((cand, d2_row))[:k]
    return cand[order], d2_row[order]


def _knn_brute(X: np.ndarray, k: int):
    N = X.shape[0]
    idx = np.empty((N, k), dtype=np.intp)
    d2 = np.empty((N, k))
    all_cols = np.arange(N)
    for r0 in range(0, N, _BLOCK_ROWS):
        rows = np.arange(r0, min(r0 + _BLOCK_ROWS, N))
        D = _sq_dists(X, rows, all_cols)
        D[np.arange(rows.size), rows] = np.inf
        kth = np.partition(D, k - 1, axis=1)[:, k - 1]
        for local, i in enumerate(rows):
            cand = np.flatnonzero(D[local] <= kth[local])
            idx[i], d2[i] = _select(D[local, cand], cand, k)
    return idx, d2


def _knn_tree(X: np.ndarray, k: int):
    N = X.shape[0]
    tree = cKDTree(X)
    dist, _ = tree.query(X, k=k + 1)
    # widen the radius so candidates cover any ulp-level disagreement
    radius = dist[:, -1] * (1.0 + 1e-9) + 1e-300
    balls = tree.query_ball_point(X, radius)
    idx = np.empty((N, k), dtype=np.intp)
    d2 = np.empty((N, k))
    for i in range(N):
        cand = np.asarray(balls[i], dtype=np.intp)
        cand = cand[cand != i]
        row = _sq_dists(X, [i], cand)[0]
        idx[i], d2[i] = _select(row, cand, k)
    return idx, d2


def knn(data, k: int, method: str = "auto") -> NeighborGraph:
    """Exact k nearest neighbours of every point, self excluded.

    Parameters
    ----------
    data : array of shape (N, d)
    k : int
        Number of neighbours, ``1 <= k <= N - 1``.
    method : {"auto", "brute", "tree"}
        ``"auto"`` uses the KD-tree for low-dimensional data. All methods
        return identical graphs.

    Returns
    -------
    NeighborGraph
        ``indices`` and ``distances`` of shape (N, k), rows sorted by
        distance, ties broken by ascending index.
    """
    X = as_data_matrix(data)
    N, d = X.shape
    if not 1 <= k <= N - 1:
        raise InsufficientDataError(f"k={k} out of range for {N} points (need 1 <= k <= N-1)")
    if method == "auto":
        method = "tree" if d <= _TREE_MAX_DIM and N >= _TREE_MIN_POINTS else "brute"
    if method == "brute":
        idx, d2 = _knn_brute(X, k)
    elif method == "tree":
        idx, d2 = _knn_tree(X, k)
    else:
        raise ValueError(f"unknown knn method {method!r}")
    return NeighborGraph(indices=idx, distances=np.sqrt(d2))
