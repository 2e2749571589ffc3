"""Empirical Fisher-inseparability statistics.

A point ``y`` is inseparable from ``x`` at level ``alpha`` when
``<x, y> > alpha * <y, y>``.  For every point and every alpha of a grid we
count how many other points violate separability.  Counts are exact integers:
each dot product is accumulated in a fixed feature order inside a compiled
kernel, so results do not depend on blocking, row order of the work split or
the number of threads.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numba
import numpy as np

from .errors import InsufficientDataError
from .preprocess import PreprocessedCloud

__all__ = [
    "DEFAULT_ALPHAS",
    "SeparabilityProfile",
    "alpha_grid",
    "inseparability_fractions",
    "inseparability_counts_blocked",
    "set_threads",
    "get_threads",
]

DEFAULT_ALPHAS = np.round(0.6 + 0.02 * np.arange(20), 2)
THREADS_ENV = "FISHERID_THREADS"
_PARALLEL_MIN_POINTS = 512
_threads: int | None = None


def alpha_grid(values=None) -> np.ndarray:
    """Validate an alpha grid: strictly increasing values in (0, 1)."""
    if values is None:
        return DEFAULT_ALPHAS.copy()
    a = np.atleast_1d(np.asarray(values, dtype=float))
    if a.ndim != 1 or a.size == 0:
        raise ValueError("alpha grid must be a non-empty 1D sequence")
    if np.any(a <= 0) or np.any(a >= 1):
        raise ValueError("alpha values must lie in the open interval (0, 1)")
    if np.any(np.diff(a) <= 0):
        raise ValueError("alpha values must be strictly increasing")
    return a


def set_threads(n: int | None = None) -> int:
    """Set the number of worker threads for pair counting.

    ``None`` reads ``FISHERID_THREADS`` and otherwise leaves numba's default.
    Returns the thread count in effect.
    """
    global _threads
    if n is None:
        env = os.environ.get(THREADS_ENV)
        if env is None:
            return get_threads()
        n = int(env)
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    if n > 1:
        numba.set_num_threads(n)
    _threads = n
    return n


def get_threads() -> int:
    # avoids numba.get_num_threads(), which would start the threading layer
    return _threads if _threads is not None else numba.config.NUMBA_NUM_THREADS


@dataclass
class SeparabilityProfile:
    """Inseparability counts of every point over an alpha grid.

    ``counts[a, i]`` is the number of points ``x != y_i`` with
    ``<x, y_i> > alphas[a] * <y_i, y_i>``.
    """

    alphas: np.ndarray
    counts: np.ndarray

    @property
    def n_points(self) -> int:
        return self.counts.shape[1]

    @property
    def point_p(self) -> np.ndarray:
        return self.counts / (self.n_points - 1)

    @property
    def total_counts(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def mean_p(self) -> np.ndarray:
        N = self.n_points
        return self.total_counts / (N * (N - 1))

    @property
    def separable_fraction(self) -> np.ndarray:
        """Fraction of points separable from all others, per alpha."""
        return np.mean(self.counts == 0, axis=1)


@numba.njit(cache=True)
def _count_block(P, alphas, unit_norm, r0, r1, c0, c1, hist):
    n_alpha = alphas.shape[0]
    k = P.shape[1]
    for i in range(r0, r1):
        yy = 1.0
        if not unit_norm:
            yy = 0.0
            for f in range(k):
                yy += P[i, f] * P[i, f]
        for j in range(c0, c1):
            if j == i:
                continue
            g = 0.0
            for f in range(k):
                g += P[i, f] * P[j, f]
            m = 0
            while m < n_alpha and g > alphas[m] * yy:
                m += 1
            hist[i, m] += 1


@numba.njit(parallel=True, cache=True)
def _count_all_parallel(P, alphas, unit_norm, hist):
    n = P.shape[0]
    n_alpha = alphas.shape[0]
    k = P.shape[1]
    for i in numba.prange(n):
        yy = 1.0
        if not unit_norm:
            yy = 0.0
            for f in range(k):
                yy += P[i, f] * P[i, f]
        for j in range(n):
            if j == i:
                continue
            g = 0.0
            for f in range(k):
                g += P[i, f] * P[j, f]
            m = 0
            while m < n_alpha and g > alphas[m] * yy:
                m += 1
            hist[i, m] += 1


def _prepare(cloud, alphas):
    points = cloud.points if isinstance(cloud, PreprocessedCloud) else np.asarray(cloud, dtype=float)
    unit_norm = cloud.unit_norm if isinstance(cloud, PreprocessedCloud) else False
    P = np.ascontiguousarray(points, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] < 2:
        raise InsufficientDataError("separability needs at least 2 points")
    a = np.ascontiguousarray(alpha_grid(alphas), dtype=np.float64)
    hist = np.zeros((P.shape[0], a.shape[0] + 1), dtype=np.int64)
    return P, a, bool(unit_norm), hist


def _finish(a, hist) -> SeparabilityProfile:
    # counts[i, a] = number of pairs whose dot exceeds alphas[a]: those with bin index > a
    tail = np.cumsum(hist[:, ::-1], axis=1)[:, ::-1]
    counts = np.ascontiguousarray(tail[:, 1:].T)
    return SeparabilityProfile(alphas=a, counts=counts)


def inseparability_fractions(cloud, alphas=None) -> SeparabilityProfile:
    """Count Fisher-inseparable pairs for every point and alpha.

    Parameters
    ----------
    cloud : PreprocessedCloud or array of shape (N, k)
        Raw arrays are treated as not unit-normalised, so the general
        ``alpha * <y, y>`` threshold is used.
    alphas : sequence of float, optional
        Strictly increasing values in (0, 1); defaults to 0.60, 0.62, ..., 0.98.
    """
    P, a, unit_norm, hist = _prepare(cloud, alphas)
    n = P.shape[0]
    if get_threads() > 1 and n >= _PARALLEL_MIN_POINTS:
        _count_all_parallel(P, a, unit_norm, hist)
    else:
        _count_block(P, a, unit_norm, 0, n, 0, n, hist)
    return _finish(a, hist)


def inseparability_counts_blocked(cloud, alphas=None, block_size: int = 1024) -> SeparabilityProfile:
    """Same result as :func:`inseparability_fractions`, computed tile by tile."""
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    P, a, unit_norm, hist = _prepare(cloud, alphas)
    n = P.shape[0]
    for r0 in range(0, n, block_size):
        r1 = min(r0 + block_size, n)
        for c0 in range(0, n, block_size):
            _count_block(P, a, unit_norm, r0, r1, c0, min(c0 + block_size, n), hist)
    return _finish(a, hist)
