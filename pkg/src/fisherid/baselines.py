"""Reference intrinsic-dimension estimators used for comparison runs.

* Levina-Bickel maximum likelihood on k-NN distances,
* Grassberger-Procaccia correlation dimension,
* TwoNN (ratio of second to first neighbour distance).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DegenerateDataError, InsufficientDataError
from .neighbors import NeighborGraph, knn
from .preprocess import as_data_matrix

__all__ = [
    "BaselineConfig",
    "MleResult",
    "CorrelationDimensionResult",
    "TwoNNResult",
    "mle_id",
    "correlation_dimension",
    "twonn_id",
    "twonn_from_ratios",
]


@dataclass(frozen=True)
class BaselineConfig:
    mle_k: int = 20
    cd_radius_quantiles: tuple[float, float] = (0.01, 0.1)
    twonn_discard_fraction: float = 0.1

    def __post_init__(self):
        lo, hi = self.cd_radius_quantiles
        if not 0 < lo < hi < 1:
            raise ValueError(f"radius quantiles must satisfy 0 < low < high < 1, got {self.cd_radius_quantiles}")
        if not 0 <= self.twonn_discard_fraction <= 0.2:
            raise ValueError("twonn_discard_fraction must lie in [0, 0.2]")
        if self.mle_k < 3:
            raise ValueError("mle_k must be >= 3")


@dataclass
class MleResult:
    global_id: float
    local: np.ndarray = field(repr=False)
    n_skipped: int = 0


@dataclass
class CorrelationDimensionResult:
    dimension: float
    residual: float
    radii: np.ndarray = field(repr=False)
    correlation_sum: np.ndarray = field(repr=False)


@dataclass
class TwoNNResult:
    dimension: float
    n_used: int
    n_skipped: int = 0


def mle_id(data, k: int = 20, graph: NeighborGraph | None = None) -> MleResult:
    """Levina-Bickel maximum-likelihood dimension.

    Per point, ``m(y) = [ (1/(k-1)) sum_{j<k} ln(T_k / T_j) ]^-1`` with ``T_j``
    the distance to the j-th neighbour. The global value averages the inverse
    per-point estimates and inverts the result. Points with a zero neighbour
    distance are skipped (``local`` is NaN there).
    """
    X = as_data_matrix(data)
    N = X.shape[0]
    if k < 3 or k >= N:
        raise InsufficientDataError(f"MLE needs 3 <= k < N, got k={k}, N={N}")
    if graph is None:
        graph = knn(X, k)
    T = graph.distances[:, :k]
    ok = T[:, 0] > 0
    n_skipped = int(N - ok.sum())
    if n_skipped:
        warnings.warn(f"{n_skipped} points with duplicate neighbours skipped in MLE", stacklevel=2)
    if not ok.any():
        raise DegenerateDataError("every point has a duplicate neighbour")
    inv = np.full(N, np.nan)
    Tok = T[ok]
    inv[ok] = np.log(Tok[:, -1:] / Tok[:, :-1]).sum(axis=1) / (k - 1)
    with np.errstate(divide="ignore"):
        local = 1.0 / inv
    mean_inv = np.mean(inv[ok])
    global_id = math.inf if mean_inv == 0 else 1.0 / mean_inv
    return MleResult(global_id=global_id, local=local, n_skipped=n_skipped)


def correlation_dimension(data, radius_quantiles=(0.01, 0.1), n_radii: int = 20) -> CorrelationDimensionResult:
    """Correlation dimension: slope of log C(r) against log r.

    ``C(r)`` is the fraction of point pairs closer than ``r``. Radii are
    log-spaced between the given quantiles of the pairwise distances.
    """
    X = as_data_matrix(data)
    N = X.shape[0]
    if N < 100:
        raise InsufficientDataError(f"correlation dimension needs N >= 100, got {N}")
    lo_q, hi_q = radius_quantiles
    if not 0 < lo_q < hi_q < 1:
        raise ValueError(f"invalid radius quantiles {radius_quantiles}")
    d = np.sort(pdist(X))
    r_lo, r_hi = np.quantile(d, [lo_q, hi_q])
    if not (r_lo > 0 and r_hi > r_lo):
        raise DegenerateDataError("pairwise distances are degenerate over the fitting window")
    radii = np.geomspace(r_lo, r_hi, n_radii)
    csum = np.searchsorted(d, radii, side="left") / d.size
    use = csum > 0
    if np.unique(csum[use]).size < 10:
        raise DegenerateDataError("fewer than 10 distinct radii with non-zero correlation sum")
    x, y = np.log(radii[use]), np.log(csum[use])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return CorrelationDimensionResult(float(slope), residual, radii, csum)


def twonn_from_ratios(mu, discard_fraction: float = 0.1) -> float:
    """Maximum-likelihood TwoNN dimension from neighbour-distance ratios.

    The largest ``discard_fraction`` of the ratios are treated as censored at
    the largest retained ratio, which keeps the estimator unbiased under the
    Pareto model. Ratios tied with that threshold count as observed. With
    nothing discarded this is ``n / sum(ln mu)``.
    """
    mu = np.sort(np.asarray(mu, dtype=float))
    n = mu.size
    if n == 0:
        raise InsufficientDataError("no ratios to estimate from")
    M = n - int(math.floor(discard_fraction * n))
    log_mu = np.log(mu)
    M = int(np.searchsorted(mu, mu[M - 1], side="right"))
    total = log_mu[:M].sum() + (n - M) * log_mu[M - 1]
    if total <= 0:
        raise DegenerateDataError("all neighbour-distance ratios equal 1")
    return M / total


def twonn_id(data, discard_fraction: float = 0.1, graph: NeighborGraph | None = None) -> TwoNNResult:
    """TwoNN estimate from the ratio of second to first neighbour distance."""
    X = as_data_matrix(data)
    N = X.shape[0]
    if N < 100:
        raise InsufficientDataError(f"TwoNN needs N >= 100, got {N}")
    if graph is None:
        graph = knn(X, 2)
    r1, r2 = graph.distances[:, 0], graph.distances[:, 1]
    ok = r1 > 0
    n_skipped = int(N - ok.sum())
    if n_skipped:
        warnings.warn(f"{n_skipped} points with a zero first-neighbour distance skipped in TwoNN", stacklevel=2)
    if not ok.any():
        raise DegenerateDataError("every point has a duplicate")
    dim = twonn_from_ratios(r2[ok] / r1[ok], discard_fraction)
    return TwoNNResult(dimension=float(dim), n_used=int(ok.sum()), n_skipped=n_skipped)
