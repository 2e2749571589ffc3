"""Intrinsic dimension from Fisher-separability statistics.

For a uniform distribution on the unit sphere in R^n the probability that a
point is inseparable at level alpha is bounded by

    p(n, alpha) = (1 - alpha^2)^((n - 1)/2) / (alpha * sqrt(2 pi n))

and inverting that bound with the Lambert W function turns an observed
inseparability probability into a dimension.  Three estimators build on it:
global (mean probability over the cloud), global pointwise (probability of
each point against the whole cloud) and local kNN (global estimator applied
to each point's neighbourhood).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError, DomainError, FullySeparableError, InsufficientDataError
from .lambert import lambert_w0, lambert_w0_log
from .neighbors import NeighborGraph, knn
from .preprocess import PreprocessConfig, PreprocessedCloud, as_data_matrix, preprocess_pipeline
from .separability import SeparabilityProfile, alpha_grid, inseparability_fractions

__all__ = [
    "IdEstimate",
    "IdProfile",
    "p_ref",
    "n_from_p",
    "max_dim_pointwise",
    "max_dim_global",
    "select_alpha",
    "select_alpha_from_means",
    "fisher_global_id",
    "fisher_pointwise_id",
    "fisher_local_knn_id",
]

SELECTION_FRACTION = 0.8
_TIE_RTOL = 1e-12
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class IdEstimate:
    """One intrinsic-dimension value with the context needed to interpret it.

    ``saturated`` marks estimates that hit the largest dimension measurable
    at this alpha and sample size; ``dimension`` then equals ``cap``.
    ``degenerate`` marks inputs with no usable spread (``dimension`` is NaN).
    """

    dimension: float
    alpha_used: float
    saturated: bool
    cap: float
    n_points_used: int
    degenerate: bool = False


@dataclass
class IdProfile:
    estimates: list[IdEstimate]
    selected_index: int
    separability: SeparabilityProfile | None = field(default=None, repr=False)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([e.alpha_used for e in self.estimates])

    @property
    def dimensions(self) -> np.ndarray:
        return np.array([e.dimension for e in self.estimates])

    @property
    def selected(self) -> IdEstimate:
        return self.estimates[self.selected_index]


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def p_ref(n: float, alpha: float) -> float:
    """Closed-form inseparability probability for the uniform sphere in R^n.

    It bounds the exact spherical-cap fraction from above once ``n`` is large
    enough; for small ``n`` and large ``alpha`` it sits slightly below it.
    """
    alpha = _check_alpha(alpha)
    if not n >= 1:
        raise DomainError(f"dimension must be >= 1, got {n}")
    a2 = alpha * alpha
    return (1.0 - a2) ** ((n - 1.0) / 2.0) / (alpha * math.sqrt(2.0 * math.pi * n))


def n_from_p(p: float, alpha: float) -> float:
    """Dimension whose sphere bound equals the inseparability probability ``p``.

    Strictly decreasing in ``p``. Returns ``inf`` for ``p == 0``; callers
    replace that by the relevant measurable-dimension cap.
    """
    alpha = _check_alpha(alpha)
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0:
        return math.inf
    a2 = alpha * alpha
    L = -math.log1p(-a2)
    log_arg = math.log(L) - _LOG_2PI - 2.0 * math.log(p) - math.log(a2) - math.log1p(-a2)
    if log_arg > 700.0:
        return lambert_w0_log(log_arg) / L
    return lambert_w0(L / (2.0 * math.pi * p * p * a2 * (1.0 - a2))) / L


def _n_from_counts(counts: np.ndarray, denom: float, alpha: float) -> np.ndarray:
    # counts take few distinct values, so invert each once
    uniq, inverse = np.unique(counts, return_inverse=True)
    vals = np.array([n_from_p(c / denom, alpha) for c in uniq])
    return vals[inverse.ravel()].reshape(counts.shape)


def max_dim_pointwise(N: int, alpha: float) -> float:
    """Largest pointwise dimension measurable with N points (p = 1/N)."""
    if N < 2:
        raise DomainError(f"need N >= 2, got {N}")
    return n_from_p(1.0 / N, alpha)


def max_dim_global(N: int, alpha: float) -> float:
    """Largest global dimension measurable with N points (mean p = 1/N^2).

    With ``N`` set to the neighbourhood size this is also the cap of the local
    kNN estimator.
    """
    if N < 2:
        raise DomainError(f"need N >= 2, got {N}")
    return n_from_p(1.0 / (float(N) * float(N)), alpha)


def select_alpha_from_means(mean_p, alphas) -> tuple[int, float]:
    """Pick the alpha whose mean inseparability is closest to 0.8 of the maximum.

    Ties go to the larger alpha. Raises :class:`FullySeparableError` when every
    mean is zero.
    """
    mean_p = np.asarray(mean_p, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    if mean_p.shape != alphas.shape:
        raise ValueError("mean_p and alphas must have the same length")
    p_max = mean_p.max()
    if not p_max > 0:
        raise FullySeparableError("data are Fisher-separable at every alpha of the grid")
    dist = np.abs(mean_p - SELECTION_FRACTION * p_max)
    best = dist.min()
    tied = np.flatnonzero(dist <= best + _TIE_RTOL * p_max)
    idx = int(tied[-1])
    return idx, float(alphas[idx])


def select_alpha(profile: SeparabilityProfile) -> tuple[int, float]:
    return select_alpha_from_means(profile.mean_p, profile.alphas)


def _global_from_separability(sep: SeparabilityProfile) -> tuple[IdEstimate, IdProfile]:
    N = sep.n_points
    alphas = sep.alphas
    mean_p = sep.mean_p
    estimates = []
    for a, p in zip(alphas, mean_p):
        cap = max_dim_global(N, a)
        if p == 0.0:
            estimates.append(IdEstimate(cap, float(a), True, cap, N))
        else:
            estimates.append(IdEstimate(n_from_p(p, a), float(a), False, cap, N))
    try:
        idx, _ = select_alpha(sep)
    except FullySeparableError:
        # the smallest alpha carries the largest cap
        idx = 0
    profile = IdProfile(estimates=estimates, selected_index=idx, separability=sep)
    return estimates[idx], profile


def fisher_global_id(
    cloud: PreprocessedCloud, alphas=None, separability: SeparabilityProfile | None = None
) -> tuple[IdEstimate, IdProfile]:
    """Global intrinsic dimension from the mean inseparability probability.

    A cloud that is fully separable over the whole grid is reported as
    saturated at the cap of the smallest alpha.

    Parameters
    ----------
    cloud : PreprocessedCloud
    alphas : sequence of float, optional
    separability : SeparabilityProfile, optional
        Reuse counts computed earlier on the same cloud.

    Returns
    -------
    estimate : IdEstimate
        Estimate at the selected alpha.
    profile : IdProfile
        Estimates for every alpha of the grid.
    """
    sep = separability if separability is not None else inseparability_fractions(cloud, alpha_grid(alphas))
    return _global_from_separability(sep)


def fisher_pointwise_id(
    cloud: PreprocessedCloud,
    alphas=None,
    alpha_override: float | None = None,
    separability: SeparabilityProfile | None = None,
) -> list[IdEstimate]:
    """Per-point dimension from each point's inseparability against the cloud.

    Uses the alpha selected by the global estimator unless ``alpha_override``
    is given. Points separable from every other point are saturated at
    :func:`max_dim_pointwise`. The list follows the row order of
    ``cloud.points``.
    """
    if alpha_override is not None:
        alpha = _check_alpha(alpha_override)
        grid = separability.alphas if separability is not None else alpha_grid(alphas)
        hit = np.flatnonzero(np.isclose(grid, alpha, rtol=0.0, atol=1e-15))
        if separability is not None and hit.size:
            counts = separability.counts[hit[0]]
        else:
            counts = inseparability_fractions(cloud, [alpha]).counts[0]
    else:
        sep = separability if separability is not None else inseparability_fractions(cloud, alpha_grid(alphas))
        _, prof = _global_from_separability(sep)
        alpha = float(sep.alphas[prof.selected_index])
        counts = sep.counts[prof.selected_index]
    N = counts.shape[0]
    cap = max_dim_pointwise(N, alpha)
    dims = _n_from_counts(counts, N - 1, alpha)
    out = []
    for c, n in zip(counts, dims):
        if c == 0:
            out.append(IdEstimate(cap, alpha, True, cap, N))
        else:
            out.append(IdEstimate(float(n), alpha, False, cap, N))
    return out


def _degenerate(n_points: int) -> IdEstimate:
    return IdEstimate(math.nan, math.nan, False, math.nan, n_points, degenerate=True)


def fisher_local_knn_id(
    data,
    k: int,
    cfg: PreprocessConfig | None = None,
    alphas=None,
    graph: NeighborGraph | None = None,
) -> list[IdEstimate]:
    """Local dimension of every point from its k-nearest-neighbour neighbourhood.

    Each neighbourhood (the point plus its ``k`` nearest neighbours in the raw
    space) is preprocessed on its own and passed to the global estimator, so
    alpha is re-selected per neighbourhood and the cap is
    ``max_dim_global(k + 1, alpha)``. Neighbourhoods without spread yield an
    estimate flagged ``degenerate`` and do not affect the others.
    """
    X = as_data_matrix(data)
    N = X.shape[0]
    if k < 1 or k >= N:
        raise InsufficientDataError(f"k={k} requires at least k+1 points, got {N}")
    if k < 20:
        warnings.warn(f"k={k} is small for separability statistics; k >= 20 is recommended", stacklevel=2)
    cfg = cfg or PreprocessConfig()
    grid = alpha_grid(alphas)
    if graph is None:
        graph = knn(X, k)
    elif graph.indices.shape != (N, k):
        raise ValueError("neighbour graph does not match data and k")
    out = []
    for i in range(N):
        members = np.concatenate(([i], graph.indices[i]))
        try:
            cloud = preprocess_pipeline(X[members], cfg)
            est, _ = fisher_global_id(cloud, grid)
        except (DegenerateDataError, InsufficientDataError):
            est = _degenerate(k + 1)
        out.append(est)
    return out
