"""Normalisation applied before separability analysis.

Centering, PCA truncated by a condition-number threshold, whitening and
projection of every point onto the unit sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError, InsufficientDataError, InvalidDataError

__all__ = [
    "PreprocessConfig",
    "PreprocessedCloud",
    "as_data_matrix",
    "center",
    "pca_reduce",
    "whiten",
    "project_sphere",
    "preprocess_pipeline",
]

ZERO_NORM_THRESHOLD = 1e-10
# Centered data smaller than this fraction of the raw magnitude is round-off
_DEGENERATE_RELATIVE = 1e-12


@dataclass(frozen=True)
class PreprocessConfig:
    """Parameters of the normalisation pipeline.

    Parameters
    ----------
    condition_threshold : float
        Components with eigenvalue below ``lambda_1 / condition_threshold``
        are discarded. Must exceed 1.
    project_to_sphere : bool
        Scale every whitened point to unit length.
    """

    condition_threshold: float = 10.0
    project_to_sphere: bool = True

    def __post_init__(self):
        if not self.condition_threshold > 1:
            raise ValueError(f"condition_threshold must be > 1, got {self.condition_threshold}")


@dataclass
class PreprocessedCloud:
    points: np.ndarray
    retained_eigenvalues: np.ndarray
    mean_vector: np.ndarray
    dropped_point_indices: np.ndarray
    components: np.ndarray = field(repr=False)
    all_eigenvalues: np.ndarray = field(repr=False)
    n_input_points: int = 0
    unit_norm: bool = True

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def n_components(self) -> int:
        return self.points.shape[1]

    @property
    def kept_point_indices(self) -> np.ndarray:
        """Input row index of every row of :attr:`points`."""
        mask = np.ones(self.n_input_points, dtype=bool)
        mask[self.dropped_point_indices] = False
        return np.flatnonzero(mask)


def as_data_matrix(data) -> np.ndarray:
    """Validate ``data`` as a finite 2D float array with at least one row and column."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InvalidDataError(f"expected a 2D table, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidDataError(f"empty data matrix of shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidDataError("data contains NaN or infinite values")
    return arr


def center(data) -> np.ndarray:
    """Subtract the column means."""
    X = as_data_matrix(data)
    return X - X.mean(axis=0)


def pca_reduce(data, C: float = 10.0) -> tuple[np.ndarray, np.ndarray]:
    """Project centered data onto its leading principal components.

    Keeps every component whose covariance eigenvalue is at least
    ``lambda_1 / C``, and always at least one.

    Returns
    -------
    scores : ndarray of shape (N, k)
    eigenvalues : ndarray of shape (k,)
        Sample-covariance eigenvalues (denominator N-1), descending.
    """
    scores, eigenvalues, _, _ = _pca(as_data_matrix(data), C)
    return scores, eigenvalues


def _pca(X: np.ndarray, C: float):
    if not C > 1:
        raise ValueError(f"condition threshold must be > 1, got {C}")
    N = X.shape[0]
    if N < 2:
        raise InsufficientDataError("PCA needs at least 2 points")
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    eig = s**2 / (N - 1)
    if eig[0] == 0.0:
        raise DegenerateDataError("all points coincide: covariance is zero")
    k = int(np.count_nonzero(eig >= eig[0] / C))
    k = max(1, min(k, N - 1))
    scores = U[:, :k] * s[:k]
    return scores, eig[:k], Vt[:k], eig


def whiten(scores, eigenvalues) -> np.ndarray:
    """Rescale principal-component scores to unit variance."""
    S = as_data_matrix(scores)
    lam = np.asarray(eigenvalues, dtype=float).ravel()
    if lam.shape[0] != S.shape[1]:
        raise ValueError(f"{lam.shape[0]} eigenvalues for {S.shape[1]} columns")
    if np.any(lam <= 0):
        raise DegenerateDataError("cannot whiten along a zero-variance direction")
    return S / np.sqrt(lam)


def project_sphere(data) -> tuple[np.ndarray, np.ndarray]:
    """Normalise rows to unit length, dropping rows of norm below 1e-10.

    Returns the retained rows and the indices of the dropped ones.
    """
    X = as_data_matrix(data)
    norms = np.linalg.norm(X, axis=1)
    keep = norms >= ZERO_NORM_THRESHOLD
    dropped = np.flatnonzero(~keep)
    if not keep.any():
        raise DegenerateDataError("every point has zero norm")
    return X[keep] / norms[keep, None], dropped


def preprocess_pipeline(data, cfg: PreprocessConfig | None = None) -> PreprocessedCloud:
    """Run center -> PCA cutoff -> whitening -> (optional) sphere projection."""
    cfg = cfg or PreprocessConfig()
    X = as_data_matrix(data)
    N = X.shape[0]
    if N < 2:
        raise InsufficientDataError("preprocessing needs at least 2 points")
    mean = X.mean(axis=0)
    Xc = X - mean
    scale = np.abs(X).max()
    if np.abs(Xc).max() <= _DEGENERATE_RELATIVE * scale:
        raise DegenerateDataError("all points coincide: covariance is zero")
    scores, lam, components, all_eig = _pca(Xc, cfg.condition_threshold)
    Z = whiten(scores, lam)
    if cfg.project_to_sphere:
        Z, dropped = project_sphere(Z)
    else:
        dropped = np.empty(0, dtype=np.intp)
    return PreprocessedCloud(
        points=Z,
        retained_eigenvalues=lam,
        mean_vector=mean,
        dropped_point_indices=dropped,
        components=components,
        all_eigenvalues=all_eig,
        n_input_points=N,
        unit_norm=cfg.project_to_sphere,
    )
