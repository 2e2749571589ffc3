"""Intrinsic dimension estimation from Fisher separability."""

__version__ = "0.1.0"

from .baselines import BaselineConfig, correlation_dimension, mle_id, twonn_id
from .benchmark import alpha_sweep_report, cap_curves, subsample_experiment
from .errors import (
    DegenerateDataError,
    DomainError,
    FisherIdError,
    FullySeparableError,
    InsufficientDataError,
    InvalidDataError,
)
from .estimators import (
    IdEstimate,
    IdProfile,
    fisher_global_id,
    fisher_local_knn_id,
    fisher_pointwise_id,
    max_dim_global,
    max_dim_pointwise,
    n_from_p,
    p_ref,
    select_alpha,
)
from .lambert import lambert_w0, lambert_w0_log
from .neighbors import NeighborGraph, knn
from .preprocess import PreprocessConfig, PreprocessedCloud, preprocess_pipeline
from .separability import DEFAULT_ALPHAS, SeparabilityProfile, inseparability_fractions, set_threads
from .synthdata import GeneratorSpec, generate

__all__ = [
    "__version__",
    "BaselineConfig",
    "correlation_dimension",
    "mle_id",
    "twonn_id",
    "alpha_sweep_report",
    "cap_curves",
    "subsample_experiment",
    "DegenerateDataError",
    "DomainError",
    "FisherIdError",
    "FullySeparableError",
    "InsufficientDataError",
    "InvalidDataError",
    "IdEstimate",
    "IdProfile",
    "fisher_global_id",
    "fisher_local_knn_id",
    "fisher_pointwise_id",
    "max_dim_global",
    "max_dim_pointwise",
    "n_from_p",
    "p_ref",
    "select_alpha",
    "lambert_w0",
    "lambert_w0_log",
    "NeighborGraph",
    "knn",
    "PreprocessConfig",
    "PreprocessedCloud",
    "preprocess_pipeline",
    "DEFAULT_ALPHAS",
    "SeparabilityProfile",
    "inseparability_fractions",
    "set_threads",
    "GeneratorSpec",
    "generate",
]
