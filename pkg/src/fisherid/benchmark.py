"""Experiment protocols: alpha sweeps, cap curves and subsample studies."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .baselines import BaselineConfig, correlation_dimension, mle_id, twonn_id
from .errors import DomainError
from .estimators import (
    fisher_global_id,
    fisher_local_knn_id,
    fisher_pointwise_id,
    max_dim_global,
    max_dim_pointwise,
)
from .preprocess import PreprocessConfig, as_data_matrix, preprocess_pipeline
from .separability import alpha_grid, inseparability_fractions

__all__ = [
    "ESTIMATORS",
    "ExperimentRecord",
    "ExperimentReport",
    "SweepReport",
    "subsample_experiment",
    "cap_curves",
    "alpha_sweep_report",
    "summarize",
]

ESTIMATORS = ("fishers", "mle", "cd", "twonn")
METRICS = ("global_id", "mean_local_id", "mean_pointwise_id")


@dataclass
class ExperimentRecord:
    dataset_id: str
    estimator_id: str
    subsample_size: int
    repeat_index: int
    global_id: float | None
    mean_local_id: float | None
    mean_pointwise_id: float | None
    runtime_seconds: float
    local_skipped: bool = False

    def key(self):
        return (self.dataset_id, self.estimator_id, self.subsample_size, self.repeat_index)


@dataclass
class ExperimentReport:
    records: list[ExperimentRecord]
    summary: list[dict]
    config: dict = field(default_factory=dict)

    def to_dict(self, include_runtime: bool = True) -> dict:
        records = []
        for r in self.records:
            d = asdict(r)
            if not include_runtime:
                del d["runtime_seconds"]
            records.append(d)
        return {"config": self.config, "records": records, "summary": self.summary}


def _mean_finite(values) -> float | None:
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    return float(v.mean()) if v.size else None


def summarize(records: list[ExperimentRecord]) -> list[dict]:
    """Mean and 2.5/97.5 percentiles per (dataset, estimator, size, metric)."""
    cells: dict[tuple, list[ExperimentRecord]] = {}
    for r in records:
        cells.setdefault((r.dataset_id, r.estimator_id, r.subsample_size), []).append(r)
    out = []
    for key in sorted(cells):
        for metric in METRICS:
            vals = [getattr(r, metric) for r in cells[key]]
            vals = np.array([v for v in vals if v is not None], dtype=float)
            if vals.size == 0:
                continue
            lo, hi = np.percentile(vals, [2.5, 97.5])
            out.append(
                {
                    "dataset_id": key[0],
                    "estimator_id": key[1],
                    "subsample_size": key[2],
                    "metric": metric,
                    "n_repeats": int(vals.size),
                    "mean": float(vals.mean()),
                    "ci_low": float(lo),
                    "ci_high": float(hi),
                }
            )
    return out


def _subsample_indices(N: int, size: int, seed: int, repeat: int) -> np.ndarray:
    if size == N:
        return np.arange(N)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(size), int(repeat)])))
    return np.sort(rng.choice(N, size=size, replace=False))


def _run_estimator(name, X, k_local, cfg, alphas, bcfg):
    """Return (global, mean_local, mean_pointwise, local_skipped)."""
    n = X.shape[0]
    do_local = k_local is not None and k_local < n
    if name == "fishers":
        cloud = preprocess_pipeline(X, cfg)
        sep = inseparability_fractions(cloud, alphas)
        est, _ = fisher_global_id(cloud, separability=sep)
        pw = fisher_pointwise_id(cloud, separability=sep)
        mean_pw = _mean_finite([e.dimension for e in pw])
        mean_loc = None
        if do_local:
            loc = fisher_local_knn_id(X, k_local, cfg, alphas)
            mean_loc = _mean_finite([e.dimension for e in loc])
        return est.dimension, mean_loc, mean_pw, not do_local
    if name == "mle":
        g = mle_id(X, bcfg.mle_k).global_id
        mean_loc = _mean_finite(mle_id(X, k_local).local) if do_local else None
        return g, mean_loc, None, not do_local
    if name == "cd":
        return correlation_dimension(X, bcfg.cd_radius_quantiles).dimension, None, None, False
    if name == "twonn":
        return twonn_id(X, bcfg.twonn_discard_fraction).dimension, None, None, False
    raise ValueError(f"unknown estimator {name!r}; choose from {ESTIMATORS}")


def subsample_experiment(
    data,
    estimators=ESTIMATORS,
    sizes=(200, 500, 1000, 2000),
    repeats: int = 10,
    k_local: int | None = 100,
    seed: int = 0,
    dataset_id: str = "data",
    cfg: PreprocessConfig | None = None,
    alphas=None,
    baseline_cfg: BaselineConfig | None = None,
) -> ExperimentReport:
    """Run estimators on repeated random subsamples of ``data``.

    For every size and repeat a subsample is drawn without replacement from a
    stream keyed by ``(seed, size, repeat)``, so it does not depend on which
    estimators are enabled. Local variants use ``k_local`` neighbours and are
    skipped (``local_skipped``) when the subsample has ``k_local`` points or
    fewer.
    """
    X = as_data_matrix(data)
    N = X.shape[0]
    sizes = sorted(int(s) for s in sizes)
    if not sizes or sizes[0] < 2 or sizes[-1] > N:
        raise ValueError(f"subsample sizes must lie in [2, {N}], got {sizes}")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    for name in estimators:
        if name not in ESTIMATORS:
            raise ValueError(f"unknown estimator {name!r}; choose from {ESTIMATORS}")
    cfg = cfg or PreprocessConfig()
    grid = alpha_grid(alphas)
    bcfg = baseline_cfg or BaselineConfig()
    records = []
    for size in sizes:
        for rep in range(repeats):
            sub = X[_subsample_indices(N, size, seed, rep)]
            for name in estimators:
                t0 = time.perf_counter()
                g, loc, pw, skipped = _run_estimator(name, sub, k_local, cfg, grid, bcfg)
                runtime = time.perf_counter() - t0
                records.append(ExperimentRecord(dataset_id, name, size, rep, g, loc, pw, runtime, skipped))
    records.sort(key=ExperimentRecord.key)
    config = {
        "dataset_id": dataset_id,
        "estimators": list(estimators),
        "sizes": sizes,
        "repeats": repeats,
        "k_local": k_local,
        "seed": seed,
        "condition_threshold": cfg.condition_threshold,
        "alphas": [float(a) for a in grid],
        "baseline": asdict(bcfg),
    }
    return ExperimentReport(records=records, summary=summarize(records), config=config)


def cap_curves(alphas=None, sizes=(100, 1000, 10000)) -> list[dict]:
    """Largest measurable pointwise and global dimension over an (alpha, N) grid."""
    grid = alpha_grid(alphas)
    rows = []
    for a in grid:
        for n in sizes:
            if n < 2:
                raise DomainError(f"sample size must be >= 2, got {n}")
            rows.append(
                {
                    "alpha": float(a),
                    "n_points": int(n),
                    "max_dim_pointwise": max_dim_pointwise(int(n), a),
                    "max_dim_global": max_dim_global(int(n), a),
                }
            )
    return rows


@dataclass
class SweepReport:
    rows: list[dict]
    histogram: list[dict]
    selected_index: int
    n_points: int
    n_components: int


def alpha_sweep_report(data, alphas=None, cfg: PreprocessConfig | None = None, bins: int = 20) -> SweepReport:
    """Per-alpha mean inseparability, dimension, cap and selection flag.

    The histogram holds, for every alpha, counts of per-point inseparability
    probabilities over ``bins`` equal bins spanning [0, max p].
    """
    cloud = preprocess_pipeline(data, cfg)
    sep = inseparability_fractions(cloud, alpha_grid(alphas))
    _, profile = fisher_global_id(cloud, separability=sep)
    mean_p = sep.mean_p
    rows = []
    for i, est in enumerate(profile.estimates):
        rows.append(
            {
                "alpha": est.alpha_used,
                "mean_p": float(mean_p[i]),
                "separable_fraction": float(sep.separable_fraction[i]),
                "n_alpha": est.dimension,
                "saturated": est.saturated,
                "cap": est.cap,
                "selected": i == profile.selected_index,
            }
        )
    point_p = sep.point_p
    top = float(point_p.max())
    edges = np.linspace(0.0, top if top > 0 else 1.0, bins + 1)
    hist = []
    for i, a in enumerate(sep.alphas):
        counts, _ = np.histogram(point_p[i], bins=edges)
        for b in range(bins):
            hist.append({"alpha": float(a), "bin_low": float(edges[b]), "bin_high": float(edges[b + 1]), "count": int(counts[b])})
    return SweepReport(rows, hist, profile.selected_index, cloud.n_points, cloud.n_components)
