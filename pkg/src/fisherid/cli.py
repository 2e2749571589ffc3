"""Command-line front end.

Exit codes: 0 report written, 1 unexpected failure, 2 bad input or
arguments, 3 degenerate data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import BaselineConfig, correlation_dimension, mle_id, twonn_id
from .benchmark import ESTIMATORS, alpha_sweep_report, cap_curves, subsample_experiment
from .errors import DegenerateDataError, FisherIdError, InsufficientDataError, InvalidDataError
from .estimators import fisher_global_id, fisher_local_knn_id, fisher_pointwise_id
from .neighbors import knn
from .preprocess import PreprocessConfig, as_data_matrix, preprocess_pipeline
from .separability import DEFAULT_ALPHAS, alpha_grid, inseparability_fractions, set_threads
from .synthdata import GENERATOR_KINDS, GeneratorSpec, generate

PROG = "fisherid"

SWEEP_COLUMNS = ("alpha", "mean_p", "separable_fraction", "n_alpha", "saturated", "cap", "selected")
HIST_COLUMNS = ("alpha", "bin_low", "bin_high", "count")
CAPS_COLUMNS = ("alpha", "n_points", "cap_kind", "value")
RECORD_COLUMNS = (
    "dataset_id",
    "estimator_id",
    "subsample_size",
    "repeat_index",
    "global_id",
    "mean_local_id",
    "mean_pointwise_id",
    "local_skipped",
    "runtime_seconds",
)
SUMMARY_COLUMNS = ("dataset_id", "estimator_id", "subsample_size", "metric", "n_repeats", "mean", "ci_low", "ci_high")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- input / output


def read_table(path, ignore_columns=()) -> tuple[np.ndarray, list[str] | None]:
    """Read a comma- or tab-separated numeric table with an optional header row."""
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except (OSError, UnicodeDecodeError) as exc:
        raise InvalidDataError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidDataError(f"{path}: empty file")
    delim = "\t" if "\t" in lines[0] else ","
    rows = list(csv.reader(lines, delimiter=delim))
    header = None
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        header = [v.strip() for v in rows[0]]
        rows = rows[1:]
    if not rows:
        raise InvalidDataError(f"{path}: no data rows")
    width = len(header) if header is not None else len(rows[0])
    values = []
    for lineno, row in enumerate(rows, start=2 if header is not None else 1):
        if len(row) != width:
            raise InvalidDataError(f"{path}: line {lineno} has {len(row)} fields, expected {width}")
        try:
            values.append([float(v) for v in row])
        except ValueError as exc:
            raise InvalidDataError(f"{path}: line {lineno}: {exc}") from exc
    X = np.array(values, dtype=float)
    drop = _resolve_columns(ignore_columns, header, width)
    if drop:
        keep = [j for j in range(width) if j not in drop]
        if not keep:
            raise InvalidDataError("every column was ignored")
        X = X[:, keep]
        if header is not None:
            header = [header[j] for j in keep]
    return as_data_matrix(X), header


def _resolve_columns(spec, header, width) -> set[int]:
    out = set()
    for item in spec:
        if header is not None and item in header:
            out.add(header.index(item))
            continue
        try:
            j = int(item)
        except ValueError:
            raise InvalidDataError(f"unknown column {item!r}") from None
        if not 0 <= j < width:
            raise InvalidDataError(f"column index {j} out of range")
        out.add(j)
    return out


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def dumps_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def write_atomic(path, text: str) -> None:
    """Write via a temporary file and rename, or to stdout for ``-``/None."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------- argument parsing


def parse_alphas(text: str | None) -> np.ndarray:
    """``start:stop:step`` (stop included) or a comma-separated list."""
    if text is None:
        return DEFAULT_ALPHAS.copy()
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            vals = np.round(start + step * np.arange(n), 12)
        else:
            vals = [float(v) for v in text.split(",") if v.strip()]
        return alpha_grid(vals)
    except ValueError as exc:
        raise UsageError(f"invalid alpha grid {text!r}: {exc}") from None


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def parse_str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def parse_kind(text: str, N: int, seed: int, noise: float) -> GeneratorSpec:
    """``kind[:n]`` as used by ``benchmark --kinds``."""
    kind, _, n = text.partition(":")
    try:
        return GeneratorSpec(kind=kind, n=int(n) if n else 2, N=N, seed=seed, noise=noise)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_common(p: argparse.ArgumentParser, data_input=True):
    if data_input:
        p.add_argument("--input", required=True, help="comma- or tab-separated numeric table")
        p.add_argument("--ignore-columns", default="", help="comma-separated column names or 0-based indices to skip")
    p.add_argument("--alphas", default=None, help="alpha grid as start:stop:step or a comma list (default 0.6:0.98:0.02)")
    p.add_argument("--C", type=float, default=10.0, dest="C", help="PCA condition-number threshold (default 10)")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $FISHERID_THREADS)")
    p.add_argument("--output", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description="Intrinsic dimension from Fisher separability.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "estimate",
        help="estimate intrinsic dimension of a table",
        description="Writes a JSON report with one block per estimate. Per-point arrays follow input row order; "
        "rows removed during preprocessing hold null.",
    )
    _add_common(p)
    p.add_argument("--estimator", default="fishers", help=f"comma list from {','.join(ESTIMATORS)}")
    p.add_argument("--local", action="store_true", help="add per-point local kNN estimates")
    p.add_argument("--no-pointwise", action="store_true", help="skip the global pointwise Fisher estimate")
    p.add_argument("--k", type=int, default=100, help="neighbourhood size for local estimates (default 100)")
    p.add_argument("--mle-k", type=int, default=20, help="neighbours for the global MLE (default 20)")
    p.add_argument("--cd-quantiles", default="0.01,0.1", help="pairwise-distance quantiles bounding the CD fit")
    p.add_argument("--twonn-discard", type=float, default=0.1, help="fraction of largest TwoNN ratios censored")
    p.add_argument("--pca", type=int, default=None, help="project the data on its first N principal components first")
    p.set_defaults(func=run_estimate)

    p = sub.add_parser(
        "generate",
        help="write a synthetic dataset",
        description="Writes a CSV table (one point per row) and a sidecar <output>.json with the generator spec. "
        "ten_balls appends a 'label' column holding each point's ball dimension. For 'sphere', --n is the "
        "ambient dimension (S^(n-1)).",
    )
    p.add_argument("--kind", required=True, choices=GENERATOR_KINDS)
    p.add_argument("--n", type=int, default=2, help="intrinsic dimension (ambient dimension for sphere)")
    p.add_argument("--N", type=int, default=2000, dest="N", help="number of points")
    p.add_argument("--ambient", type=int, default=None, help="zero-pad into this many coordinates")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise for swiss_roll")
    p.add_argument("--points-per-ball", type=int, default=500)
    p.add_argument("--header", action="store_true", help="write a header row")
    p.add_argument("--output", required=True)
    p.set_defaults(func=run_generate, threads=None)

    p = sub.add_parser(
        "sweep",
        help="per-alpha separability table",
        description="CSV columns: " + ",".join(SWEEP_COLUMNS) + ". With --hist-output a second CSV with columns "
        + ",".join(HIST_COLUMNS) + " holds per-point probability histograms.",
    )
    _add_common(p)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--hist-output", default=None)
    p.set_defaults(func=run_sweep)

    p = sub.add_parser(
        "caps",
        help="maximal measurable dimensions over an (alpha, N) grid",
        description="CSV columns: " + ",".join(CAPS_COLUMNS) + "; cap_kind is 'pointwise' or 'global'.",
    )
    _add_common(p, data_input=False)
    p.add_argument("--sizes", default="100,1000,10000")
    p.set_defaults(func=run_caps)

    p = sub.add_parser(
        "benchmark",
        help="estimators against subsample size",
        description="Writes records.csv (" + ",".join(RECORD_COLUMNS) + "), summary.csv ("
        + ",".join(SUMMARY_COLUMNS) + ") and report.json into --output-dir.",
    )
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--kinds", help="comma list of generator kinds with optional dimension, e.g. ball:5,swiss_roll")
    src.add_argument("--input", help="benchmark a table instead of synthetic data")
    p.add_argument("--ignore-columns", default="")
    p.add_argument("--N", type=int, default=2000, dest="N", help="points generated per synthetic dataset")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--sizes", default="200,500,1000,2000")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--k", type=int, default=100, help="neighbourhood size for local variants")
    p.add_argument("--estimators", default=",".join(ESTIMATORS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alphas", default=None)
    p.add_argument("--C", type=float, default=10.0, dest="C")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--no-runtime", action="store_true", help="omit runtimes so reports are byte-reproducible")
    p.add_argument("--output-dir", required=True)
    p.set_defaults(func=run_benchmark)
    return parser


# ---------------------------------------------------------------- commands


def _config_echo(args) -> dict:
    skip = {"func", "threads", "output"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _preprocess_cfg(args) -> PreprocessConfig:
    try:
        return PreprocessConfig(condition_threshold=args.C)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _pca_project(X: np.ndarray, n: int) -> np.ndarray:
    if n < 1:
        raise UsageError("--pca must be >= 1")
    Xc = X - X.mean(axis=0)
    U, s, _ = np.linalg.svd(Xc, full_matrices=False)
    n = min(n, s.size)
    return U[:, :n] * s[:n]


def _per_point(values, kept_rows, n_rows):
    out = [None] * n_rows
    for row, v in zip(kept_rows, values):
        out[int(row)] = v
    return out


def _summary(values) -> dict:
    v = np.array([x for x in values if x is not None], dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return {"mean": None, "median": None}
    return {"mean": float(v.mean()), "median": float(np.median(v))}


def _fisher_blocks(X, args, cfg, alphas) -> tuple[dict, list[dict]]:
    n_rows = X.shape[0]
    cloud = preprocess_pipeline(X, cfg)
    sep = inseparability_fractions(cloud, alphas)
    est, profile = fisher_global_id(cloud, separability=sep)
    prep = {
        "retained_components": cloud.n_components,
        "retained_eigenvalues": cloud.retained_eigenvalues,
        "dropped_rows": cloud.dropped_point_indices,
        "n_points_used": cloud.n_points,
    }
    blocks = [
        {
            "estimator": "fishers",
            "variant": "global",
            "value": est.dimension,
            "alpha": est.alpha_used,
            "saturated": est.saturated,
            "cap": est.cap,
            "n_points": est.n_points_used,
            "profile": [
                {"alpha": e.alpha_used, "mean_p": float(p), "n_alpha": e.dimension, "saturated": e.saturated, "cap": e.cap}
                for e, p in zip(profile.estimates, sep.mean_p)
            ],
        }
    ]
    if not args.no_pointwise:
        pw = fisher_pointwise_id(cloud, separability=sep)
        kept = cloud.kept_point_indices
        values = _per_point([e.dimension for e in pw], kept, n_rows)
        saturated = _per_point([e.saturated for e in pw], kept, n_rows)
        blocks.append(
            {
                "estimator": "fishers",
                "variant": "pointwise",
                "alpha": pw[0].alpha_used,
                "cap": pw[0].cap,
                **_summary(values),
                "n_saturated": int(sum(e.saturated for e in pw)),
                "values": values,
                "saturated": saturated,
                "dropped": [{"row": int(r), "reason": "zero vector after centering and whitening"} for r in cloud.dropped_point_indices],
            }
        )
    if args.local:
        loc = fisher_local_knn_id(X, args.k, cfg, alphas)
        values = [None if e.degenerate else e.dimension for e in loc]
        blocks.append(
            {
                "estimator": "fishers",
                "variant": "local",
                "k": args.k,
                **_summary(values),
                "n_saturated": int(sum(e.saturated for e in loc)),
                "values": values,
                # for display, local values are clipped at the embedding dimension
                "display_cap": X.shape[1],
                "display_values": [None if v is None else min(v, X.shape[1]) for v in values],
                "alphas": [None if e.degenerate else e.alpha_used for e in loc],
                "saturated": [e.saturated for e in loc],
                "caps": [None if e.degenerate else e.cap for e in loc],
                "dropped": [{"row": i, "reason": "degenerate neighbourhood"} for i, e in enumerate(loc) if e.degenerate],
            }
        )
    return prep, blocks


def run_estimate(args) -> int:
    names = parse_str_list(args.estimator)
    for name in names:
        if name not in ESTIMATORS:
            raise UsageError(f"unknown estimator {name!r}; choose from {','.join(ESTIMATORS)}")
    try:
        lo, hi = (float(v) for v in args.cd_quantiles.split(","))
        bcfg = BaselineConfig(mle_k=args.mle_k, cd_radius_quantiles=(lo, hi), twonn_discard_fraction=args.twonn_discard)
    except ValueError as exc:
        raise UsageError(f"invalid baseline settings: {exc}") from None
    cfg = _preprocess_cfg(args)
    alphas = parse_alphas(args.alphas)
    X, header = read_table(args.input, parse_str_list(args.ignore_columns))
    n_rows, n_cols = X.shape
    if args.pca is not None:
        X = _pca_project(X, args.pca)
    if args.local and args.k >= n_rows:
        raise InsufficientDataError(f"--k {args.k} needs more than {args.k} rows, got {n_rows}")

    report = {
        "tool": {"name": PROG, "version": __version__},
        "config": _config_echo(args),
        "input": {"path": str(args.input), "n_rows": n_rows, "n_columns": n_cols, "columns": header},
        "preprocessing": None,
        "estimates": [],
    }
    graph_cache = {}

    def graph(k):
        if k not in graph_cache:
            graph_cache[k] = knn(X, k)
        return graph_cache[k]

    for name in names:
        if name == "fishers":
            prep, blocks = _fisher_blocks(X, args, cfg, alphas)
            report["preprocessing"] = prep
            report["estimates"].extend(blocks)
        elif name == "mle":
            res = mle_id(X, bcfg.mle_k, graph=graph(bcfg.mle_k))
            block = {"estimator": "mle", "variant": "global", "value": res.global_id, "k": bcfg.mle_k, "n_skipped": res.n_skipped}
            report["estimates"].append(block)
            if args.local:
                loc = mle_id(X, args.k, graph=graph(args.k))
                values = [float(v) if np.isfinite(v) else None for v in loc.local]
                report["estimates"].append(
                    {"estimator": "mle", "variant": "local", "k": args.k, **_summary(values), "values": values}
                )
        elif name == "cd":
            res = correlation_dimension(X, bcfg.cd_radius_quantiles)
            report["estimates"].append(
                {
                    "estimator": "cd",
                    "variant": "global",
                    "value": res.dimension,
                    "fit_residual": res.residual,
                    "radius_quantiles": list(bcfg.cd_radius_quantiles),
                    "n_radii": int(res.radii.size),
                }
            )
        elif name == "twonn":
            res = twonn_id(X, bcfg.twonn_discard_fraction, graph=graph(2))
            report["estimates"].append(
                {
                    "estimator": "twonn",
                    "variant": "global",
                    "value": res.dimension,
                    "discard_fraction": bcfg.twonn_discard_fraction,
                    "n_used": res.n_used,
                    "n_skipped": res.n_skipped,
                }
            )
    write_atomic(args.output, dumps_json(report))
    return 0


def run_generate(args) -> int:
    try:
        spec = GeneratorSpec(
            kind=args.kind,
            n=args.n,
            N=args.N,
            ambient=args.ambient,
            seed=args.seed,
            noise=args.noise,
            points_per_ball=args.points_per_ball,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    X, labels = generate(spec)
    columns = [f"x{j}" for j in range(X.shape[1])]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if labels is not None:
        columns.append("label")
    if args.header:
        w.writerow(columns)
    for i, row in enumerate(X):
        cells = [repr(float(v)) for v in row]
        if labels is not None:
            cells.append(str(int(labels[i])))
        w.writerow(cells)
    sidecar = {
        "spec": spec.to_dict(),
        "shape": list(X.shape),
        "columns": columns,
        "header": bool(args.header),
        "label_column": "label" if labels is not None else None,
    }
    if spec.kind == "ten_balls":
        sidecar["layout"] = (
            "ball of dimension m occupies coordinates 0..m-1 and is shifted by (m-2) along coordinate 0; "
            "label = ball dimension"
        )
    write_atomic(args.output, buf.getvalue())
    write_atomic(str(args.output) + ".json", dumps_json(sidecar))
    return 0


def run_sweep(args) -> int:
    cfg = _preprocess_cfg(args)
    alphas = parse_alphas(args.alphas)
    if args.bins < 1:
        raise UsageError("--bins must be >= 1")
    X, _ = read_table(args.input, parse_str_list(args.ignore_columns))
    rep = alpha_sweep_report(X, alphas, cfg, bins=args.bins)
    if args.hist_output:
        write_atomic(args.hist_output, dumps_csv(rep.histogram, HIST_COLUMNS))
    write_atomic(args.output, dumps_csv(rep.rows, SWEEP_COLUMNS))
    return 0


def run_caps(args) -> int:
    alphas = parse_alphas(args.alphas)
    sizes = parse_int_list(args.sizes)
    if not sizes or min(sizes) < 2:
        raise UsageError("--sizes must be integers >= 2")
    rows = []
    for r in cap_curves(alphas, sizes):
        rows.append({"alpha": r["alpha"], "n_points": r["n_points"], "cap_kind": "pointwise", "value": r["max_dim_pointwise"]})
        rows.append({"alpha": r["alpha"], "n_points": r["n_points"], "cap_kind": "global", "value": r["max_dim_global"]})
    write_atomic(args.output, dumps_csv(rows, CAPS_COLUMNS))
    return 0


def run_benchmark(args) -> int:
    cfg = _preprocess_cfg(args)
    alphas = parse_alphas(args.alphas)
    sizes = parse_int_list(args.sizes)
    estimators = parse_str_list(args.estimators)
    for name in estimators:
        if name not in ESTIMATORS:
            raise UsageError(f"unknown estimator {name!r}; choose from {','.join(ESTIMATORS)}")
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    datasets = []
    if args.kinds:
        for item in parse_str_list(args.kinds):
            spec = parse_kind(item, args.N, args.seed, args.noise)
            X, _ = generate(spec)
            datasets.append((item, X))
    else:
        X, _ = read_table(args.input, parse_str_list(args.ignore_columns))
        datasets.append((Path(args.input).stem, X))
    for ds_id, X in datasets:
        if not sizes or min(sizes) < 2 or max(sizes) > X.shape[0]:
            raise UsageError(f"--sizes must lie in [2, {X.shape[0]}] for dataset {ds_id}")

    records, summary, per_dataset = [], [], []
    for ds_id, X in datasets:
        rep = subsample_experiment(
            X, estimators, sizes, args.repeats, args.k, args.seed, ds_id, cfg, alphas
        )
        d = rep.to_dict(include_runtime=not args.no_runtime)
        records.extend(d["records"])
        summary.extend(d["summary"])
        per_dataset.append(d["config"])
    out = Path(args.output_dir)
    record_cols = [c for c in RECORD_COLUMNS if not (args.no_runtime and c == "runtime_seconds")]
    report = {
        "tool": {"name": PROG, "version": __version__},
        "config": _config_echo(args),
        "experiments": per_dataset,
        "records": records,
        "summary": summary,
    }
    write_atomic(out / "records.csv", dumps_csv(records, record_cols))
    write_atomic(out / "summary.csv", dumps_csv(summary, SUMMARY_COLUMNS))
    write_atomic(out / "report.json", dumps_json(report))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        set_threads(args.threads)
        return args.func(args)
    except (InvalidDataError, InsufficientDataError, UsageError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    except DegenerateDataError as exc:
        print(f"{PROG}: degenerate data: {exc}", file=sys.stderr)
        return 3
    except FisherIdError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
