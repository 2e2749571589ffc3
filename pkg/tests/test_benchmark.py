import json

import numpy as np
import pytest

from fisherid.benchmark import alpha_sweep_report, cap_curves, subsample_experiment, summarize
from fisherid.estimators import fisher_global_id, max_dim_global, max_dim_pointwise
from fisherid.preprocess import preprocess_pipeline
from fisherid.separability import DEFAULT_ALPHAS
from fisherid.synthdata import sample_ball


@pytest.fixture(scope="module")
def ball5():
    return sample_ball(5, 2000, seed=0)


def test_single_cell_equals_direct_call(ball5):
    rep = subsample_experiment(ball5, ["fishers"], sizes=[2000], repeats=1, k_local=None)
    assert len(rep.records) == 1
    direct = fisher_global_id(preprocess_pipeline(ball5))[0].dimension
    assert rep.records[0].global_id == direct
    assert rep.records[0].local_skipped


def test_ball5_across_sizes(ball5):
    rep = subsample_experiment(ball5, ["fishers"], sizes=[200, 500, 1000, 2000], repeats=3, k_local=None)
    for row in rep.summary:
        if row["metric"] == "global_id":
            assert abs(row["mean"] - 5) <= 1


def test_summary_consistency(ball5):
    rep = subsample_experiment(ball5, ["fishers", "twonn"], sizes=[300, 600], repeats=4, k_local=None, seed=3)
    assert rep.summary == summarize(rep.records)
    for row in rep.summary:
        vals = [
            getattr(r, row["metric"])
            for r in rep.records
            if (r.dataset_id, r.estimator_id, r.subsample_size) == (row["dataset_id"], row["estimator_id"], row["subsample_size"])
        ]
        assert row["n_repeats"] == len(vals) == 4
        assert row["mean"] == pytest.approx(np.mean(vals), abs=1e-12)
        assert row["ci_low"] <= row["mean"] <= row["ci_high"]
        assert row["ci_low"] >= min(vals) and row["ci_high"] <= max(vals)


def test_subsamples_do_not_depend_on_estimator_set(ball5):
    a = subsample_experiment(ball5, ["fishers"], sizes=[400], repeats=3, k_local=None, seed=9)
    b = subsample_experiment(ball5, ["mle", "fishers"], sizes=[400], repeats=3, k_local=None, seed=9)
    fa = [r.global_id for r in a.records]
    fb = [r.global_id for r in b.records if r.estimator_id == "fishers"]
    assert fa == fb


def test_report_is_deterministic(ball5):
    kw = dict(estimators=["fishers", "mle", "cd", "twonn"], sizes=[200, 400], repeats=2, k_local=100, seed=1)
    a = json.dumps(subsample_experiment(ball5, **kw).to_dict(include_runtime=False), sort_keys=True)
    b = json.dumps(subsample_experiment(ball5, **kw).to_dict(include_runtime=False), sort_keys=True)
    assert a == b


def test_local_skipped_when_subsample_too_small(ball5):
    rep = subsample_experiment(ball5, ["fishers"], sizes=[100, 300], repeats=1, k_local=100)
    by_size = {r.subsample_size: r for r in rep.records}
    assert by_size[100].local_skipped and by_size[100].mean_local_id is None
    assert not by_size[300].local_skipped and by_size[300].mean_local_id is not None


def test_invalid_arguments(ball5):
    with pytest.raises(ValueError):
        subsample_experiment(ball5, ["fishers"], sizes=[5000])
    with pytest.raises(ValueError):
        subsample_experiment(ball5, ["fishers"], sizes=[100], repeats=0)
    with pytest.raises(ValueError):
        subsample_experiment(ball5, ["danco"], sizes=[100])


def test_cap_curves_monotone():
    rows = cap_curves(sizes=(100, 1000, 10000))
    assert len(rows) == 3 * DEFAULT_ALPHAS.size
    for r in rows:
        assert r["max_dim_pointwise"] == max_dim_pointwise(r["n_points"], r["alpha"])
        assert r["max_dim_global"] == max_dim_global(r["n_points"], r["alpha"])
    table = {(r["alpha"], r["n_points"]): r for r in rows}
    for a in DEFAULT_ALPHAS:
        vals = [table[(float(a), n)]["max_dim_global"] for n in (100, 1000, 10000)]
        assert vals == sorted(vals)
    for n in (100, 1000, 10000):
        vals = [table[(float(a), n)]["max_dim_pointwise"] for a in DEFAULT_ALPHAS]
        assert np.all(np.diff(vals) < 0)


def test_alpha_sweep_report():
    means = []
    for n in range(2, 11):
        rep = alpha_sweep_report(sample_ball(n, 2000, seed=0), bins=10)
        assert sum(r["selected"] for r in rep.rows) == 1
        assert rep.rows[rep.selected_index]["selected"]
        assert len(rep.histogram) == 10 * DEFAULT_ALPHAS.size
        # every point lands in a bin
        first = [h["count"] for h in rep.histogram if h["alpha"] == rep.rows[0]["alpha"]]
        assert sum(first) == rep.n_points
        means.append(next(r["mean_p"] for r in rep.rows if r["alpha"] == 0.88))
    assert np.all(np.diff(means) < 0)
