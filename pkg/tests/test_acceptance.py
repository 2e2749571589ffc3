"""End-to-end acceptance checks, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from fisherid.baselines import correlation_dimension, mle_id, twonn_id
from fisherid.benchmark import cap_curves, subsample_experiment
from fisherid.estimators import fisher_global_id, fisher_local_knn_id, fisher_pointwise_id, n_from_p, p_ref
from fisherid.lambert import BRANCH_POINT, lambert_w0
from fisherid.preprocess import preprocess_pipeline
from fisherid.separability import DEFAULT_ALPHAS, inseparability_fractions
from fisherid.synthdata import sample_ball, sample_sphere, swiss_roll, ten_balls
from oracles import cap_fraction, dimension_from_p, lambert_w0_bisect, random_rotation

SEEDS = range(10)


@pytest.fixture(scope="module", autouse=True)
def warm_up():
    # compile (or load) the counting kernels before anything is timed
    inseparability_fractions(preprocess_pipeline(sample_ball(3, 50, 0)))


def _global(X):
    return fisher_global_id(preprocess_pipeline(X))[0]


@pytest.mark.acceptance(criterion=1, title="inversion identity n_from_p(p_ref(n)) = n, 1e-9, < 1 s")
def test_criterion_01_inversion_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for a in DEFAULT_ALPHAS:
        for n in range(1, 101):
            worst = max(worst, abs(n_from_p(p_ref(n, a), a) - n) / n)
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-9, worst
    assert elapsed < 1.0, elapsed


@pytest.mark.acceptance(criterion=2, title="Lambert W0 vs bisection oracle 1e-10 on [-1/e, 1e30]; W(-1/e), W(e) 1e-12")
def test_criterion_02_lambert_w():
    xs = np.concatenate(
        [BRANCH_POINT + np.logspace(-15, math.log10(-BRANCH_POINT) - 1e-9, 80), -np.logspace(-12, -0.44, 40), np.logspace(-12, 30, 200)]
    )
    for x in xs:
        ref = float(lambert_w0_bisect(x))
        assert abs(lambert_w0(x) - ref) <= 1e-10 * abs(ref), x
    assert abs(lambert_w0(BRANCH_POINT) + 1.0) <= 1e-12
    assert abs(lambert_w0(math.e) - 1.0) <= 1e-12


@pytest.mark.acceptance(criterion=3, title="n-ball recovery n = 2..10, N = 2000, 10 seeds, mean within n +/- 1, < 30 s")
def test_criterion_03_ball_recovery():
    t0 = time.perf_counter()
    means = {n: np.mean([_global(sample_ball(n, 2000, s)).dimension for s in SEEDS]) for n in range(2, 11)}
    elapsed = time.perf_counter() - t0
    print({n: round(v, 3) for n, v in means.items()}, f"{elapsed:.1f}s")
    for n, v in means.items():
        assert abs(v - n) <= 1, (n, v)
    assert elapsed < 30, elapsed


@pytest.mark.acceptance(criterion=4, title="uniform S^10, N = 2000, 10 seeds, mean global estimate 11 +/- 1")
def test_criterion_04_sphere():
    mean = np.mean([_global(sample_sphere(11, 2000, s)).dimension for s in SEEDS])
    print(f"S^10 mean estimate {mean:.3f}")
    assert abs(mean - 11) <= 1


def _sphere_mean_p(n, seed):
    return inseparability_fractions(preprocess_pipeline(sample_sphere(n, 2000, seed)), [0.88]).mean_p[0]


@pytest.mark.xfail(
    strict=True,
    reason="for n <= 9 at alpha = 0.88 the exact cap fraction exceeds the closed-form bound, "
    "so the unbiased empirical mean_p lies above it in about half of the seeds",
)
@pytest.mark.acceptance(criterion=5, title="sphere mean_p <= bound in >= 9/10 seeds per n = 3..10, decreasing in n")
def test_criterion_05_concentration_bound():
    below, means = {}, []
    for n in range(3, 11):
        ps = [_sphere_mean_p(n, s) for s in SEEDS]
        below[n] = sum(p <= p_ref(n, 0.88) for p in ps)
        means.append(np.mean(ps))
        print(f"n={n} below={below[n]}/10 mean_p={np.mean(ps):.6g} bound={p_ref(n, 0.88):.6g} exact={cap_fraction(n, 0.88):.6g}")
    assert np.all(np.diff(means) < 0)
    assert all(v >= 9 for v in below.values()), below


@pytest.mark.acceptance(criterion=6, title="10 balls, k = 100: per-ball median local ID increasing, Spearman >= 0.95, < 60 s")
def test_criterion_06_ten_balls():
    X, labels = ten_balls(500, seed=0)
    t0 = time.perf_counter()
    local = np.array([e.dimension for e in fisher_local_knn_id(X, 100)])
    elapsed = time.perf_counter() - t0
    dims = np.arange(2, 12)
    medians = np.array([np.median(local[labels == m]) for m in dims])
    print(np.round(medians, 2), f"{elapsed:.1f}s")
    assert np.all(np.diff(medians) > 0)
    assert spearmanr(medians, dims).statistic >= 0.95
    assert elapsed < 60, elapsed


@pytest.mark.acceptance(criterion=7, title="B^50, N = 1000: MLE and CD < 30, Fisher estimate above both")
def test_criterion_07_baseline_saturation():
    X = sample_ball(50, 1000, seed=0)
    mle = mle_id(X).global_id
    cd = correlation_dimension(X).dimension
    fisher = _global(X)
    print(f"MLE {mle:.2f}  CD {cd:.2f}  Fisher {fisher.dimension:.2f} (saturated={fisher.saturated})")
    assert mle < 30 and cd < 30
    assert fisher.dimension > max(mle, cd)


@pytest.mark.acceptance(criterion=8, title="Swiss roll: TwoNN 2 +/- 0.4; Fisher mean local ID (k=100) rises for subsamples < 500")
def test_criterion_08_swiss_roll():
    X = swiss_roll(2000, seed=0)
    tw = twonn_id(X).dimension
    assert abs(tw - 2) <= 0.4, tw
    full = np.mean([e.dimension for e in fisher_local_knn_id(X, 100)])
    rep = subsample_experiment(X, ["fishers"], sizes=[300, 400], repeats=5, k_local=100, seed=0)
    small = {row["subsample_size"]: row["mean"] for row in rep.summary if row["metric"] == "mean_local_id"}
    print(f"TwoNN {tw:.3f}; local mean N=2000 {full:.3f}; subsamples {small}")
    assert all(v > full for v in small.values())


@pytest.mark.acceptance(criterion=9, title="cap curves equal closed form via oracle W to 1e-9; increasing in N, decreasing in alpha")
def test_criterion_09_caps():
    sizes = (100, 1000, 10000)
    rows = cap_curves(DEFAULT_ALPHAS, sizes)
    for r in rows:
        N, a = r["n_points"], r["alpha"]
        assert r["max_dim_pointwise"] == pytest.approx(dimension_from_p(1 / N, a), rel=1e-9)
        assert r["max_dim_global"] == pytest.approx(dimension_from_p(1 / N**2, a), rel=1e-9)
    for kind in ("max_dim_pointwise", "max_dim_global"):
        grid = np.array([[next(r[kind] for r in rows if r["alpha"] == float(a) and r["n_points"] == N) for N in sizes] for a in DEFAULT_ALPHAS])
        assert np.all(np.diff(grid, axis=1) > 0)
        assert np.all(np.diff(grid, axis=0) < 0)


def _cli(args, env):
    res = subprocess.run([sys.executable, "-m", "fisherid", *args], capture_output=True, env=dict(os.environ, **env))
    assert res.returncode == 0, res.stderr
    return res.stdout


@pytest.mark.acceptance(criterion=10, title="byte-identical reports across runs and threads; rotation (1e-6) and exact scale invariance")
def test_criterion_10_determinism_and_invariance(tmp_path):
    data = tmp_path / "ball7.csv"
    _cli(["generate", "--kind", "ball", "--n", "7", "--N", "1500", "--seed", "4", "--output", str(data)], {})
    args = ["estimate", "--input", str(data), "--estimator", "fishers,mle,cd,twonn", "--local", "--k", "100"]
    reports = [
        _cli(args, {"NUMBA_NUM_THREADS": "4", "FISHERID_THREADS": t}) for t in ("1", "1", "4")
    ]
    assert reports[0] == reports[1] == reports[2]
    json.loads(reports[0])

    X = sample_ball(6, 1000, seed=5) @ np.diag([3.0, 1.0, 2.0, 1.5, 1.0, 0.7])

    def fisher_all(Y):
        cloud = preprocess_pipeline(Y)
        g = fisher_global_id(cloud)[0].dimension
        pw = [e.dimension for e in fisher_pointwise_id(cloud)]
        loc = [e.dimension for e in fisher_local_knn_id(Y[:200], 100)]
        return np.array([g, *pw, *loc])

    ref = fisher_all(X)
    for c in (0.001, 3.7, 12345.0):
        assert np.array_equal(fisher_all(c * X), ref), c
    rotated = fisher_all(X @ random_rotation(6, 11).T)
    assert np.max(np.abs(rotated - ref)) <= 1e-6
