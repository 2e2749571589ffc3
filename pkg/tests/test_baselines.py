import math

import numpy as np
import pytest

from fisherid.baselines import (
    BaselineConfig,
    correlation_dimension,
    mle_id,
    twonn_from_ratios,
    twonn_id,
)
from fisherid.errors import DegenerateDataError, InsufficientDataError
from fisherid.synthdata import make_rng, sample_ball, sample_cube, sample_sphere, swiss_roll
from oracles import random_rotation


def _disk(N, seed):
    return sample_ball(2, N, seed)


def test_mle_random_segment():
    X = make_rng(0).random((2000, 1))
    assert abs(mle_id(X, 20).global_id - 1) <= 0.15


def test_mle_lattice_segment_matches_closed_form():
    # neighbour distances 1,1,2,2,...,10,10 for interior lattice points
    X = np.arange(2000, dtype=float)[:, None]
    res = mle_id(X, 20)
    T = np.repeat(np.arange(1, 11), 2).astype(float)
    interior = (19 / np.log(T[-1] / T[:-1]).sum())
    assert res.local[1000] == pytest.approx(interior, rel=1e-12)
    assert res.global_id == pytest.approx(interior, rel=0.02)


def test_mle_disk():
    assert abs(mle_id(_disk(2000, 1), 20).global_id - 2) <= 0.3


def test_mle_local_positive_and_duplicates_skipped():
    X = np.vstack([_disk(300, 2), _disk(300, 2)[:5]])
    with pytest.warns(UserWarning):
        res = mle_id(X, 10)
    assert res.n_skipped == 10
    ok = np.isfinite(res.local)
    assert np.all(res.local[ok] > 0)
    with pytest.raises(InsufficientDataError):
        mle_id(_disk(10, 0), 10)


def test_cd_square_and_circle():
    assert abs(correlation_dimension(sample_cube(2, 2000, 0)).dimension - 2) <= 0.3
    res = correlation_dimension(sample_sphere(2, 2000, 0))
    assert abs(res.dimension - 1) <= 0.2
    assert res.radii.size >= 10
    assert res.residual >= 0


def test_cd_errors():
    with pytest.raises(InsufficientDataError):
        correlation_dimension(np.random.default_rng(0).random((50, 2)))
    with pytest.raises(DegenerateDataError):
        correlation_dimension(np.zeros((200, 2)))


def test_twonn_constant_ratio_closed_form():
    c = 1.7
    assert twonn_from_ratios(np.full(100, c), 0.0) == pytest.approx(1 / math.log(c), rel=1e-14)
    assert twonn_from_ratios(np.full(100, c), 0.1) == pytest.approx(1 / math.log(c), rel=1e-14)


def test_twonn_censoring_is_unbiased_on_pareto():
    # ratios of a d-dimensional Poisson process follow Pareto(d)
    d = 3.0
    mu = (1 - make_rng(1).random(200000)) ** (-1 / d)
    assert twonn_from_ratios(mu, 0.1) == pytest.approx(d, rel=0.02)


def test_twonn_swiss_roll_and_segment():
    assert abs(twonn_id(swiss_roll(2000, 0)).dimension - 2) <= 0.3
    assert abs(twonn_id(make_rng(3).random((2000, 1))).dimension - 1) <= 0.2


def test_invariance_under_similarity_transforms():
    X = sample_ball(3, 600, 4)
    Y = 2.5 * X @ random_rotation(3, 2).T + 4.0
    assert mle_id(Y, 20).global_id == pytest.approx(mle_id(X, 20).global_id, rel=1e-9)
    assert twonn_id(Y).dimension == pytest.approx(twonn_id(X).dimension, rel=1e-9)
    assert correlation_dimension(Y).dimension == pytest.approx(correlation_dimension(X).dimension, rel=1e-6)


def test_config_validation():
    BaselineConfig()
    with pytest.raises(ValueError):
        BaselineConfig(cd_radius_quantiles=(0.5, 0.1))
    with pytest.raises(ValueError):
        BaselineConfig(twonn_discard_fraction=0.3)
    with pytest.raises(ValueError):
        BaselineConfig(mle_k=2)
