"""Seeded synthetic point clouds.

Every generator draws from a Philox 4x64 counter-based bit generator keyed by
``SeedSequence(seed)``. The stream version is recorded in
:data:`RNG_NAME` so golden files can state what produced them.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "RNG_NAME",
    "GENERATOR_KINDS",
    "GeneratorSpec",
    "make_rng",
    "sample_ball",
    "sample_sphere",
    "sample_cube",
    "sample_gaussian",
    "swiss_roll",
    "ten_balls",
    "generate",
]

RNG_NAME = "numpy.Philox4x64/SeedSequence/v1"
GENERATOR_KINDS = ("ball", "sphere", "cube", "gaussian", "swiss_roll", "ten_balls")

SWISS_T_RANGE = (1.5 * np.pi, 4.5 * np.pi)
SWISS_HEIGHT = 21.0
TEN_BALLS_DIMS = tuple(range(2, 12))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def _check(n: int, N: int):
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if N < 1:
        raise ValueError(f"sample count must be >= 1, got {N}")


def _embed(X: np.ndarray, ambient: int | None) -> np.ndarray:
    if ambient is None or ambient == X.shape[1]:
        return X
    if ambient < X.shape[1]:
        raise ValueError(f"ambient dimension {ambient} is below intrinsic dimension {X.shape[1]}")
    out = np.zeros((X.shape[0], ambient))
    out[:, : X.shape[1]] = X
    return out


def _unit_directions(rng: np.random.Generator, N: int, n: int) -> np.ndarray:
    g = rng.standard_normal((N, n))
    norms = np.linalg.norm(g, axis=1)
    # a zero Gaussian draw has probability zero; redraw defensively
    while np.any(norms == 0):
        bad = norms == 0
        g[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]


def sample_ball(n: int, N: int, seed: int, ambient: int | None = None) -> np.ndarray:
    """N points uniform in the unit n-ball: Gaussian direction times radius U^(1/n)."""
    _check(n, N)
    rng = make_rng(seed)
    directions = _unit_directions(rng, N, n)
    radii = rng.random(N) ** (1.0 / n)
    return _embed(directions * radii[:, None], ambient)


def sample_sphere(n_ambient: int, N: int, seed: int, ambient: int | None = None) -> np.ndarray:
    """N points uniform on the unit sphere S^(n_ambient - 1) in R^n_ambient."""
    _check(n_ambient, N)
    return _embed(_unit_directions(make_rng(seed), N, n_ambient), ambient)


def sample_cube(n: int, N: int, seed: int, ambient: int | None = None) -> np.ndarray:
    _check(n, N)
    return _embed(make_rng(seed).random((N, n)), ambient)


def sample_gaussian(n: int, N: int, seed: int, ambient: int | None = None) -> np.ndarray:
    _check(n, N)
    return _embed(make_rng(seed).standard_normal((N, n)), ambient)


def swiss_roll(N: int, seed: int, noise: float = 0.0, return_params: bool = False):
    """Swiss roll ``(t cos t, h, t sin t)`` with t in [1.5 pi, 4.5 pi], h in [0, 21].

    With ``return_params`` the generating ``t`` and ``h`` are returned as well.
    """
    _check(2, N)
    if noise < 0:
        raise ValueError("noise must be >= 0")
    rng = make_rng(seed)
    t = rng.uniform(*SWISS_T_RANGE, size=N)
    h = rng.uniform(0.0, SWISS_HEIGHT, size=N)
    X = np.column_stack([t * np.cos(t), h, t * np.sin(t)])
    if noise > 0:
        X = X + noise * rng.standard_normal(X.shape)
    if return_params:
        return X, t, h
    return X


def ten_balls(points_per_ball: int = 500, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Ten unit balls of dimension 2..11 lined up in R^11.

    The ball of dimension m occupies coordinates 0..m-1, so each ball shares
    all but one axis with the previous one, and ball i is shifted by i along
    coordinate 0. Labels hold the dimension of the ball each row belongs to.
    """
    _check(1, points_per_ball)
    rng = make_rng(seed)
    ambient = TEN_BALLS_DIMS[-1]
    blocks, labels = [], []
    for i, m in enumerate(TEN_BALLS_DIMS):
        directions = _unit_directions(rng, points_per_ball, m)
        radii = rng.random(points_per_ball) ** (1.0 / m)
        block = np.zeros((points_per_ball, ambient))
        block[:, :m] = directions * radii[:, None]
        block[:, 0] += i
        blocks.append(block)
        labels.append(np.full(points_per_ball, m, dtype=int))
    return np.vstack(blocks), np.concatenate(labels)


@dataclass(frozen=True)
class GeneratorSpec:
    """What to generate. ``n`` is the intrinsic dimension (ambient for spheres)."""

    kind: str
    n: int = 2
    N: int = 2000
    ambient: int | None = None
    seed: int = 0
    noise: float = 0.0
    points_per_ball: int = 500

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; choose from {GENERATOR_KINDS}")
        if self.N < 1 or self.n < 1:
            raise ValueError("N and n must be >= 1")
        if self.ambient is not None and self.ambient < self.n:
            raise ValueError("ambient must be >= n")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rng"] = RNG_NAME
        return d


def generate(spec: GeneratorSpec) -> tuple[np.ndarray, np.ndarray | None]:
    """Dispatch on ``spec.kind``. Returns data and labels (None except for ten_balls)."""
    if spec.kind == "ball":
        return sample_ball(spec.n, spec.N, spec.seed, spec.ambient), None
    if spec.kind == "sphere":
        return sample_sphere(spec.n, spec.N, spec.seed, spec.ambient), None
    if spec.kind == "cube":
        return sample_cube(spec.n, spec.N, spec.seed, spec.ambient), None
    if spec.kind == "gaussian":
        return sample_gaussian(spec.n, spec.N, spec.seed, spec.ambient), None
    if spec.kind == "swiss_roll":
        return _embed(swiss_roll(spec.N, spec.seed, spec.noise), spec.ambient), None
    return ten_balls(spec.points_per_ball, spec.seed)
