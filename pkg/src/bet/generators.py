"""Seeded samplers: the BEX fractal, the benchmark scenarios and the null.

Every sampler takes ``seed`` as anything :func:`numpy.random.default_rng`
accepts. Parallel studies derive per-replicate streams with :func:`substream`,
which keys a :class:`numpy.random.SeedSequence` on the root seed plus integer
coordinates (scenario, level, replicate), so results do not depend on how
replicates are scheduled.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnknownScenario
from .expansion import SampleSet

SCENARIOS = ("linear", "parabolic", "circular", "sine", "checkerboard", "local")


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the coordinates ``keys`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    noise_level: int = 1

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise UnknownScenario(
                f"unknown scenario {self.name!r}; choose from {', '.join(SCENARIOS)}")
        if not (isinstance(self.noise_level, (int, np.integer)) and 1 <= self.noise_level <= 10):
            raise ValueError(f"noise level must be an integer in 1..10, got {self.noise_level!r}")

    @property
    def sigma(self) -> float:
        return self.noise_level / 40.0


def gamma_d(x, y, d: int):
    """Implicit function whose zero set is the level-``d`` BEX.

    Sums ``|x - c_i| - |y - c_j|`` over the ``4**(d-1)`` subsquare centres
    ``(c_i, c_j)``, each term gated to the subsquare's closed window.
    """
    if d < 1:
        raise ValueError("level must be at least 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    half = 2.0 ** -d
    centres = (np.arange(1, 2 ** (d - 1) + 1) - 0.5) / 2 ** (d - 1)
    dx = np.abs(x[..., None] - centres)
    dy = np.abs(y[..., None] - centres)
    in_x = dx <= half
    in_y = dy <= half
    # sum_ij (dx_i - dy_j) Ix_i Iy_j = sum_i dx_i Ix_i * #y - #x * sum_j dy_j Iy_j
    sx = (dx * in_x).sum(-1)
    sy = (dy * in_y).sum(-1)
    nx = in_x.sum(-1)
    ny = in_y.sum(-1)
    out = sx * ny - nx * sy
    return out if out.ndim else float(out)


def sample_bex(level: int, n: int, seed=None) -> SampleSet:
    """Uniform sample on the level-``level`` bisection expanding cross.

    A subsquare of side ``2**-(level-1)`` is chosen uniformly, then one of its
    two diagonals with probability 1/2, then a uniform point along it.
    """
    if level < 1:
        raise ValueError("BEX level must be at least 1")
    rng = np.random.default_rng(seed)
    side = 2.0 ** -(level - 1)
    cells = 2 ** (level - 1)
    i = rng.integers(0, cells, size=n)
    j = rng.integers(0, cells, size=n)
    anti = rng.random(n) < 0.5
    t = rng.random(n)
    x = (i + t) * side
    y = (j + np.where(anti, 1.0 - t, t)) * side
    return SampleSet(x, y)


def sample_scenario(spec: ScenarioSpec, n: int, seed=None) -> SampleSet:
    rng = np.random.default_rng(seed)
    sd = spec.sigma
    name = spec.name
    if name == "linear":
        x = rng.random(n)
        y = x + 6.0 * rng.normal(0.0, sd, n)
    elif name == "parabolic":
        x = rng.random(n)
        y = (x - 0.5) ** 2 + 1.5 * rng.normal(0.0, sd, n)
    elif name == "circular":
        theta = rng.uniform(-np.pi, np.pi, n)
        x = np.cos(theta) + 2.5 * rng.normal(0.0, sd, n)
        y = np.sin(theta) + 2.5 * rng.normal(0.0, sd, n)
    elif name == "sine":
        x = rng.random(n)
        y = np.sin(4.0 * np.pi * x) + 8.0 * rng.normal(0.0, sd, n)
    elif name == "checkerboard":
        w = rng.choice(np.array([1.0, 2.0, 3.0]), n)
        v1 = rng.choice(np.array([2.0, 4.0]), n)
        v2 = rng.choice(np.array([1.0, 3.0, 5.0]), n)
        x = w + rng.normal(0.0, sd, n)
        e1 = rng.normal(0.0, sd, n)
        e2 = rng.normal(0.0, sd, n)
        y = np.where(w == 2.0, v1 + 4.0 * e1, v2 + 4.0 * e2)
    elif name == "local":
        g1 = rng.normal(0.0, 0.5, n)
        g2 = rng.normal(0.0, 0.5, n)
        eps = rng.normal(0.0, sd, n)
        inside = (g1 >= 0) & (g1 <= 1) & (g2 >= 0) & (g2 <= 1)
        x = g1
        y = np.where(inside, g1 + eps, g2)
    else:  # pragma: no cover - guarded by ScenarioSpec
        raise UnknownScenario(name)
    return SampleSet(x, y)


def sample_null(n: int, seed=None) -> SampleSet:
    """i.i.d. Uniform[0, 1]**2 pairs."""
    rng = np.random.default_rng(seed)
    return SampleSet(rng.random(n), rng.random(n))
