"""Finitely supported probability measures and their iterated pullbacks.

The normalized pullback of a measure ``mu`` under a degree-``d`` map replaces
each atom ``(a, w)`` by the fibre ``{(x, w * i(x, f) / d) : f(x) = a}``.
Iterating from a Dirac mass produces the measures that equidistribute
towards the equilibrium measure of ``f``.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import sphere
from .maps import PreimageBatch, PreimageError, merge_coincident

MASS_TOL = 1e-12


class ExceptionalSeedWarning(UserWarning):
    """The seed of a pullback has a finite backward orbit."""


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure with finitely many weighted atoms on S^n."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = sphere.as_points(self.points)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(w) != len(pts):
            raise ValueError("points and weights differ in length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {w.sum()!r} is not 1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_weights(cls, points, weights):
        """Build a measure after merging coincident atoms and renormalizing."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        w = np.asarray(weights, dtype=float)
        keep = w > 0
        pts, w, _ = merge_coincident(pts[keep], w[keep])
        return cls(pts, w / w.sum())

    @classmethod
    def dirac(cls, point):
        return cls(np.atleast_2d(np.asarray(point, dtype=float)), np.ones(1))

    @classmethod
    def uniform(cls, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return cls.from_weights(pts, np.full(len(pts), 1.0 / len(pts)))

    @property
    def dim(self):
        return self.points.shape[1] - 1

    def __len__(self):
        return len(self.weights)

    def integrate(self, func):
        """Integral of a function of sphere points (vectorized) or of a value array."""
        vals = func(self.points) if callable(func) else np.asarray(func)
        return vals @ self.weights

    def chart(self):
        """Chart values and infinity flags of the atoms (S^2 only)."""
        return sphere.stereo_project(self.points)


@dataclass(frozen=True)
class PullbackConfig:
    """Atom budget and pruning policy for iterated pullbacks.

    ``weight_resample`` draws ``max_atoms`` atoms i.i.d. proportionally to
    weight, gives each draw mass ``1 / max_atoms`` and merges repeats.
    """

    max_atoms: int = 1 << 14
    prune_strategy: str = "weight_resample"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.max_atoms < 1:
            raise ValueError("max_atoms must be positive")
        if self.prune_strategy not in ("none", "weight_resample"):
            raise ValueError(f"unknown prune_strategy {self.prune_strategy!r}")


def _batched_preimages(f, points, threads=1, chunk=1 << 15):
    n = len(points)
    if threads <= 1 or n <= chunk:
        return f.preimage_batch(points)
    starts = list(range(0, n, chunk))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda s: f.preimage_batch(points[s : s + chunk]), starts))
    return PreimageBatch(
        np.concatenate([b.points for b in parts]),
        np.concatenate([b.indices for b in parts]),
        np.concatenate([b.parent + s for b, s in zip(parts, starts)]),
    )


def pullback_once(f, mu, threads=1):
    """Normalized pullback ``f^* mu / d`` of a discrete measure."""
    try:
        batch = _batched_preimages(f, mu.points, threads)
    except PreimageError as err:
        if err.target is not None and isinstance(err.target, (int, np.integer)):
            err.target = mu.points[err.target]
        raise
    w = mu.weights[batch.parent] * batch.indices / f.degree
    return DiscreteMeasure.from_weights(batch.points, w)


def pushforward_measure(f, mu):
    """Push-forward ``f_* mu``: each atom moves to its image, mass unchanged."""
    return DiscreteMeasure.from_weights(f.evaluate(mu.points), mu.weights)


def prune(mu, max_atoms, rng):
    """Multinomial weight resampling down to at most ``max_atoms`` atoms."""
    if len(mu) <= max_atoms:
        return mu
    counts = rng.multinomial(max_atoms, mu.weights / mu.weights.sum())
    keep = counts > 0
    return DiscreteMeasure(mu.points[keep], counts[keep] / max_atoms)


def level_rng(seed, level, stream=0):
    """Generator for one pruning level, split from the root seed by counter."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, level)))


def pullback_sequence(f, mu, k, config=None):
    """Yield ``mu_0 = mu, mu_1, ..., mu_k`` of normalized pullbacks with pruning."""
    config = config or PullbackConfig()
    yield mu
    for level in range(1, k + 1):
        try:
            mu = pullback_once(f, mu, threads=config.threads)
        except PreimageError as err:
            err.level = level
            raise
        if config.prune_strategy == "weight_resample" and len(mu) > config.max_atoms:
            mu = prune(mu, config.max_atoms, level_rng(config.seed, level))
        yield mu


def backward_orbit(f, a, depth, cap=None, tol=1e-7):
    """Backward orbit ``{a} u f^-1(a) u ... u f^-depth(a)`` as distinct points.

    Stops early once more than ``cap`` points are found.  Returns the points
    and a flag telling whether the orbit closed up (no new points at some
    level), which certifies a finite backward orbit.
    """
    from scipy.spatial import cKDTree

    orbit = np.atleast_2d(np.asarray(a, dtype=float))
    frontier = orbit
    for _ in range(depth):
        pre = f.preimage_batch(frontier).points
        pre, _, _ = merge_coincident(pre, np.ones(len(pre)), tol=tol)
        dist, _ = cKDTree(orbit).query(pre)
        new = pre[dist > tol]
        if len(new) == 0:
            return orbit, True
        orbit = np.concatenate([orbit, new])
        frontier = new
        if cap is not None and len(orbit) > cap:
            break
    return orbit, False


def looks_exceptional(f, a):
    """True if ``a`` has a backward orbit that closes within two levels."""
    _, closed = backward_orbit(f, a, depth=2, cap=4 * f.degree**2)
    return closed


def pullback_iterate(f, a, k, config=None):
    """``(f^k)^* delta_a / d^k`` with pruning between levels.

    Seeds with a finite backward orbit trigger an
    :class:`ExceptionalSeedWarning`; the computation still runs.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    a = np.asarray(a, dtype=float)
    if k > 0 and looks_exceptional(f, a):
        warnings.warn("seed has a finite backward orbit; the pullbacks will not equidistribute",
                      ExceptionalSeedWarning, stacklevel=2)
    mu = None
    for mu in pullback_sequence(f, DiscreteMeasure.dirac(a), k, config):
        pass
    return mu


def pullback_form(f, k, sample_count, seed, config=None):
    """Monte Carlo version of ``(f^k)^* omega / d^k`` for normalized volume ``omega``.

    Seeds are drawn from the volume measure and pulled back together.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    seeds = sphere.sample_uniform(sample_count, np.random.SeedSequence(seed, spawn_key=(1,)), f.dimension)
    mu = DiscreteMeasure.uniform(seeds)
    for mu in pullback_sequence(f, mu, k, config):
        pass
    return mu


def tree_integrals(f, seeds, k_max, values):
    """Integrals of test functions against ``(f^k)^* delta_a / d^k`` for many seeds.

    The preimage trees are kept separate per seed (no merging across seeds).

    Parameters
    ----------
    f : Endomorphism
    seeds : ndarray, shape (S, n+1)
    k_max : int
    values : callable
        Maps points ``(N, n+1)`` to an array ``(F, N)`` of test-function values.

    Returns
    -------
    ndarray, shape (k_max + 1, F, S)
    """
    pts = np.atleast_2d(np.asarray(seeds, dtype=float))
    S = len(pts)
    w = np.ones(S)
    label = np.arange(S)
    out = []
    for level in range(k_max + 1):
        if level:
            batch = f.preimage_batch(pts)
            w = w[batch.parent] * batch.indices / f.degree
            label = label[batch.parent]
            pts = batch.points
        V = values(pts) * w
        acc = np.zeros((V.shape[0], S))
        for i in range(V.shape[0]):
            acc[i] = np.bincount(label, weights=V[i], minlength=S)
        out.append(acc)
    return np.stack(out)
