"""Statistics that test a discrete measure against the equilibrium properties.

All comparisons run through a finite :class:`~equimeasure.harmonics.TestDictionary`.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import sphere
from .measures import (DiscreteMeasure, ExceptionalSeedWarning, PullbackConfig, backward_orbit,
                       looks_exceptional, pullback_sequence)

# ball mass at which a measure counts as stuck on an atom
STUCK_MASS = 0.5
# deviations below this are rounding noise and are left out of rate fits
DEVIATION_FLOOR = 1e-13


def weak_distance(mu, nu, dictionary):
    """``max_phi |int phi dmu - int phi dnu| / (1 + sup|grad phi|)`` over the dictionary."""
    gap = np.abs(dictionary.integrals(mu) - dictionary.integrals(nu))
    return float(np.max(gap / (1 + dictionary.grad_sup)))


def balance_residual(f, mu, dictionary):
    """``max_phi |int (f_* phi) / d dmu - int phi dmu|``.

    ``f_* phi(a)`` sums ``phi`` over the fibre of ``a`` with local indices.
    """
    batch = f.preimage_batch(mu.points)
    w = mu.weights[batch.parent] * batch.indices / f.degree
    pulled = dictionary.weighted_sums(batch.points, w)
    return float(np.max(np.abs(pulled - dictionary.integrals(mu))))


def invariance_residual(f, mu, dictionary):
    """``max_phi |int phi o f dmu - int phi dmu|``."""
    moved = dictionary.weighted_sums(f.evaluate(mu.points), mu.weights)
    return float(np.max(np.abs(moved - dictionary.integrals(mu))))


def ball_masses(mu, radius, chunk=1024):
    """``mu(B(x, radius))`` for every atom ``x`` (closed chordal balls)."""
    tree = cKDTree(mu.points)
    out = np.empty(len(mu))
    for s in range(0, len(mu), chunk):
        nbrs = tree.query_ball_point(mu.points[s : s + chunk], radius)
        out[s : s + chunk] = [mu.weights[n].sum() for n in nbrs]
    return out


def atom_scan(mu, radii):
    """Largest ball mass centred at an atom, for each radius.

    Returns a list of ``(radius, max mass)``.
    """
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii) or any(a <= b for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and strictly decreasing")
    return [(r, float(ball_masses(mu, r).max())) for r in radii]


def _unique_points(points, tol=1e-7):
    if len(points) == 0:
        return points
    tree = cKDTree(points)
    keep = []
    taken = np.zeros(len(points), bool)
    for i in range(len(points)):
        if taken[i]:
            continue
        keep.append(i)
        taken[tree.query_ball_point(points[i], tol)] = True
    return points[keep]


def exceptional_scan(f, depth=8, bound=10, max_period=3):
    """Candidate points with a finite backward orbit.

    Periodic points of period ``<= max_period`` (where the map can solve
    for them) and the points ``0`` and ``infinity`` are searched; a
    candidate is kept when its backward orbit closes within ``depth``
    levels with at most ``bound`` points.  The search cannot certify that
    no other exceptional point exists.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    cands = [f.distinguished_points()]
    for m in range(1, max_period + 1):
        try:
            cands.append(f.periodic_points(m))
        except NotImplementedError:
            break
    cands = _unique_points(np.concatenate(cands))
    found = []
    for c in cands:
        orbit, closed = backward_orbit(f, c, depth, cap=bound)
        if closed and len(orbit) <= bound:
            found.append(c)
    if not found:
        return np.zeros((0, f.dimension + 1))
    return _unique_points(np.array(found))


def hausdorff_distance(a, b):
    """Symmetric Hausdorff distance between two finite point sets (chordal)."""
    da, _ = cKDTree(b).query(a)
    db, _ = cKDTree(a).query(b)
    return float(max(da.max(), db.max()))


def support_vs_julia(mu_hat, julia_reference, weight_floor=0.0):
    """Hausdorff distance between the atoms of ``mu_hat`` and a Julia set sample.

    Atoms lighter than ``weight_floor`` are ignored.
    """
    pts = mu_hat.points[mu_hat.weights > weight_floor]
    return hausdorff_distance(pts, np.asarray(julia_reference, dtype=float))


@dataclass(frozen=True)
class MixingReport:
    correlations: list
    invariance_residual: float
    invariance_threshold: float

    @property
    def nearly_invariant(self):
        return self.invariance_residual <= self.invariance_threshold

    def to_dict(self):
        return {
            "correlations": [[k, c] for k, c in self.correlations],
            "invariance_residual": self.invariance_residual,
            "invariance_threshold": self.invariance_threshold,
            "nearly_invariant": self.nearly_invariant,
        }


def mixing_correlation(f, mu_hat, phi, psi, k_max, dictionary=None, invariance_threshold=1e-3):
    """``int (phi o f^k) psi dmu - int phi dmu int psi dmu`` for ``k = 0..k_max``.

    ``phi`` and ``psi`` are callables on sphere points or ids in
    ``dictionary``.  The invariance residual of ``mu_hat`` over the
    dictionary (or over ``{phi, psi}``) is recorded alongside.
    """
    from .harmonics import TestDictionary, TestFunction

    def resolve(g):
        if isinstance(g, str):
            return dictionary[g]
        return g if isinstance(g, TestFunction) else TestFunction("custom", 0, g)

    phi, psi = resolve(phi), resolve(psi)
    w = mu_hat.weights
    psi_vals = psi(mu_hat.points)
    mean_phi = phi(mu_hat.points) @ w
    mean_psi = psi_vals @ w
    x = mu_hat.points
    out = []
    for k in range(k_max + 1):
        if k:
            x = f.evaluate(x)
        out.append((k, float((phi(x) * psi_vals) @ w - mean_phi * mean_psi)))
    check = dictionary if dictionary is not None else TestDictionary([phi, psi], mu_hat.dim)
    return MixingReport(out, invariance_residual(f, mu_hat, check), invariance_threshold)


@dataclass(frozen=True)
class ConvergenceReport:
    """Weak distances of the pullback iterates to a reference measure."""

    deviations: list
    fitted_exponent: float
    fit_window: tuple
    bound_exponent: float
    converged: bool
    final_atom_mass: float
    seed_exceptional: bool
    measure: DiscreteMeasure = field(repr=False, default=None)

    @property
    def meets_bound(self):
        return self.fitted_exponent >= self.bound_exponent

    def to_dict(self):
        return {
            "deviations": [[k, v] for k, v in self.deviations],
            "fitted_exponent": self.fitted_exponent,
            "fit_window": list(self.fit_window),
            "bound_exponent": self.bound_exponent,
            "converged": self.converged,
            "final_atom_mass": self.final_atom_mass,
            "seed_exceptional": self.seed_exceptional,
        }

    def to_rows(self):
        return [("k", "deviation")] + [(k, v) for k, v in self.deviations]


def fit_decay(ks, values, floor=DEVIATION_FLOOR):
    """Least-squares decay rate ``-slope`` of ``log(values)`` against ``ks``.

    Values below ``floor`` are dropped.  Returns ``nan`` with fewer than two
    usable values.
    """
    ks = np.asarray(ks, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = v > floor
    if keep.sum() < 2:
        return math.nan
    slope = np.polyfit(ks[keep], np.log(v[keep]), 1)[0]
    return float(-slope)


def convergence_rate(f, a, dictionary, k_max, config=None, reference=None, window=None):
    """Fit the decay of ``weak_distance(mu_k, reference)`` in ``k``.

    Parameters
    ----------
    f : Endomorphism
    a : ndarray, shape (n+1,)
        Seed point.
    dictionary : TestDictionary
    k_max : int
    config : PullbackConfig, optional
    reference : DiscreteMeasure, optional
        Target measure; defaults to the last iterate ``mu_{k_max}``.
    window : (int, int), optional
        Inclusive range of ``k`` used in the fit.  The default is
        ``[1, k_max - 3]`` when ``reference`` is the last iterate (the tail
        is biased towards it) and ``[1, k_max]`` otherwise.

    Returns
    -------
    ConvergenceReport
        ``bound_exponent`` is ``log(d) / n``.  A run is flagged as not
        converged when the seed has a finite backward orbit, when the last
        iterate keeps half its mass in a tiny ball, or when the fitted
        exponent is not positive.
    """
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    config = config or PullbackConfig()
    a = np.asarray(a, dtype=float)
    exceptional = looks_exceptional(f, a)
    if exceptional:
        warnings.warn("seed has a finite backward orbit", ExceptionalSeedWarning, stacklevel=2)
    integrals = []
    mu = None
    for mu in pullback_sequence(f, DiscreteMeasure.dirac(a), k_max, config):
        integrals.append(dictionary.integrals(mu))
    integrals = np.array(integrals)
    target = dictionary.integrals(reference) if reference is not None else integrals[-1]
    dev = np.max(np.abs(integrals - target) / (1 + dictionary.grad_sup), axis=1)
    if window is None:
        window = (1, k_max - 3) if reference is None else (1, k_max)
    lo, hi = window
    ks = np.arange(lo, hi + 1)
    exponent = fit_decay(ks, dev[lo : hi + 1])
    atom = float(ball_masses(mu, 1e-6).max())
    if math.isnan(exponent):
        # every deviation in the window is at rounding level: exact convergence
        exponent = math.inf if dev[lo : hi + 1].max() <= DEVIATION_FLOOR else math.nan
    converged = (not exceptional) and atom < STUCK_MASS and exponent > 0
    return ConvergenceReport(
        deviations=[(int(k), float(v)) for k, v in enumerate(dev)],
        fitted_exponent=float(exponent),
        fit_window=(int(lo), int(hi)),
        bound_exponent=math.log(f.degree) / f.dimension,
        converged=bool(converged),
        final_atom_mass=atom,
        seed_exceptional=bool(exceptional),
        measure=mu,
    )


def residual_trend(f, a, dictionary, levels, config=None):
    """Balance and invariance residuals of ``mu_k`` at the requested levels."""
    levels = sorted(set(int(k) for k in levels))
    out = []
    for k, mu in enumerate(pullback_sequence(f, DiscreteMeasure.dirac(a), levels[-1], config)):
        if k in levels:
            out.append((k, balance_residual(f, mu, dictionary), invariance_residual(f, mu, dictionary)))
    return out


def uniform_circle_measure(count=64):
    """Uniform measure on ``|z| = 1``, exact for harmonics of degree below ``count``."""
    return DiscreteMeasure.uniform(sphere.circle_points(count))
