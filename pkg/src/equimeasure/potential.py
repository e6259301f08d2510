"""Riesz potentials, energies and capacities of finite point sets.

The kernel on S^n is ``|x - y|^-(n-1)`` for the chordal distance.  A finite
set ``E`` stands for a compact set by treating each point as the centre of a
small flat cell of radius ``rho``: the cell's self-energy under the uniform
distribution is ``c_n / rho^(n-1)``, with ``c_2 = 16 / (3 pi)`` (disc) and
``c_3 = 9 / 4`` (ball).  These diagonal terms make the discrete energy a
positive definite quadratic form, so its minimum over the simplex is a
genuine equilibrium distribution rather than a vertex.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.optimize import nnls
from scipy.spatial import cKDTree

from . import sphere
from .measures import DiscreteMeasure

COINCIDE_TOL = 1e-12
SELF_ENERGY = {2: 16 / (3 * math.pi), 3: 9 / 4}


def _kernel(dist, dim):
    with np.errstate(divide="ignore"):
        return 1.0 / dist ** (dim - 1)


def riesz_potential(mu, x):
    """``U(x) = sum_j w_j / |x - x_j|^(n-1)``; ``inf`` on an atom.

    ``x`` may be a single point or an array of points.
    """
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    dist = np.linalg.norm(pts[:, None, :] - mu.points[None, :, :], axis=-1)
    hit = (dist < COINCIDE_TOL) & (mu.weights[None, :] > 0)
    vals = _kernel(np.where(hit, 1.0, dist), mu.dim) @ mu.weights
    vals = np.where(hit.any(axis=1), np.inf, vals)
    return vals if np.ndim(x) > 1 else float(vals[0])


def riesz_energy(mu):
    """Off-diagonal energy ``sum_{j != l} w_j w_l / |x_j - x_l|^(n-1)``.

    A single atom has infinite energy.
    """
    if len(mu) < 2:
        return math.inf
    K = interaction_matrix(mu.points)
    return float(mu.weights @ K @ mu.weights)


def interaction_matrix(points):
    """Kernel matrix with a zero diagonal."""
    pts = np.atleast_2d(points)
    dim = pts.shape[1] - 1
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    np.fill_diagonal(dist, 1.0)
    K = _kernel(dist, dim)
    np.fill_diagonal(K, 0.0)
    return K


def default_cell_radius(points):
    """Half the smallest nearest-neighbour distance."""
    d, _ = cKDTree(points).query(points, k=2)
    return 0.5 * float(d[:, 1].min())


def grid_cell_radius(count, dim=2):
    """Radius of a flat cell with the area of ``1 / count`` of the sphere."""
    area = sphere.sphere_volume(dim) / count
    unit_ball = math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)
    return (area / unit_ball) ** (1.0 / dim)


@dataclass(frozen=True)
class CapacityReport:
    """Equilibrium distribution of a discretized compact set.

    ``energy`` includes the cell self-energies; ``off_diagonal_energy`` is the
    pair sum alone at the same weights.
    """

    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    energy: float
    capacity: float
    off_diagonal_energy: float
    cell_radius: float
    iterations: int
    kkt_residual: float
    converged: bool
    max_support_potential: float

    def measure(self):
        return DiscreteMeasure(self.points, self.weights / self.weights.sum())

    def to_dict(self):
        return {
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
            "energy": self.energy,
            "capacity": self.capacity,
            "off_diagonal_energy": self.off_diagonal_energy,
            "cell_radius": self.cell_radius,
            "iterations": self.iterations,
            "kkt_residual": self.kkt_residual,
            "converged": self.converged,
            "max_support_potential": self.max_support_potential,
        }


def _kkt_residual(M, w, energy):
    """Relative violation of the optimality conditions of ``min w'Mw`` on the simplex."""
    U = M @ w
    support = w > 0
    eq = np.abs(U[support] - energy).max(initial=0.0)
    below = np.maximum(energy - U[~support], 0).max(initial=0.0)
    return max(eq, below) / energy


def _projected_gradient(M, maxiter, tol):
    n = len(M)
    w = np.full(n, 1.0 / n)
    step = 1.0 / np.linalg.eigvalsh(M).max()
    for it in range(1, maxiter + 1):
        y = w - step * (M @ w)
        # Euclidean projection onto the simplex
        u = np.sort(y)[::-1]
        css = np.cumsum(u) - 1
        r = np.nonzero(u - css / np.arange(1, n + 1) > 0)[0][-1]
        w = np.maximum(y - css[r] / (r + 1), 0)
        energy = w @ M @ w
        if _kkt_residual(M, w, energy) <= tol:
            return w, it, True
    return w, maxiter, False


def minimize_on_simplex(M, tolerance=1e-10, maxiter=100_000):
    """Minimize ``w' M w`` over the probability simplex for positive definite ``M``.

    Returns ``(weights, iterations, converged)``.
    """
    N = len(M)
    converged = False
    try:
        # min v'Mv - 2 sum(v) over v >= 0 is a nonnegative least squares
        # problem; rescaling its solution gives the simplex minimizer
        factor = cho_factor(M, lower=True)
        v = cho_solve(factor, np.ones(N))
        if np.any(v < 0):
            L = np.tril(factor[0])
            rhs = solve_triangular(L, np.ones(N), lower=True)
            v, _ = nnls(L.T, rhs, maxiter=50 * N)
        w = v / v.sum()
        iterations = 1
        converged = _kkt_residual(M, w, float(w @ M @ w)) <= tolerance
    except (np.linalg.LinAlgError, RuntimeError):
        pass
    if not converged:
        w, iterations, converged = _projected_gradient(M, maxiter, tolerance)
    return w, iterations, converged


def equilibrium_weights(points, tolerance=1e-10, cell_radius=None, maxiter=100_000):
    """Minimize the discrete Riesz energy over the probability simplex.

    Parameters
    ----------
    points : ndarray, shape (N, n+1)
        Distinct sphere points.
    tolerance : float
        Target relative KKT residual.
    cell_radius : float, optional
        Radius of the cell each point stands for.  Defaults to half the
        minimal spacing; pass a common value to compare nested sets.
    maxiter : int
        Cap for the projected-gradient fallback.

    Returns
    -------
    CapacityReport
        ``capacity = 1 / energy``.  Sets with fewer than two points report
        capacity 0.
    """
    pts = sphere.as_points(points)
    dim = pts.shape[1] - 1
    N = len(pts)
    if N < 2:
        return CapacityReport(pts, np.ones(N), math.inf, 0.0, math.inf,
                              0.0 if cell_radius is None else float(cell_radius),
                              0, 0.0, True, math.inf)
    rho = default_cell_radius(pts) if cell_radius is None else float(cell_radius)
    if dim not in SELF_ENERGY:
        raise ValueError(f"no cell self-energy constant for S^{dim}")
    K = interaction_matrix(pts)
    M = K + np.eye(N) * SELF_ENERGY[dim] / rho ** (dim - 1)
    w, iterations, converged = minimize_on_simplex(M, tolerance, maxiter)
    energy = float(w @ M @ w)
    U = M @ w
    return CapacityReport(
        points=pts,
        weights=w,
        energy=energy,
        capacity=1.0 / energy,
        off_diagonal_energy=float(w @ K @ w),
        cell_radius=rho,
        iterations=iterations,
        kkt_residual=_kkt_residual(M, w, energy),
        converged=bool(converged),
        max_support_potential=float(U[w > 0].max()),
    )


@dataclass(frozen=True)
class DeviationSetReport:
    """Grid seeds whose pullback integral deviates from the volume pullback by at least ``epsilon``."""

    test_function: str
    epsilon: float
    level: int
    flagged: np.ndarray = field(repr=False)
    flagged_count: int
    grid_size: int
    capacity: float
    bound: float
    slack: float
    max_deviation: float
    diameter: float

    @property
    def within_bound(self):
        return self.capacity <= self.bound * self.slack

    def to_dict(self):
        return {
            "test_function": self.test_function,
            "epsilon": self.epsilon,
            "level": self.level,
            "flagged": self.flagged.tolist(),
            "flagged_count": self.flagged_count,
            "grid_size": self.grid_size,
            "capacity": self.capacity,
            "bound": self.bound,
            "slack": self.slack,
            "within_bound": self.within_bound,
            "max_deviation": self.max_deviation,
            "diameter": self.diameter,
        }


def volume_pullback_integrals(f, k_max, values, order=24, seed=0):
    """Integrals of test functions against ``(f^k)^* omega / d^k``, k = 0..k_max.

    ``omega`` is the normalized volume.  On S^2 the preimage trees of a
    product quadrature rule are summed; elsewhere Monte Carlo seeds are used.
    Returns shape ``(k_max + 1, F)``.
    """
    from .harmonics import quadrature
    from .measures import tree_integrals

    if f.dimension == 2:
        nodes, w = quadrature(2, order)
    else:
        nodes = sphere.sample_uniform(4096, np.random.SeedSequence(seed, spawn_key=(2,)), f.dimension)
        w = np.full(len(nodes), 1.0 / len(nodes))
    return tree_integrals(f, nodes, k_max, values) @ w


def deviation_sweep(f, dictionary, epsilons, levels, grid, omega_terms=None, slack=1.0):
    """Run the deviation-set experiment for every test function, epsilon and level.

    The preimage trees of the grid seeds are built once and shared.

    Returns
    -------
    list of DeviationSetReport
    """
    from .measures import tree_integrals

    grid = sphere.as_points(grid, f.dimension)
    k_max = max(levels)
    seeded = tree_integrals(f, grid, k_max, dictionary.values)
    if omega_terms is None:
        omega_terms = volume_pullback_integrals(f, k_max, dictionary.values)
    rho = grid_cell_radius(len(grid), f.dimension)
    n = f.dimension
    cache = {}
    reports = []
    for j, fn in enumerate(dictionary):
        for k in levels:
            dev = np.abs(seeded[k, j] - omega_terms[k, j])
            for eps in epsilons:
                mask = dev >= eps
                key = mask.tobytes()
                if key not in cache:
                    cache[key] = equilibrium_weights(grid[mask], cell_radius=rho).capacity if mask.sum() >= 2 else 0.0
                flagged = grid[mask]
                diam = float(np.max(np.linalg.norm(flagged[:, None] - flagged[None], axis=-1))) if len(flagged) > 1 else 0.0
                bound = f.distortion ** (1.0 / n) * fn.grad_norm / (eps * f.degree ** (k / n))
                reports.append(DeviationSetReport(fn.id, float(eps), int(k), flagged, int(mask.sum()),
                                                  len(grid), float(cache[key]), float(bound), slack,
                                                  float(dev.max()), diam))
    return reports


def deviation_set_experiment(f, phi, epsilon, k, grid, dictionary=None):
    """Deviation set of a single test function at one level.

    Parameters
    ----------
    f : Endomorphism
    phi : str
        Id of a member of ``dictionary`` (default: harmonics of degree <= 8).
    epsilon : float
    k : int
    grid : ndarray, shape (N, n+1)
    """
    from .harmonics import harmonic_dictionary

    dictionary = dictionary or harmonic_dictionary(f.dimension, 8 if f.dimension == 2 else 4)
    sub = dictionary.subset(ids={phi})
    if len(sub) != 1:
        raise KeyError(f"unknown test function {phi!r}")
    return deviation_sweep(f, sub, [epsilon], [k], grid)[0]
