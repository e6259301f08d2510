"""Branched self-maps of spheres: forward evaluation and complete fibres.

Every map exposes ``evaluate`` and ``preimage_batch``; the latter returns all
solutions of ``f(x) = y`` for many targets at once, each with its local index,
so that indices over a fibre sum to the degree.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import roots, sphere

MERGE_TOL = 1e-9
CLUSTER_RADIUS = 1e-7
LOOSE_RADIUS = 1e-4
# centroid backward error below this marks a loose root cluster as one multiple root
CENTROID_TOL = 1e-13
ZERO_COEF_TOL = 4 * np.finfo(float).eps


class PreimageError(RuntimeError):
    """The fibre of a target could not be computed."""

    def __init__(self, message, residual=None, target=None, level=None):
        super().__init__(message)
        self.residual = residual
        self.target = target
        self.level = level


@dataclass(frozen=True)
class PreimageSet:
    """Fibre ``f^{-1}(y)`` with local indices."""

    points: np.ndarray
    indices: np.ndarray

    def __len__(self):
        return len(self.indices)

    @property
    def total_index(self):
        return int(self.indices.sum())


@dataclass(frozen=True)
class PreimageBatch:
    """Fibres of many targets, flattened; ``parent[i]`` names the target row."""

    points: np.ndarray
    indices: np.ndarray
    parent: np.ndarray

    def fibre(self, row):
        sel = self.parent == row
        return PreimageSet(self.points[sel], self.indices[sel])


def merge_coincident(points, weights, groups=None, tol=MERGE_TOL):
    """Merge points closer than ``tol`` (chordal), adding their weights.

    Points are first sorted lexicographically by coordinates so the result
    does not depend on input order.  When ``groups`` is given only points of
    the same group are merged.  Returns ``(points, weights, groups)``.
    """
    from scipy.spatial import cKDTree

    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights)
    n = len(points)
    if n == 0:
        return points, weights, groups
    keys = [points[:, j] for j in range(points.shape[1] - 1, -1, -1)]
    if groups is not None:
        keys.append(groups)
    order = np.lexsort(keys)
    points = points[order]
    weights = weights[order]
    if groups is not None:
        groups = np.asarray(groups)[order]
    pairs = cKDTree(points).query_pairs(tol, output_type="ndarray")
    if groups is not None and len(pairs):
        pairs = pairs[groups[pairs[:, 0]] == groups[pairs[:, 1]]]
    if len(pairs) == 0:
        return points, weights, groups
    graph = csr_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    # first member (in sorted order) represents each component
    first = np.full(labels.max() + 1, n)
    np.minimum.at(first, labels, np.arange(n))
    rank = np.argsort(first)
    relabel = np.empty_like(rank)
    relabel[rank] = np.arange(len(rank))
    lab = relabel[labels]
    merged = np.zeros(len(rank), dtype=weights.dtype)
    np.add.at(merged, lab, weights)
    keep = np.sort(first)
    return points[keep], merged, None if groups is None else groups[keep]


class Endomorphism:
    """Interface of a degree-``d`` branched self-map of S^n."""

    dimension: int
    degree: int
    distortion: float

    def evaluate(self, points):
        raise NotImplementedError

    def preimage_batch(self, points):
        raise NotImplementedError

    def preimages(self, y):
        """Complete fibre of a single target point."""
        batch = self.preimage_batch(sphere.as_points(y, self.dimension))
        return PreimageSet(batch.points, batch.indices)

    def iterate(self, points, k):
        x = np.asarray(points, dtype=float)
        for _ in range(k):
            x = self.evaluate(x)
        return x

    def distinguished_points(self):
        """Chart points ``0`` and ``infinity`` (south and north poles)."""
        return np.stack([sphere.south_pole(self.dimension), sphere.north_pole(self.dimension)])

    def periodic_points(self, period):
        raise NotImplementedError(f"{type(self).__name__} has no periodic point solver")

    def spherical_derivative(self, points, h=1e-6):
        """Operator norm of the differential at ``points`` by central differences."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        basis = sphere.tangent_basis(p)
        cols = []
        for k in range(basis.shape[1]):
            fp = self.evaluate(sphere.exp_map(p, h * basis[:, k]))
            fm = self.evaluate(sphere.exp_map(p, -h * basis[:, k]))
            cols.append((fp - fm) / (2 * h))
        jac = np.stack(cols, axis=-1)
        return np.linalg.norm(jac, ord=2, axis=(1, 2))


def _strip(c):
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    nz = np.flatnonzero(c != 0)
    if nz.size == 0:
        raise ValueError("zero polynomial")
    return c[: nz[-1] + 1]


def sylvester_resultant(p, q, degree):
    """Resultant of the degree-``degree`` homogenizations of ``p`` and ``q``."""
    p = np.pad(p, (0, degree + 1 - len(p)))
    q = np.pad(q, (0, degree + 1 - len(q)))
    n = 2 * degree
    S = np.zeros((n, n), complex)
    for i in range(degree):
        S[i, i : i + degree + 1] = p[::-1]
        S[degree + i, i : i + degree + 1] = q[::-1]
    return np.linalg.det(S)


class RationalMap(Endomorphism):
    """Rational map ``z -> p(z) / q(z)`` of the Riemann sphere.

    Parameters
    ----------
    numerator, denominator : sequence of complex
        Ascending coefficients: ``numerator[j]`` multiplies ``z**j``.
    check : bool
        Reject maps whose numerator and denominator (homogenized) share a
        root, detected by a normalized resultant below ``1e-9``.
    """

    dimension = 2
    distortion = 1.0

    def __init__(self, numerator, denominator, check=True):
        p = _strip(numerator)
        q = _strip(denominator)
        d = max(len(p), len(q)) - 1
        if d < 2:
            raise ValueError(f"degree must be at least 2, got {d}")
        self.degree = d
        self.p = np.pad(p, (0, d + 1 - len(p)))
        self.q = np.pad(q, (0, d + 1 - len(q)))
        if check:
            res = sylvester_resultant(self.p / np.linalg.norm(self.p), self.q / np.linalg.norm(self.q), d)
            if abs(res) <= 1e-9:
                raise ValueError(f"numerator and denominator share a root (resultant {abs(res):.2e})")

    def __repr__(self):
        return f"RationalMap(numerator={self.p.tolist()}, denominator={self.q.tolist()})"

    @property
    def is_polynomial(self):
        return np.count_nonzero(self.q) == 1 and self.q[0] != 0

    @classmethod
    def polynomial(cls, coefficients):
        return cls(coefficients, [1.0])

    def _homogeneous_eval(self, a, b):
        small = np.abs(a) <= np.abs(b)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(small, a / np.where(small, b, 1), 0)
            v = np.where(small, 0, b / np.where(small, 1, a))
        pu = P.polyval(u, self.p)
        qu = P.polyval(u, self.q)
        pv = P.polyval(v, self.p[::-1])
        qv = P.polyval(v, self.q[::-1])
        return np.where(small, pu, pv), np.where(small, qu, qv)

    def evaluate(self, points):
        pts = np.asarray(points, dtype=float)
        a, b = sphere.homogeneous(pts)
        A, B = self._homogeneous_eval(a, b)
        return sphere.from_homogeneous(A, B)

    def evaluate_chart(self, z):
        """Evaluate at a scalar chart value (complex or ``INF``)."""
        return sphere.to_chart(self.evaluate(sphere.chart_point(z)))

    def pencil(self, points):
        """Ascending coefficients of ``b p(z) - a q(z)`` for targets ``[a : b]``."""
        a, b = sphere.homogeneous(np.atleast_2d(points))
        return b[:, None] * self.p[None, :] - a[:, None] * self.q[None, :]

    def preimage_batch(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        C = self.pencil(pts)
        return solve_pencil(C, self.degree)

    def compose(self, other):
        """The rational map ``self o other``."""
        d1, d2 = self.degree, other.degree
        num = np.zeros(d1 * d2 + 1, complex)
        den = np.zeros(d1 * d2 + 1, complex)
        for j in range(d1 + 1):
            term = P.polymul(P.polypow(other.p, j), P.polypow(other.q, d1 - j))
            term = np.pad(term, (0, d1 * d2 + 1 - len(term)))[: d1 * d2 + 1]
            num += self.p[j] * term
            den += self.q[j] * term
        return RationalMap(num, den, check=False)

    def iterate_map(self, k):
        g = self
        for _ in range(k - 1):
            g = self.compose(g)
        return g

    def periodic_points(self, period):
        """Solutions of ``f^period(x) = x`` as sphere points (with multiplicity merged)."""
        g = self.iterate_map(period) if period > 1 else self
        D = g.degree
        # homogeneous fixed point equation p(z) - z q(z) of degree D + 1
        e = np.zeros(D + 2, complex)
        e[: D + 1] += g.p
        e[1:] -= g.q
        batch = solve_pencil(e[None, :], D + 1)
        return batch.points

    def fixed_point_multipliers(self):
        pts = self.periodic_points(1)
        return pts, self.spherical_derivative(pts)


def _split_zeros(C):
    """Exact (to rounding) zero counts at the top and bottom of each row."""
    scale = np.max(np.abs(C), axis=1, keepdims=True)
    zero = np.abs(C) <= ZERO_COEF_TOL * scale
    d = C.shape[1] - 1
    top = np.zeros(len(C), int)
    still = np.ones(len(C), bool)
    for j in range(d, -1, -1):
        still &= zero[:, j]
        top += still
    bottom = np.zeros(len(C), int)
    still = np.ones(len(C), bool)
    for j in range(d + 1):
        still &= zero[:, j]
        bottom += still
    return top, bottom


def _cluster_row(z, c_reduced):
    """Group approximate roots of one polynomial into distinct roots with multiplicities."""
    m = len(z)
    if m == 0:
        return z, np.zeros(0, int)
    dist = sphere.chordal_distance_chart(z[:, None], z[None, :])
    close = dist <= CLUSTER_RADIUS
    loose = (dist <= LOOSE_RADIUS) & ~close
    if loose.any():
        _, lab = connected_components(csr_matrix(dist <= LOOSE_RADIUS), directed=False)
        for g in np.unique(lab):
            members = np.flatnonzero(lab == g)
            if len(members) < 2:
                continue
            centre = z[members].mean()
            be = roots.backward_error(c_reduced[None, :], np.array([[centre]]))[0, 0]
            if be <= CENTROID_TOL:
                close[np.ix_(members, members)] = True
    ncomp, lab = connected_components(csr_matrix(close), directed=False)
    values = np.array([z[lab == g].mean() for g in range(ncomp)])
    counts = np.bincount(lab, minlength=ncomp)
    return values, counts


def solve_pencil(C, degree):
    """Roots on the Riemann sphere of rows of ascending coefficients ``C``.

    Each row has nominal degree ``degree``; a drop in actual degree means
    roots at infinity with index equal to the drop.  Multiple roots are
    detected by clustering and reported once with their multiplicity.
    """
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    M = len(C)
    top, bottom = _split_zeros(C)
    if np.any(top + bottom > degree):
        row = int(np.flatnonzero(top + bottom > degree)[0])
        raise PreimageError("degenerate fibre: the pencil vanishes identically", target=row)
    out_pts, out_idx, out_par = [], [], []
    key = top * (degree + 2) + bottom
    for pattern in np.unique(key):
        tz, bz = divmod(int(pattern), degree + 2)
        rows = np.flatnonzero(key == pattern)
        red = C[rows][:, bz : degree + 1 - tz]
        m = red.shape[1] - 1
        if m > 0:
            try:
                z = roots.solve(red)
            except roots.RootFindingError as err:
                raise PreimageError(str(err), residual=err.residual, target=int(rows[err.row])) from err
            red_n = red / np.max(np.abs(red), axis=1, keepdims=True)
            dist = sphere.chordal_distance_chart(z[:, :, None], z[:, None, :])
            dist[:, np.arange(m), np.arange(m)] = np.inf
            needs = np.flatnonzero(dist.min(axis=(1, 2)) <= LOOSE_RADIUS)
            simple = np.ones(len(rows), bool)
            simple[needs] = False
            srows = np.flatnonzero(simple)
            if srows.size:
                out_pts.append(sphere.stereo_lift(z[srows].ravel()))
                out_idx.append(np.ones(srows.size * m, int))
                out_par.append(np.repeat(rows[srows], m))
            for r in needs:
                vals, counts = _cluster_row(z[r], red_n[r])
                out_pts.append(sphere.stereo_lift(vals))
                out_idx.append(counts)
                out_par.append(np.full(len(vals), rows[r]))
        if bz > 0:
            out_pts.append(np.tile(sphere.south_pole(2), (len(rows), 1)))
            out_idx.append(np.full(len(rows), bz))
            out_par.append(rows)
        if tz > 0:
            out_pts.append(np.tile(sphere.north_pole(2), (len(rows), 1)))
            out_idx.append(np.full(len(rows), tz))
            out_par.append(rows)
    pts = np.concatenate(out_pts)
    idx = np.concatenate(out_idx)
    par = np.concatenate(out_par)
    order = np.argsort(par, kind="stable")
    return PreimageBatch(pts[order], idx[order], par[order])


def verify_degree(f, trials, seed):
    """True iff the fibre indices sum to ``f.degree`` at ``trials`` random targets."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    y = sphere.sample_uniform(trials, seed, dim=f.dimension)
    batch = f.preimage_batch(y)
    totals = np.bincount(batch.parent, weights=batch.indices, minlength=trials)
    return bool(np.all(totals == f.degree))
