"""Dictionaries of smooth test functions on S^n.

The default dictionary holds real spherical harmonics of degree ``1..L``,
orthonormal for the normalized volume (probability) measure, so every member
integrates to zero against it.  Each function carries two gradient
constants: the sup norm of its gradient and the ``L^n`` norm of its gradient
for the unnormalized Riemannian volume.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_chebyt, gammaln, sph_harm_y

from . import sphere


@dataclass(frozen=True)
class TestFunction:
    id: str
    degree: int
    func: object = field(repr=False)
    grad_sup: float = 0.0
    grad_norm: float = 0.0

    def __call__(self, points):
        return self.func(np.atleast_2d(points))


def gradient_norms(func, points, h=1e-5):
    """Pointwise norm of the spherical gradient by central differences.

    ``func`` maps ``(N, n+1)`` points to values of shape ``(F, N)``.
    """
    p = np.atleast_2d(points)
    basis = sphere.tangent_basis(p)
    sq = 0.0
    for k in range(basis.shape[1]):
        plus = func(sphere.exp_map(p, h * basis[:, k]))
        minus = func(sphere.exp_map(p, -h * basis[:, k]))
        sq = sq + ((plus - minus) / (2 * h)) ** 2
    return np.sqrt(sq)


def quadrature(dim, order=24, mc_points=100_000):
    """Nodes and probability weights for integration over S^dim.

    On S^2 a Gauss-Legendre by trapezoid product rule, exact for polynomials
    of degree below ``order``; elsewhere a fixed-seed Monte Carlo rule.
    """
    if dim == 2:
        nt = order // 2 + 1
        x, wx = np.polynomial.legendre.leggauss(nt)
        nphi = order + 1
        phi = 2 * np.pi * np.arange(nphi) / nphi
        X, PHI = np.meshgrid(x, phi, indexing="ij")
        r = np.sqrt(1 - X**2)
        pts = np.stack([r * np.cos(PHI), r * np.sin(PHI), X], axis=-1).reshape(-1, 3)
        w = (np.repeat(wx / 2, nphi) / nphi)
        return pts, w
    pts = sphere.sample_uniform(mc_points, 12345, dim)
    return pts, np.full(mc_points, 1.0 / mc_points)


def _gradient_constants(func, dim, n_functions):
    qp, qw = quadrature(dim)
    sup_pts = np.concatenate([qp, sphere.fibonacci_sphere(20000)]) if dim == 2 else qp
    g_sup = gradient_norms(func, sup_pts).max(axis=1)
    g_q = gradient_norms(func, qp)
    vol = sphere.sphere_volume(dim)
    g_norm = (vol * (g_q**dim @ qw)) ** (1.0 / dim)
    return g_sup, g_norm


class TestDictionary:
    """Finite family of test functions evaluated together.

    ``batch``, when given, evaluates all members at once and must agree with
    stacking the individual functions.
    """

    def __init__(self, functions, dim=2, batch=None):
        self.functions = tuple(functions)
        self.dim = dim
        self._batch = batch
        self._index = {fn.id: i for i, fn in enumerate(self.functions)}

    def __len__(self):
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.functions[self._index[key]]
        return self.functions[key]

    @property
    def ids(self):
        return [fn.id for fn in self.functions]

    @property
    def degrees(self):
        return np.array([fn.degree for fn in self.functions])

    @property
    def grad_sup(self):
        return np.array([fn.grad_sup for fn in self.functions])

    @property
    def grad_norm(self):
        return np.array([fn.grad_norm for fn in self.functions])

    def values(self, points):
        """Values of every member at ``points``, shape ``(F, N)``."""
        p = np.atleast_2d(points)
        if self._batch is not None:
            return self._batch(p)
        return np.stack([fn.func(p) for fn in self.functions])

    def weighted_sums(self, points, weights, chunk=1 << 15):
        """``values(points) @ weights``, evaluated in chunks to bound memory."""
        p = np.atleast_2d(points)
        total = np.zeros(len(self.functions))
        for s in range(0, len(p), chunk):
            total += self.values(p[s : s + chunk]) @ weights[s : s + chunk]
        return total

    def integrals(self, mu):
        return self.weighted_sums(mu.points, mu.weights)

    def subset(self, max_degree=None, ids=None):
        sel = [i for i, fn in enumerate(self.functions)
               if (max_degree is None or fn.degree <= max_degree) and (ids is None or fn.id in ids)]
        batch = None
        if self._batch is not None:
            batch = self._batch.take(sel)
        return TestDictionary([self.functions[i] for i in sel], self.dim, batch)


def _real_ylm(l, m):
    norm = math.sqrt(4 * math.pi)

    def func(points):
        x, y, z = points[:, 0], points[:, 1], np.clip(points[:, 2], -1, 1)
        theta = np.arccos(z)
        phi = np.arctan2(y, x)
        Y = sph_harm_y(l, abs(m), theta, phi)
        if m == 0:
            return norm * Y.real
        sign = (-1) ** m
        part = Y.real if m > 0 else Y.imag
        return norm * math.sqrt(2) * sign * part

    return func


def _homogeneous_exponents(N, degree):
    return [e for e in itertools.product(range(degree + 1), repeat=N) if sum(e) == degree]


def _real_ylm_batch(ls, ms):
    """All listed real ``Y_lm`` as one polynomial evaluation.

    ``Y_lm`` is the restriction of a homogeneous polynomial of degree ``l``;
    its coefficients are fitted exactly on a quadrature grid.
    """
    top = max(ls)
    nodes, _ = quadrature(2, 2 * top + 2)
    exps, cols = [], []
    offset = {}
    for l in sorted(set(ls)):
        offset[l] = len(exps)
        exps.extend(_homogeneous_exponents(3, l))
    exps = np.array(exps)
    coef = np.zeros((len(exps), len(ls)))
    for j, (l, m) in enumerate(zip(ls, ms)):
        block = exps[offset[l] : offset[l] + (l + 1) * (l + 2) // 2]
        A = _monomials(nodes, block)
        c, *_ = np.linalg.lstsq(A, _real_ylm(l, m)(nodes), rcond=None)
        coef[offset[l] : offset[l] + len(block), j] = c

    return PolynomialBatch(exps, coef)


def _build(ids, degrees, funcs, dim, batch):
    g_sup, g_norm = _gradient_constants(batch, dim, len(funcs))
    fns = [TestFunction(i, d, f, float(s), float(n))
           for i, d, f, s, n in zip(ids, degrees, funcs, g_sup, g_norm)]
    return TestDictionary(fns, dim, batch)


def sphere_moment(alpha):
    """``E[prod x_i**alpha_i]`` for ``x`` uniform on the unit sphere in R^len(alpha)."""
    alpha = np.asarray(alpha)
    if np.any(alpha % 2):
        return 0.0
    N = len(alpha)
    logv = (gammaln(N / 2) + np.sum(gammaln((alpha + 1) / 2))
            - (N / 2) * math.log(math.pi) - gammaln((alpha.sum() + N) / 2))
    return math.exp(logv)


def harmonic_polynomials(dim, max_degree):
    """Orthonormal bases of harmonics of degree ``1..max_degree`` on S^dim.

    Built by orthogonalizing monomials degree by degree against all lower
    degrees using exact sphere moments.  Returns ``(exponents, blocks)``
    where ``blocks[l]`` is a coefficient matrix over ``exponents``.
    """
    N = dim + 1
    exps = [e for L in range(max_degree + 1)
            for e in itertools.product(range(L + 1), repeat=N) if sum(e) == L]
    exps = np.array(exps)
    G = np.array([[sphere_moment(a + b) for b in exps] for a in exps])
    total = exps.sum(axis=1)
    basis = [np.eye(len(exps))[0]]  # constant function
    blocks = {}
    for L in range(1, max_degree + 1):
        B = np.array(basis).T
        Ml = np.eye(len(exps))[:, total == L]
        R = Ml - B @ (B.T @ G @ Ml)
        lam, V = np.linalg.eigh(R.T @ G @ R)
        keep = lam > 1e-10 * lam.max()
        new = R @ V[:, keep] / np.sqrt(lam[keep])
        for j in range(new.shape[1]):
            col = new[:, j]
            if col[np.argmax(np.abs(col))] < 0:
                new[:, j] = -col
        blocks[L] = new
        basis.extend(new.T)
    return exps, blocks


def _monomials(points, exps):
    out = np.ones((len(points), len(exps)))
    for i in range(exps.shape[1]):
        powers = points[:, i : i + 1] ** np.arange(exps[:, i].max() + 1)[None, :]
        out *= powers[:, exps[:, i]]
    return out


class PolynomialBatch:
    """Several polynomials over a shared monomial list, evaluated with one product."""

    def __init__(self, exps, coef):
        used = np.any(coef != 0, axis=1)
        self.exps = exps[used]
        self.coef = coef[used]

    def __call__(self, points):
        return (_monomials(points, self.exps) @ self.coef).T

    def take(self, sel):
        return PolynomialBatch(self.exps, self.coef[:, sel])


def _poly_func(exps, coef):
    def func(points):
        return _monomials(points, exps) @ coef

    return func


def harmonic_dictionary(dim=2, max_degree=8):
    """Real spherical harmonics of degree ``1..max_degree`` on S^dim.

    On S^2 these are the standard real ``Y_lm`` (ids ``"Y{l},{m}"``); in
    higher dimension an orthonormal basis of each harmonic space
    (ids ``"H{l},{j}"``).
    """
    ids, degrees, funcs = [], [], []
    if dim == 2:
        ms = []
        for l in range(1, max_degree + 1):
            for m in range(-l, l + 1):
                ids.append(f"Y{l},{m}")
                degrees.append(l)
                ms.append(m)
                funcs.append(_real_ylm(l, m))
        batch = _real_ylm_batch(degrees, ms)
    else:
        exps, blocks = harmonic_polynomials(dim, max_degree)
        coef = []
        for l, block in blocks.items():
            for j in range(block.shape[1]):
                ids.append(f"H{l},{j}")
                degrees.append(l)
                coef.append(block[:, j])
                funcs.append(_poly_func(exps, block[:, j]))
        batch = PolynomialBatch(exps, np.array(coef).T)

    return _build(ids, degrees, funcs, dim, batch)


def chebyshev_dictionary(max_order=6):
    """``T_m(Re(z) / 2)`` for chart values ``z`` near ``[-2, 2]``.

    The argument is clipped to ``[-1, 1]`` so the functions stay bounded;
    they are meant for measures carried by the Chebyshev segment.
    """
    ids, degrees, funcs = [], [], []
    for m in range(1, max_order + 1):
        def func(points, m=m):
            z, inf = sphere.stereo_project(points)
            x = np.clip(np.where(inf, 2.0, np.nan_to_num(z.real)) / 2, -1, 1)
            return eval_chebyt(m, x)

        ids.append(f"T{m}")
        degrees.append(m)
        funcs.append(func)
    fns = [TestFunction(i, d, f) for i, d, f in zip(ids, degrees, funcs)]
    return TestDictionary(fns, 2)
