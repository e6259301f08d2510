"""Round spheres S^n in their ambient embedding.

Points are stored as arrays of shape ``(..., n + 1)`` with unit Euclidean
norm.  The metric throughout the package is the ambient chordal distance,
which is bi-Lipschitz to the geodesic one.

For ``n = 2`` the stereographic chart identifies S^2 with the Riemann sphere:
the north pole ``(0, 0, 1)`` is the point at infinity and the south pole is
``0``.  Chart values travel as a pair ``(z, at_infinity)`` so that infinity is
a flag, never an overflowed float.
"""

import math

import numpy as np

UNIT_TOL = 1e-12
# chart round trips are only guaranteed outside this chordal band around the north pole
POLE_GUARD = 1e-8


class DimensionError(ValueError):
    """Raised when an operation is used on a sphere of the wrong dimension."""


class _Infinity:
    """The point at infinity of the extended complex plane."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def as_points(points, dim=None):
    """Validate and return points as a float array of shape ``(m, n + 1)``.

    A single point is promoted to shape ``(1, n + 1)``.
    """
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if p.ndim != 2 or p.shape[1] < 3:
        raise DimensionError(f"expected points of shape (m, n+1) with n >= 2, got {p.shape}")
    if dim is not None and p.shape[1] != dim + 1:
        raise DimensionError(f"expected points on S^{dim}, got ambient size {p.shape[1]}")
    norms = np.linalg.norm(p, axis=1)
    if p.shape[0] and np.max(np.abs(norms - 1.0)) > UNIT_TOL:
        raise ValueError("points must have unit norm within 1e-12")
    return p


def normalize(x):
    """Project nonzero vectors radially onto the unit sphere."""
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def north_pole(dim=2):
    p = np.zeros(dim + 1)
    p[-1] = 1.0
    return p


def south_pole(dim=2):
    p = np.zeros(dim + 1)
    p[-1] = -1.0
    return p


def chordal_distance(a, b):
    """Ambient Euclidean distance ``|a - b|`` between sphere points.

    Broadcasts over leading axes; the result lies in ``[0, 2]``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.linalg.norm(a - b, axis=-1)


def chordal_distance_chart(z, w):
    """Chordal distance between two finite chart values of S^2."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return 2 * np.abs(z - w) / np.sqrt((1 + np.abs(z) ** 2) * (1 + np.abs(w) ** 2))


def stereo_project(points):
    """Stereographic projection S^2 -> extended complex plane.

    Parameters
    ----------
    points : array_like, shape (m, 3) or (3,)

    Returns
    -------
    z : ndarray of complex
        Chart values; entries flagged as infinite hold ``nan``.
    at_infinity : ndarray of bool
    """
    p = np.asarray(points, dtype=float)
    if p.shape[-1] != 3:
        raise DimensionError("stereographic chart to C is defined on S^2 only")
    x1, x2, x3 = p[..., 0], p[..., 1], p[..., 2]
    rho2 = x1 * x1 + x2 * x2
    at_inf = (rho2 == 0.0) & (x3 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        # 1 - x3 = rho^2 / (1 + x3) avoids cancellation in the northern hemisphere
        south = (x1 + 1j * x2) * (1.0 / (1.0 - x3))
        north = (x1 + 1j * x2) * ((1.0 + x3) / rho2)
    z = np.where(x3 <= 0, south, north)
    z = np.where(at_inf, np.nan + 0j, z)
    return z, at_inf


def stereo_lift(z, at_infinity=None):
    """Inverse stereographic projection, extended complex plane -> S^2.

    ``z`` may contain the ``INF`` marker (scalar use) or be paired with a
    boolean ``at_infinity`` mask (array use).
    """
    if z is INF:
        return north_pole(2)
    z = np.asarray(z, dtype=complex)
    inf = np.zeros(z.shape, bool) if at_infinity is None else np.asarray(at_infinity, bool)
    out = np.empty(z.shape + (3,))
    zz = np.where(inf, 0, z)
    big = np.abs(zz) > 1
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(big, 1.0 / np.where(big, zz, 1), 0)
    s = np.abs(zz) ** 2
    t = np.abs(u) ** 2
    small_den = 1 + s
    big_den = 1 + t
    out[..., 0] = np.where(big, 2 * u.real / big_den, 2 * zz.real / small_den)
    out[..., 1] = np.where(big, -2 * u.imag / big_den, 2 * zz.imag / small_den)
    out[..., 2] = np.where(big, (1 - t) / big_den, (s - 1) / small_den)
    out[inf] = north_pole(2)
    return out


def chart_point(value):
    """Sphere point of a scalar chart value (complex number or ``INF``)."""
    return stereo_lift(value) if value is INF else stereo_lift(complex(value))


def to_chart(point):
    """Scalar chart value of a single S^2 point: a complex number or ``INF``."""
    z, inf = stereo_project(np.asarray(point, dtype=float))
    return INF if bool(inf) else complex(z)


def homogeneous(points):
    """Homogeneous coordinates ``[a : b]`` (``z = a / b``) of S^2 points.

    Both components are bounded and ``|a|^2 + |b|^2 >= 2`` so that no chart
    singularity is ever hit.
    """
    p = np.asarray(points, dtype=float)
    x1, x2, x3 = p[..., 0], p[..., 1], p[..., 2]
    south = x3 <= 0
    a = np.where(south, x1 + 1j * x2, 1.0 + x3)
    b = np.where(south, 1.0 - x3, x1 - 1j * x2)
    return a, b


def from_homogeneous(a, b):
    """Sphere point of homogeneous coordinates ``[a : b]``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    scale = np.maximum(np.abs(a), np.abs(b))
    a = a / scale
    b = b / scale
    ab = a * np.conj(b)
    aa = np.abs(a) ** 2
    bb = np.abs(b) ** 2
    den = aa + bb
    out = np.stack([2 * ab.real / den, 2 * ab.imag / den, (aa - bb) / den], axis=-1)
    return out


def log_polar(points):
    """Chart of S^n minus the poles in log-polar form.

    A point whose stereographic image in R^n is ``r * s`` (``|s| = 1``) is
    returned as ``(log r, s)``; this keeps huge and tiny radii representable.
    """
    p = np.asarray(points, dtype=float)
    q = p[..., :-1]
    last = p[..., -1]
    qn = np.linalg.norm(q, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        one_minus = np.where(last > 0, qn * qn / (1 + last), 1 - last)
        t = np.log(qn) - np.log(one_minus)
        s = q / qn[..., None]
    return t, s


def from_log_polar(t, s):
    """Inverse of :func:`log_polar`."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    out = np.empty(s.shape[:-1] + (s.shape[-1] + 1,))
    out[..., :-1] = s / np.cosh(t)[..., None]
    out[..., -1] = np.tanh(t)
    return out


def sample_uniform(count, seed, dim=2):
    """Draw ``count`` points from the normalized volume measure on S^dim.

    Deterministic given ``seed`` (an int or a ``numpy.random.SeedSequence``).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, dim + 1))
    return normalize(g)


def fibonacci_sphere(count):
    """Quasi-uniform Fibonacci lattice on S^2 (deterministic)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    i = np.arange(count) + 0.5
    x3 = 1 - 2 * i / count
    golden = math.pi * (3 - math.sqrt(5))
    theta = golden * i
    r = np.sqrt(np.clip(1 - x3 * x3, 0, None))
    return np.stack([r * np.cos(theta), r * np.sin(theta), x3], axis=1)


def circle_points(count, phase=0.0):
    """``count`` equally spaced points on the equator ``|z| = 1`` of S^2.

    Angles are reduced to ``[-pi/4, pi/4]`` and rotated by exact quarter
    turns, so the rounding of ``2 pi`` does not stretch all angles alike
    (that bias is amplified by maps that multiply angles).
    """
    turns = np.arange(count) / count + phase / (2 * np.pi)
    quarter = np.rint(4 * turns)
    theta = 2 * np.pi * (turns - quarter / 4)
    c, s = np.cos(theta), np.sin(theta)
    q = quarter.astype(int) % 4
    x = np.choose(q, [c, -s, -c, s])
    y = np.choose(q, [s, c, -s, -c])
    return np.stack([x, y, np.zeros(count)], axis=1)


def sphere_volume(dim):
    """Riemannian volume of the unit sphere S^dim."""
    return 2 * math.pi ** ((dim + 1) / 2) / math.gamma((dim + 1) / 2)


def tangent_basis(points):
    """Orthonormal bases of the tangent spaces at ``points``.

    Returns an array of shape ``(m, n, n + 1)``.
    """
    p = np.atleast_2d(np.asarray(points, dtype=float))
    m, N = p.shape
    # Householder reflection mapping e_last to p; its other columns span T_p
    e = np.zeros(N)
    e[-1] = 1.0
    v = p - e
    vn2 = np.einsum("ij,ij->i", v, v)
    basis = np.empty((m, N - 1, N))
    eye = np.eye(N)[: N - 1]
    for k in range(N - 1):
        col = np.broadcast_to(eye[k], (m, N))
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = np.where(vn2 > 1e-300, 2 * (v @ eye[k]) / vn2, 0.0)
        basis[:, k, :] = col - coef[:, None] * v
    return basis


def exp_map(points, tangent):
    """Riemannian exponential map of the round sphere."""
    p = np.asarray(points, dtype=float)
    t = np.asarray(tangent, dtype=float)
    norm = np.linalg.norm(t, axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        direction = np.where(norm > 0, t / norm, 0.0)
    return np.cos(norm) * p + np.sin(norm) * direction
