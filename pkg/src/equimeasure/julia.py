"""Independent samples of Julia sets, for comparison with measure supports.

Polynomials use the escape-time picture: pixels of the filled Julia set
next to escaping pixels, plus escaping pixels whose distance estimate puts
the Julia set within two pixels (this catches Julia sets of zero area such
as ``[-2, 2]``).  Other maps use a backward orbit of a repelling fixed point.
"""

import numpy as np
from numpy.polynomial import polynomial as P

from . import sphere
from .maps import merge_coincident


def escape_radius(coefficients):
    """``max(2, (1 + sum_{j<d} |c_j|) / |c_d|)``; orbits beyond it escape."""
    c = np.asarray(coefficients, dtype=complex)
    return max(2.0, (1 + np.abs(c[:-1]).sum()) / abs(c[-1]))


def _iterate(z, dz, c, dc, R, big, max_iter, done, escaped_at, alive):
    for it in range(max_iter):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        zi = z[idx]
        dz[idx] = dz[idx] * P.polyval(zi, dc)
        z[idx] = P.polyval(zi, c)
        az = np.abs(z[idx])
        newly = (escaped_at[idx] < 0) & (az > R)
        escaped_at[idx[newly]] = it
        done[idx[az > big]] = True
        alive[idx[escaped_at[idx] >= 0]] = False


def escape_time_boundary(f, resolution=801, max_iter=1000, extent=None):
    """Chart points sampling the Julia set of a polynomial map.

    Parameters
    ----------
    f : RationalMap
        Must be a polynomial.
    resolution : int
        Pixels per side of the square grid ``[-R, R]^2``.
    max_iter : int
        Iteration cap; pixels that survive it count as non-escaping.
    extent : float, optional
        Half-width of the grid; defaults to the escape radius.

    Returns
    -------
    ndarray of complex
    """
    if not f.is_polynomial:
        raise ValueError("escape-time sampling needs a polynomial")
    c = f.p / f.q[0]
    R = escape_radius(c)
    half = R if extent is None else float(extent)
    xs = np.linspace(-half, half, resolution)
    pix = xs[1] - xs[0]
    Z0 = (xs[None, :] + 1j * xs[:, None]).ravel()
    dc = P.polyder(c)
    z = Z0.copy()
    dz = np.ones_like(z)
    alive = np.ones(z.shape, bool)
    escaped_at = np.full(z.shape, -1)
    big = 1e8
    # iterate until escape, then keep going to a large radius for the distance estimate
    done = np.zeros(z.shape, bool)
    with np.errstate(over="ignore", invalid="ignore"):
        _iterate(z, dz, c, dc, R, big, max_iter, done, escaped_at, alive)
    escaping = ~alive
    grid = escaping.reshape(resolution, resolution)
    inner = ~grid
    near = np.zeros_like(grid)
    near[1:, :] |= grid[:-1, :]
    near[:-1, :] |= grid[1:, :]
    near[:, 1:] |= grid[:, :-1]
    near[:, :-1] |= grid[:, 1:]
    boundary = (inner & near).ravel()
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        az = np.abs(z)
        dist = az * np.log(az) / np.abs(dz)
    close = escaping & (dist < 2 * pix)
    return Z0[boundary | close]


def backward_orbit_sample(f, depth=12, max_points=20000, seed=0):
    """Points of ``f^-k(p)`` for a repelling fixed point ``p`` and ``k <= depth``.

    The fixed point with the largest spherical multiplier is used; levels
    are resampled down to ``max_points`` to keep the sample bounded.
    """
    pts, mult = f.fixed_point_multipliers()
    start = pts[np.argmax(mult)]
    rng = np.random.default_rng(seed)
    frontier = start[None, :]
    sample = [frontier]
    for _ in range(depth):
        frontier = f.preimage_batch(frontier).points
        frontier, _, _ = merge_coincident(frontier, np.ones(len(frontier)))
        if len(frontier) > max_points:
            frontier = frontier[rng.choice(len(frontier), max_points, replace=False)]
        sample.append(frontier)
    return np.concatenate(sample)


def julia_reference(f, **kwargs):
    """Sphere points sampling the Julia set of a rational map."""
    if f.is_polynomial:
        return sphere.stereo_lift(escape_time_boundary(f, **kwargs))
    return backward_orbit_sample(f, **kwargs)
