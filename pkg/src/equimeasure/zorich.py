"""A uniformly quasiregular power map of S^3 built from a Zorich map.

The Zorich map sends ``(u, v, t)`` to ``e^t h(u, v)``, where ``h`` carries the
square ``[-1, 1]^2`` onto the upper unit hemisphere and is extended to the
plane by reflecting across the square's sides (each reflection in the
domain becomes the reflection in the equatorial plane).  Conjugating the
dilation ``x -> m x`` (``m`` odd) by it gives a self-map of S^3 fixing both
poles, with degree ``m^2`` and bounded distortion for all iterates.

Points of S^3 are handled in log-polar form ``(t, s)``: ``t`` the log of
the stereographic radius, ``s`` a unit vector of R^3.  The Zorich map is
then ``(u, v, t) -> (t, h(u, v))`` and the power map is
``(t, h(u, v)) -> (m t, h(m u, m v))``.
"""

import numpy as np

from . import sphere
from .maps import Endomorphism, PreimageBatch, merge_coincident

HALF_PI = np.pi / 2


def fold(t):
    """Reduce coordinates to ``[-1, 1]`` by reflections; returns value and parity."""
    tau = np.mod(np.asarray(t, dtype=float) + 1, 4)
    first = tau <= 2
    return np.where(first, tau - 1, 3 - tau), np.where(first, 0, 1)


def square_to_hemisphere(u, v):
    """Bi-Lipschitz map of ``[-1, 1]^2`` onto the closed upper hemisphere.

    Concentric squares ``max(|u|, |v|) = r`` go to latitude circles at polar
    angle ``pi r / 2``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    r = np.maximum(np.abs(u), np.abs(v))
    theta = HALF_PI * r
    phi = np.arctan2(v, u)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def hemisphere_to_square(s):
    """Inverse of :func:`square_to_hemisphere` (``s[..., 2] >= 0``)."""
    s = np.asarray(s, dtype=float)
    theta = np.arccos(np.clip(s[..., 2], -1, 1))
    r = theta / HALF_PI
    phi = np.arctan2(s[..., 1], s[..., 0])
    c, sn = np.cos(phi), np.sin(phi)
    scale = r / np.maximum(np.abs(c), np.abs(sn))
    return scale * c, scale * sn


def beam_map(u, v):
    """The reflection-extended square map ``h``: R^2 -> S^2."""
    a, pa = fold(u)
    b, pb = fold(v)
    s = square_to_hemisphere(a, b)
    flip = (pa + pb) % 2 == 1
    s[..., 2] = np.where(flip, -s[..., 2], s[..., 2])
    return s


def beam_inverse(s):
    """One preimage of ``s`` under ``h`` in ``[-1, 3) x [-1, 1)``.

    Returns ``(a, b, parity)`` with ``(a, b)`` in the base square and the
    parity of the hemisphere (0 upper, 1 lower).
    """
    s = np.asarray(s, dtype=float)
    lower = s[..., 2] < 0
    t = s.copy()
    t[..., 2] = np.abs(t[..., 2])
    a, b = hemisphere_to_square(t)
    return a, b, lower.astype(int)


class ZorichPowerMap(Endomorphism):
    """Power map of S^3 conjugate to ``x -> m x`` through a Zorich map.

    Parameters
    ----------
    stretch : int
        Odd integer ``m >= 3``.
    measure_samples : int
        Targets used to measure the degree and points used to measure the
        distortion at construction.
    seed : int
    """

    dimension = 3

    def __init__(self, stretch=3, measure_samples=1000, seed=0):
        m = int(stretch)
        if m != stretch or m < 3 or m % 2 == 0:
            raise ValueError(f"stretch must be an odd integer >= 3, got {stretch!r}")
        self.stretch = m
        self.degree = m * m
        self.degree = self.measure_degree(measure_samples, seed)
        self.distortion = self.measure_distortion(measure_samples, seed)

    def __repr__(self):
        return f"ZorichPowerMap(stretch={self.stretch})"

    def measure_degree(self, trials=1000, seed=0):
        """Fibre size with index at generic targets; must be constant."""
        y = sphere.sample_uniform(trials, np.random.SeedSequence(seed, spawn_key=(3,)), 3)
        batch = self.preimage_batch(y)
        totals = np.bincount(batch.parent, weights=batch.indices, minlength=trials).astype(int)
        if np.any(totals != totals[0]):
            raise RuntimeError(f"preimage counts vary over targets: {sorted(set(totals.tolist()))}")
        return int(totals[0])

    def measure_distortion(self, samples=1000, seed=0, h=1e-6):
        """``max ||Df||^3 / |det Df|`` over random points, by central differences."""
        p = sphere.sample_uniform(samples, np.random.SeedSequence(seed, spawn_key=(4,)), 3)
        # keep clear of the poles and of the image of the beam edges
        p = p[np.abs(p[:, 3]) < 0.9]
        basis = sphere.tangent_basis(p)
        fp = self.evaluate(p)
        out_basis = sphere.tangent_basis(fp)
        cols = []
        for k in range(3):
            plus = self.evaluate(sphere.exp_map(p, h * basis[:, k]))
            minus = self.evaluate(sphere.exp_map(p, -h * basis[:, k]))
            cols.append(np.einsum("mij,mj->mi", out_basis, (plus - minus) / (2 * h)))
        jac = np.stack(cols, axis=-1)
        sv = np.linalg.svd(jac, compute_uv=False)
        ratio = sv[:, 0] ** 3 / np.prod(sv, axis=1)
        return float(np.max(ratio))

    def evaluate(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        m = self.stretch
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t, s = sphere.log_polar(p)
            a, b, parity = beam_inverse(s)
            u = np.where(parity == 1, 2 - a, a)
            s_new = beam_map(m * u, m * b)
            out = sphere.from_log_polar(m * t, s_new)
        poles = ~np.isfinite(t)
        out[poles] = p[poles]
        return out if np.ndim(points) > 1 else out[0]

    def preimage_batch(self, points):
        y = np.atleast_2d(np.asarray(points, dtype=float))
        M = len(y)
        m = self.stretch
        with np.errstate(divide="ignore", invalid="ignore"):
            t, s = sphere.log_polar(y)
        poles = ~np.isfinite(t) | np.isnan(t)
        pts, idx, par = [], [], []
        if poles.any():
            rows = np.flatnonzero(poles)
            pts.append(y[rows])
            idx.append(np.full(rows.size, self.degree))
            par.append(rows)
        rows = np.flatnonzero(~poles)
        if rows.size:
            a, b, parity = beam_inverse(s[rows])
            k = np.arange(-(m // 2) - 2, m + 2)
            # all u with h(u, .) in the same fold class, and likewise for v
            U = np.concatenate([a[:, None] + 4 * k, 2 - a[:, None] + 4 * k], axis=1)
            PU = np.concatenate([np.zeros(len(k), int), np.ones(len(k), int)])
            V = np.concatenate([b[:, None] + 4 * k, 2 - b[:, None] + 4 * k], axis=1)
            PV = PU
            ok_u = (U >= -m) & (U < 3 * m)
            ok_v = (V >= -m) & (V < m)
            pair = (ok_u[:, :, None] & ok_v[:, None, :]
                    & ((PU[None, :, None] + PV[None, None, :] + parity[:, None, None]) % 2 == 0))
            r, i, j = np.nonzero(pair)
            x_u = U[r, i] / m
            x_v = V[r, j] / m
            s_pre = beam_map(x_u, x_v)
            p_pre = sphere.from_log_polar(t[rows][r] / m, s_pre)
            pts.append(p_pre)
            idx.append(np.ones(len(r), int))
            par.append(rows[r])
        pts = np.concatenate(pts)
        idx = np.concatenate(idx)
        par = np.concatenate(par)
        # coincident preimages (targets on the image of a beam edge) add their indices
        pts, idx, par = merge_coincident(pts, idx.astype(float), groups=par)
        order = np.argsort(par, kind="stable")
        return PreimageBatch(pts[order], np.rint(idx[order]).astype(int), par[order])
