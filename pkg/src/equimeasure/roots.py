"""Batched simultaneous-iteration polynomial root finding.

Many polynomials of a common degree are solved at once with the
Aberth-Ehrlich iteration, followed by a Newton polish that switches to the
reversed polynomial (the ``w = 1/z`` chart) for roots outside the unit disc.
Coefficients are ascending: ``c[..., j]`` multiplies ``z**j``.
"""

import numpy as np

EPS = np.finfo(float).eps


class RootFindingError(RuntimeError):
    """A polynomial could not be solved to the requested backward error."""

    def __init__(self, message, residual, row=None):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = float(residual)
        self.row = row


def _horner(c, z):
    """Evaluate p and p' for ascending coefficients ``c`` (M, d+1) at ``z`` (M, k)."""
    d = c.shape[1] - 1
    p = np.empty(z.shape, complex)
    p[...] = c[:, d : d + 1]
    dp = np.zeros_like(p)
    for j in range(d - 1, -1, -1):
        dp = dp * z + p
        p = p * z + c[:, j : j + 1]
    return p, dp


def backward_error(c, z):
    """Normwise backward error ``|p(z)| / (max_j |c_j| sum_j |z|^j)`` (chart-invariant)."""
    c = np.atleast_2d(c)
    z = np.atleast_2d(z)
    az = np.abs(z)
    inside = az <= 1
    zi = np.where(inside, z, 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        wi = np.where(inside, 0, 1 / np.where(inside, 1, z))
    p_in, _ = _horner(c, zi)
    ones = np.ones(c.shape[:1] + c.shape[1:])
    n_in, _ = _horner(ones, np.abs(zi).astype(complex))
    rc = c[:, ::-1]
    p_out, _ = _horner(rc, wi)
    n_out, _ = _horner(ones, np.abs(wi).astype(complex))
    num = np.where(inside, np.abs(p_in), np.abs(p_out))
    den = np.where(inside, np.abs(n_in), np.abs(n_out)) * np.abs(c).max(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / den, np.where(num > 0, np.inf, 0.0))


def _initial_guesses(c):
    M, n1 = c.shape
    d = n1 - 1
    lead = c[:, d]
    # geometric mean of the root moduli is |c_0 / c_d|^(1/d)
    ratio = np.abs(c[:, 0] / lead)
    radius = np.where(ratio > 0, ratio ** (1.0 / d), 1.0)
    angles = 2 * np.pi * np.arange(d) / d + 0.4
    return radius[:, None] * np.exp(1j * angles)[None, :]


def _quadratic(c):
    """Both roots of each row by the cancellation-free quadratic formula."""
    c0, c1, c2 = c[:, 0], c[:, 1], c[:, 2]
    disc = np.sqrt(c1 * c1 - 4 * c2 * c0)
    sign = np.where((np.conj(c1) * disc).real >= 0, 1.0, -1.0)
    q = -0.5 * (c1 + sign * disc)
    with np.errstate(divide="ignore", invalid="ignore"):
        z1 = np.where(q != 0, q / c2, 0)
        z2 = np.where(q != 0, c0 / q, 0)
    return np.stack([z1, z2], axis=1)


def aberth(c, z0=None, maxiter=400):
    """Aberth-Ehrlich iteration on a batch of polynomials.

    Parameters
    ----------
    c : ndarray, shape (M, d+1)
        Ascending complex coefficients with nonzero leading entry.
    z0 : ndarray, shape (M, d), optional
        Starting approximations.
    maxiter : int

    Returns
    -------
    z : ndarray, shape (M, d)
    converged : ndarray of bool, shape (M,)
    """
    c = np.asarray(c, dtype=complex)
    M, n1 = c.shape
    d = n1 - 1
    if d == 0:
        return np.zeros((M, 0), complex), np.ones(M, bool)
    if d == 1:
        return (-c[:, :1] / c[:, 1:2]), np.ones(M, bool)
    z = _initial_guesses(c) if z0 is None else np.array(z0, dtype=complex)
    active = np.ones(M, bool)
    done = np.zeros((M, d), bool)
    offdiag = ~np.eye(d, dtype=bool)
    for _ in range(maxiter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        zc = z[idx]
        cc = c[idx]
        p, dp = _horner(cc, zc)
        diff = zc[:, :, None] - zc[:, None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(offdiag & (diff != 0), 1 / diff, 0)
            s = inv.sum(axis=2)
            newton = p / dp
            w = newton / (1 - newton * s)
        w = np.where(np.isfinite(w), w, 0)
        w = np.where(p == 0, 0, w)
        zc = zc - w
        z[idx] = zc
        small = np.abs(w) <= 4 * EPS * np.maximum(np.abs(zc), 1e-300)
        done[idx] = small
        active[idx] = ~small.all(axis=1)
    return z, ~active


def polish(c, z, steps=3):
    """Newton polish; roots outside the unit disc are refined in ``w = 1/z``."""
    c = np.asarray(c, dtype=complex)
    z = np.array(z, dtype=complex)
    rc = c[:, ::-1]
    before = backward_error(c, z)
    for _ in range(steps):
        inside = np.abs(z) <= 1
        p, dp = _horner(c, np.where(inside, z, 0))
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(inside, 0, 1 / np.where(inside, 1, z))
            q, dq = _horner(rc, w)
            step_in = np.where(dp != 0, p / dp, 0)
            step_out = np.where(dq != 0, q / dq, 0)
            znew = np.where(inside, z - step_in, 1 / (w - step_out))
        ok = np.isfinite(znew)
        # keep a step only if it does not increase the backward error
        cand = np.where(ok, znew, z)
        after = backward_error(c, cand)
        better = after <= before
        z = np.where(better, cand, z)
        before = np.where(better, after, before)
    return z


def solve(c, tol=1e-10, maxiter=400, retry_seed=0):
    """Roots of a batch of polynomials with nonzero leading coefficients.

    Rows whose backward error stays above ``tol`` are retried from randomly
    rotated starting points; a row that still fails raises
    :class:`RootFindingError` carrying the residual.
    """
    c = np.atleast_2d(np.asarray(c, dtype=complex))
    M, n1 = c.shape
    d = n1 - 1
    if d == 0:
        return np.zeros((M, 0), complex)
    scale = np.max(np.abs(c), axis=1, keepdims=True)
    c = c / scale
    if d == 2:
        z = _quadratic(c)
        z = polish(c, z, steps=1)
    else:
        z, _ = aberth(c, maxiter=maxiter)
        z = polish(c, z)
    be = backward_error(c, z).max(axis=1)
    bad = np.flatnonzero(~(be <= tol))
    if bad.size:
        rng = np.random.default_rng(retry_seed)
        for attempt in range(3):
            cb = c[bad]
            z0 = _initial_guesses(cb) * np.exp(1j * rng.uniform(0, 2 * np.pi, (bad.size, 1)))
            z0 = z0 * (1 + 0.1 * rng.standard_normal(z0.shape))
            zb, _ = aberth(cb, z0=z0, maxiter=4 * maxiter)
            zb = polish(cb, zb, steps=6)
            beb = backward_error(cb, zb).max(axis=1)
            fixed = beb <= tol
            z[bad[fixed]] = zb[fixed]
            bad = bad[~fixed]
            if bad.size == 0:
                break
        if bad.size:
            worst = backward_error(c[bad], z[bad]).max(axis=1)
            k = int(np.argmax(worst))
            raise RootFindingError("root finder did not converge", worst[k], row=int(bad[k]))
    return z
