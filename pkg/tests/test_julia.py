import numpy as np
import pytest

from equimeasure import families, julia, sphere


def test_escape_radius():
    assert julia.escape_radius([-2, 0, 1]) == 3.0
    assert julia.escape_radius([0, 0, 1]) == 2.0


def test_square_julia_set_is_the_unit_circle(square):
    z = julia.escape_time_boundary(square, resolution=401)
    pix = 4.0 / 400
    assert np.abs(np.abs(z) - 1).max() < 2 * pix
    # every direction is represented
    angles = np.sort(np.angle(z))
    assert np.diff(angles).max() < 0.05


def test_chebyshev_julia_set_is_a_segment(chebyshev):
    z = julia.escape_time_boundary(chebyshev, resolution=401)
    pix = 6.0 / 400
    assert np.abs(z.imag).max() < 2 * pix
    assert z.real.min() < -2 + 2 * pix and z.real.max() > 2 - 2 * pix


def test_non_polynomials_need_backward_orbits():
    f = families.lattes_map()
    with pytest.raises(ValueError):
        julia.escape_time_boundary(f)
    pts = julia.julia_reference(f, depth=5, max_points=500)
    assert pts.shape[1] == 3
    # the Lattes Julia set is the whole sphere: a backward orbit spreads out
    assert np.linalg.norm(pts.mean(axis=0)) < 0.3


def test_backward_orbit_lands_on_the_circle(square):
    pts = julia.backward_orbit_sample(square, depth=8)
    z, inf = sphere.stereo_project(pts)
    assert not inf.any()
    np.testing.assert_allclose(np.abs(z), 1, atol=1e-12)
