import math

import numpy as np
import pytest

from equimeasure import harmonics, sphere
from equimeasure.measures import DiscreteMeasure


def test_dictionary_layout(dictionary):
    assert len(dictionary) == sum(2 * l + 1 for l in range(1, 9))
    assert dictionary.ids[:3] == ["Y1,-1", "Y1,0", "Y1,1"]
    assert dictionary["Y3,2"].degree == 3
    sub = dictionary.subset(max_degree=2)
    assert len(sub) == 8
    np.testing.assert_array_equal(sub.values(sphere.sample_uniform(5, 1)),
                                  dictionary.values(sphere.sample_uniform(5, 1))[:8])


def test_batch_matches_scipy_harmonics(dictionary):
    p = sphere.sample_uniform(500, 3)
    stacked = np.stack([fn(p) for fn in dictionary])
    np.testing.assert_allclose(dictionary.values(p), stacked, atol=1e-11)


def test_orthonormal_with_zero_mean(dictionary):
    pts, w = harmonics.quadrature(2)
    V = dictionary.values(pts)
    np.testing.assert_allclose(V @ w, 0, atol=1e-13)
    np.testing.assert_allclose((V * w) @ V.T, np.eye(len(dictionary)), atol=1e-12)


def test_degree_one_oracle(dictionary):
    # Y1,0 = sqrt(3) z; |grad| = sqrt(3) sin(theta)
    y = dictionary["Y1,0"]
    p = sphere.sample_uniform(50, 2)
    np.testing.assert_allclose(y(p), math.sqrt(3) * p[:, 2], atol=1e-13)
    assert y.grad_sup == pytest.approx(math.sqrt(3), rel=1e-6)
    # (int_{S^2} 3 sin^2 dA)^(1/2) with raw area: sqrt(8 pi)
    assert y.grad_norm == pytest.approx(math.sqrt(8 * math.pi), rel=1e-8)


def test_gradient_constants_grow_with_degree(dictionary):
    top = [dictionary.subset(ids=[f"Y{l},0"])[0].grad_sup for l in range(1, 9)]
    assert all(a < b for a, b in zip(top, top[1:]))


def test_sphere_moments():
    assert harmonics.sphere_moment([2, 0, 0]) == pytest.approx(1 / 3)
    assert harmonics.sphere_moment([4, 0, 0]) == pytest.approx(1 / 5)
    assert harmonics.sphere_moment([2, 2, 0, 0]) == pytest.approx(1 / 24)
    assert harmonics.sphere_moment([1, 2, 0]) == 0


def test_three_sphere_harmonics():
    d3 = harmonics.harmonic_dictionary(3, 3)
    assert len(d3) == sum((l + 1) ** 2 for l in range(1, 4))
    p = sphere.sample_uniform(200_000, 77, 3)
    mu = DiscreteMeasure(p, np.full(len(p), 1 / len(p)))
    V = d3.values(p)
    gram = (V * mu.weights) @ V.T
    np.testing.assert_allclose(gram, np.eye(len(d3)), atol=0.03)
    # degree-one members are 2 x_i up to orthogonal mixing
    lin = d3.subset(max_degree=1)
    M = lin.values(sphere.north_pole(3)[None, :])
    assert np.linalg.norm(M) == pytest.approx(2.0)


def test_chebyshev_dictionary_values():
    d = harmonics.chebyshev_dictionary(4)
    assert d.ids == ["T1", "T2", "T3", "T4"]
    x = np.array([-2.0, -0.6, 1.2, 2.0])
    V = d.values(sphere.stereo_lift(x.astype(complex)))
    t = x / 2
    np.testing.assert_allclose(V[1], 2 * t**2 - 1, atol=1e-13)
    np.testing.assert_allclose(V[2], 4 * t**3 - 3 * t, atol=1e-13)
    assert np.all(d.values(sphere.north_pole(2)[None, :]) == 1)
