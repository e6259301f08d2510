import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equimeasure import sphere
from equimeasure.measures import DiscreteMeasure, PullbackConfig, pullback_iterate
from equimeasure.zorich import ZorichPowerMap, beam_map, fold, hemisphere_to_square, square_to_hemisphere


@pytest.fixture(scope="module")
def zorich():
    return ZorichPowerMap(3)


def test_fold():
    v, par = fold(np.array([0.5, 1.5, 3.5, -1.5]))
    np.testing.assert_allclose(v, [0.5, 0.5, -0.5, -0.5])
    np.testing.assert_array_equal(par, [0, 1, 0, 1])


def test_square_hemisphere_round_trip(rng):
    u, v = rng.uniform(-1, 1, (2, 1000))
    s = square_to_hemisphere(u, v)
    np.testing.assert_allclose(np.linalg.norm(s, axis=1), 1, atol=1e-15)
    assert np.all(s[:, 2] >= -1e-15)
    a, b = hemisphere_to_square(s)
    np.testing.assert_allclose(np.stack([a, b]), np.stack([u, v]), atol=1e-12)


def test_beam_map_is_continuous_across_edges():
    u = np.array([1 - 1e-9, 1 + 1e-9])
    s = beam_map(u, np.array([0.3, 0.3]))
    assert np.linalg.norm(s[0] - s[1]) < 1e-8


def test_degree_and_distortion(zorich):
    assert zorich.degree == 9
    assert 1 < zorich.distortion < 100
    with pytest.raises(ValueError):
        ZorichPowerMap(4)


def test_poles_are_fixed_with_full_index(zorich):
    for pole in (sphere.north_pole(3), sphere.south_pole(3)):
        np.testing.assert_array_equal(zorich.evaluate(pole), pole)
        fib = zorich.preimages(pole)
        assert fib.indices.tolist() == [9]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_fibres_map_back(seed):
    f = ZorichPowerMap(3, measure_samples=10)
    y = sphere.sample_uniform(20, seed, 3)
    batch = f.preimage_batch(y)
    np.testing.assert_array_equal(np.bincount(batch.parent, weights=batch.indices), 9)
    err = np.linalg.norm(f.evaluate(batch.points) - y[batch.parent], axis=1)
    assert err.max() < 1e-9


def test_pullbacks_keep_mass_on_s3(zorich):
    mu = pullback_iterate(zorich, sphere.sample_uniform(1, 5, 3)[0], 4, PullbackConfig(prune_strategy="none"))
    assert len(mu) == 9**4
    assert isinstance(mu, DiscreteMeasure) and abs(mu.weights.sum() - 1) < 1e-12
