import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from equimeasure import families, sphere
from equimeasure.measures import DiscreteMeasure
from equimeasure.potential import (SELF_ENERGY, deviation_set_experiment, equilibrium_weights,
                                   grid_cell_radius, interaction_matrix, minimize_on_simplex,
                                   riesz_energy, riesz_potential)


def test_potential_of_the_unit_circle_at_zero():
    mu = DiscreteMeasure.uniform(sphere.circle_points(64))
    # every atom is at chordal distance sqrt(2) from the south pole
    assert riesz_potential(mu, sphere.south_pole(2)) == pytest.approx(1 / math.sqrt(2), abs=1e-14)
    assert riesz_potential(mu, mu.points[3]) == math.inf


def test_antipodal_energy():
    mu = DiscreteMeasure.uniform(np.stack([sphere.north_pole(2), sphere.south_pole(2)]))
    assert riesz_energy(mu) == pytest.approx(0.25, abs=1e-15)
    assert riesz_energy(DiscreteMeasure.dirac(sphere.north_pole(2))) == math.inf


def test_two_points_split_evenly():
    pts = sphere.stereo_lift(np.array([0.2, 1.7 + 0.4j]))
    rep = equilibrium_weights(pts)
    np.testing.assert_allclose(rep.weights, 0.5, atol=1e-12)
    assert rep.kkt_residual < 1e-8 and rep.converged
    assert rep.capacity == pytest.approx(1 / rep.energy)


def test_fewer_than_two_points_have_no_capacity():
    rep = equilibrium_weights(sphere.north_pole(2)[None, :])
    assert rep.capacity == 0 and rep.energy == math.inf


@pytest.mark.parametrize("N", [64, 256, 1024])
def test_circle_is_uniform_with_log_energy(N):
    rep = equilibrium_weights(sphere.circle_points(N))
    np.testing.assert_allclose(rep.weights, 1 / N, rtol=1e-10)
    # sum_{k=1}^{N-1} 1 / (2 sin(pi k / N)) ~ (N / pi)(log(2N / pi) + euler_gamma)
    expected = (math.log(2 * N / math.pi) + np.euler_gamma) / math.pi
    assert rep.off_diagonal_energy == pytest.approx(expected, abs=1e-4)


def test_circle_energy_grows_without_bound():
    energies = [equilibrium_weights(sphere.circle_points(N)).off_diagonal_energy for N in (32, 128, 512, 2048)]
    assert all(a < b for a, b in zip(energies, energies[1:]))


def _random_spd(rng, n):
    pts = sphere.sample_uniform(n, int(rng.integers(1 << 30)))
    return interaction_matrix(pts) + np.eye(n) * SELF_ENERGY[2] / 0.05


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 30), st.floats(0.1, 10))
def test_energy_scales_with_the_kernel(seed, n, c):
    # doubling every distance halves the n = 2 kernel and so the minimal energy
    M = _random_spd(np.random.default_rng(seed), n)
    w1, _, _ = minimize_on_simplex(M)
    w2, _, _ = minimize_on_simplex(M / c)
    np.testing.assert_allclose(w2, w1, atol=1e-9)
    assert w2 @ (M / c) @ w2 == pytest.approx((w1 @ M @ w1) / c, rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(3, 40))
def test_minimizer_beats_simplex_perturbations(seed, n):
    rng = np.random.default_rng(seed)
    M = _random_spd(rng, n)
    w, _, ok = minimize_on_simplex(M)
    assert ok
    e = w @ M @ w
    for _ in range(50):
        v = rng.standard_normal(n)
        v -= v.mean()
        t = 1e-3 / np.abs(v).max()
        trial = np.clip(w + t * v, 0, None)
        trial /= trial.sum()
        assert trial @ M @ trial >= e - 1e-13


def test_nested_sets_with_common_cells(rng):
    grid = sphere.fibonacci_sphere(400)
    rho = grid_cell_radius(400)
    for _ in range(10):
        big = rng.choice(400, 40, replace=False)
        small = big[:20]
        cap_small = equilibrium_weights(grid[small], cell_radius=rho).capacity
        cap_big = equilibrium_weights(grid[big], cell_radius=rho).capacity
        assert cap_small <= cap_big + 1e-12


def test_three_points_against_grid_search():
    pts = sphere.stereo_lift(np.array([0.0, 0.3, 2.0 + 1j]))
    rep = equilibrium_weights(pts, cell_radius=0.1)
    M = interaction_matrix(pts) + np.eye(3) * SELF_ENERGY[2] / 0.1
    s = np.linspace(0, 1, 1001)
    a, b = np.meshgrid(s, s, indexing="ij")
    ok = a + b <= 1
    W = np.stack([a[ok], b[ok], 1 - a[ok] - b[ok]], axis=1)
    E = np.einsum("ij,jk,ik->i", W, M, W)
    assert rep.energy <= E.min() + 1e-12
    assert rep.energy == pytest.approx(E.min(), rel=1e-5)


def test_sixteen_points_against_slsqp():
    pts = sphere.sample_uniform(16, 31)
    rep = equilibrium_weights(pts)
    rho = rep.cell_radius
    M = interaction_matrix(pts) + np.eye(16) * SELF_ENERGY[2] / rho
    res = minimize(lambda w: w @ M @ w, np.full(16, 1 / 16), jac=lambda w: 2 * M @ w, method="SLSQP",
                   bounds=[(0, 1)] * 16, constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1}],
                   options={"ftol": 1e-15, "maxiter": 1000})
    assert rep.energy <= res.fun + 1e-10
    np.testing.assert_allclose(rep.weights, res.x, atol=1e-5)


def test_three_sphere_cells():
    pts = sphere.sample_uniform(50, 4, dim=3)
    rep = equilibrium_weights(pts)
    assert rep.converged and rep.kkt_residual < 1e-8
    assert abs(rep.weights.sum() - 1) < 1e-12


def test_deviation_set_for_the_square(low_dictionary, square):
    grid = sphere.fibonacci_sphere(600)
    rep = deviation_set_experiment(square, "Y1,0", 0.1, 4, grid, dictionary=low_dictionary)
    assert rep.grid_size == 600
    assert rep.flagged_count == len(rep.flagged)
    assert rep.within_bound
    assert rep.to_dict()["test_function"] == "Y1,0"
    with pytest.raises(KeyError):
        deviation_set_experiment(square, "Y9,0", 0.1, 1, grid, dictionary=low_dictionary)
