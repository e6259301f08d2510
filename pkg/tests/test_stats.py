import math

import numpy as np
import pytest

from equimeasure import families, sphere
from equimeasure.measures import DiscreteMeasure, ExceptionalSeedWarning, PullbackConfig
from equimeasure.stats import (atom_scan, balance_residual, ball_masses, convergence_rate,
                               exceptional_scan, fit_decay, hausdorff_distance, invariance_residual,
                               mixing_correlation, support_vs_julia, uniform_circle_measure,
                               weak_distance)


def test_weak_distance_is_a_metric_on_samples(dictionary):
    a, b, c = (DiscreteMeasure.uniform(sphere.sample_uniform(50, s)) for s in (1, 2, 3))
    assert weak_distance(a, a, dictionary) == 0
    assert weak_distance(a, b, dictionary) == weak_distance(b, a, dictionary)
    assert weak_distance(a, b, dictionary) <= weak_distance(a, c, dictionary) + weak_distance(c, b, dictionary)


def test_uniform_circle_is_exact_for_low_harmonics(dictionary):
    fine = uniform_circle_measure(4096)
    assert weak_distance(uniform_circle_measure(64), fine, dictionary) < 1e-14


def test_circle_measure_is_balanced_and_invariant(dictionary, square):
    mu = uniform_circle_measure(64)
    assert balance_residual(square, mu, dictionary) < 1e-13
    assert invariance_residual(square, mu, dictionary) < 1e-13


def test_residuals_detect_a_non_invariant_measure(dictionary, square):
    mu = DiscreteMeasure.dirac(sphere.stereo_lift(0.5))
    assert invariance_residual(square, mu, dictionary) > 0.1
    assert balance_residual(square, mu, dictionary) > 0.1


def test_ball_masses_and_atom_scan():
    pts = np.stack([sphere.north_pole(2), sphere.stereo_lift(1e6), sphere.south_pole(2)])
    mu = DiscreteMeasure(pts, [0.25, 0.25, 0.5])
    np.testing.assert_allclose(ball_masses(mu, 1e-3), [0.5, 0.5, 0.5])
    scan = atom_scan(mu, [3.0, 0.1])
    assert scan == [(3.0, 1.0), (0.1, 0.5)]
    with pytest.raises(ValueError):
        atom_scan(mu, [0.1, 0.2])


@pytest.mark.parametrize("degree", [2, 3])
def test_power_maps_have_exceptional_poles(degree):
    found = exceptional_scan(families.power_map(degree))
    assert len(found) == 2
    charts = sorted((sphere.to_chart(p) is sphere.INF) for p in found)
    assert charts == [False, True]


def test_polynomials_have_only_infinity_exceptional(chebyshev):
    found = exceptional_scan(chebyshev)
    assert len(found) == 1 and sphere.to_chart(found[0]) is sphere.INF


def test_lattes_has_no_exceptional_points():
    assert len(exceptional_scan(families.lattes_map())) == 0


def test_hausdorff_distance():
    a = sphere.stereo_lift(np.array([0.0, 1.0]))
    assert hausdorff_distance(a, a) == 0
    b = a[:1]
    assert hausdorff_distance(a, b) == pytest.approx(math.sqrt(2))


def test_support_of_circle_measure_matches_the_circle():
    mu = uniform_circle_measure(512)
    ref = sphere.circle_points(4096, phase=0.1)
    assert support_vs_julia(mu, ref) < 2 * math.pi / 512


def test_fit_decay():
    ks = np.arange(10)
    assert fit_decay(ks, 3 * np.exp(-0.7 * ks)) == pytest.approx(0.7)
    assert math.isnan(fit_decay(ks, np.zeros(10)))


def test_square_converges_at_the_expected_rate(dictionary, square):
    rep = convergence_rate(square, sphere.stereo_lift(0.3 + 0.2j), dictionary, 10,
                           PullbackConfig(prune_strategy="none"), reference=uniform_circle_measure(64))
    assert rep.converged and rep.meets_bound
    assert rep.bound_exponent == pytest.approx(math.log(2) / 2)
    assert len(rep.to_rows()) == 12


def test_exceptional_seed_is_flagged(dictionary, square):
    with pytest.warns(ExceptionalSeedWarning):
        rep = convergence_rate(square, sphere.south_pole(2), dictionary, 6)
    assert rep.seed_exceptional and not rep.converged
    assert rep.final_atom_mass == 1.0


def test_mixing_on_the_circle(dictionary, square):
    mu = uniform_circle_measure(4096)
    rep = mixing_correlation(square, mu, "Y1,1", "Y1,1", 8, dictionary=dictionary.subset(max_degree=2))
    assert rep.nearly_invariant
    assert abs(rep.correlations[0][1] - 3 / 2) < 1e-12
    assert max(abs(c) for _, c in rep.correlations[1:]) < 1e-10
    custom = mixing_correlation(square, mu, lambda p: p[:, 0], lambda p: p[:, 0], 1)
    assert custom.correlations[0][1] == pytest.approx(0.5)


def test_invariance_lags_balance_by_one_level(dictionary, chebyshev):
    # f_* mu_k = mu_{k-1} exactly, so inv(mu_k) = bal(mu_{k-1}) for unpruned pullbacks
    from equimeasure.measures import pullback_sequence

    mus = list(pullback_sequence(chebyshev, DiscreteMeasure.dirac(sphere.sample_uniform(1, 9)[0]), 8,
                                 PullbackConfig(prune_strategy="none")))
    for k in range(1, 9):
        assert invariance_residual(chebyshev, mus[k], dictionary) == pytest.approx(
            balance_residual(chebyshev, mus[k - 1], dictionary), rel=1e-9, abs=1e-13)


def test_arcsine_endpoint_ball_mass():
    # chordal radius 0.01 at the chart point 2 is the chart interval [1.975..., 2]
    from scipy.optimize import brentq

    left = brentq(lambda x: sphere.chordal_distance_chart(x, 2.0) - 0.01, 1.9, 2.0)
    mass = np.arccos(left / 2) / np.pi
    assert mass == pytest.approx(0.0503, abs=1e-3)


def test_roots_of_unity_ball_mass(square):
    from equimeasure.measures import pullback_iterate

    mu = pullback_iterate(square, sphere.stereo_lift(1.0), 10, PullbackConfig(prune_strategy="none"))
    # the ball of radius 0.01 holds an atom and its two neighbours (spacing 2 sin(pi / 1024))
    assert atom_scan(mu, [0.01]) == [(0.01, 3 / 1024)]


def test_roots_of_unity_converge_exactly(dictionary, square):
    rep = convergence_rate(square, sphere.stereo_lift(1.0), dictionary, 10, PullbackConfig(prune_strategy="none"))
    # faster than the bound; exact once 2^k exceeds the dictionary degree 8
    assert rep.fitted_exponent > rep.bound_exponent
    assert max(v for k, v in rep.deviations[4:]) < 1e-13


@pytest.mark.parametrize("name,k,budget,limit", [
    ("z^2", 14, 1 << 14, 0.02),
    ("z^2-2", 14, 1 << 14, 0.05),
    ("z^2-1", 14, 1 << 14, 0.05),
])
def test_support_against_escape_time_reference(name, k, budget, limit):
    from equimeasure import julia
    from equimeasure.measures import pullback_iterate

    f = families.reference_map(name)
    mu = pullback_iterate(f, sphere.sample_uniform(1, 61)[0], k, PullbackConfig(max_atoms=budget, seed=1))
    assert support_vs_julia(mu, julia.julia_reference(f)) < limit
