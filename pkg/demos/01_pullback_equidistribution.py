# # Pulling back a point mass
#
# Start from a Dirac mass at a generic point and pull it back through
# f(z) = z^2 again and again, dividing by the degree each time.  The atoms
# spread over the unit circle and the measure approaches the uniform
# measure there.

import numpy as np

from equimeasure import families, harmonics, sphere
from equimeasure.measures import PullbackConfig, pullback_sequence, DiscreteMeasure
from equimeasure.stats import uniform_circle_measure, weak_distance

f = families.power_map(2)
a = sphere.sample_uniform(1, 2024)[0]
D = harmonics.harmonic_dictionary(2, 8)
circle = uniform_circle_measure(64)

# Distance to the circle measure, measured through spherical harmonics of degree <= 8.

config = PullbackConfig(max_atoms=4096, seed=1)
for k, mu in enumerate(pullback_sequence(f, DiscreteMeasure.dirac(a), 12, config)):
    z, _ = mu.chart()
    print(f"k={k:2d}  atoms={len(mu):5d}  weak distance={weak_distance(mu, circle, D):.2e}"
          f"  |z| in [{np.abs(z).min():.4f}, {np.abs(z).max():.4f}]")

# # The Chebyshev map
#
# For z^2 - 2 the limit lives on the segment [-2, 2] with the arcsine
# density 1 / (pi sqrt(4 - x^2)), whose even moments are the central
# binomial coefficients 2, 6, 20.

f = families.chebyshev_map()
mu = None
for mu in pullback_sequence(f, DiscreteMeasure.dirac(a), 14, PullbackConfig(max_atoms=1 << 14)):
    pass
x = mu.chart()[0].real
for m in range(1, 7):
    print(f"moment {m}: {x**m @ mu.weights: .4f}")
