# # Mixing
#
# Correlations int (phi o f^k) psi dmu - int phi dmu int psi dmu decay in k.
# For z^2 on the circle, first harmonics give exactly zero for every k >= 1.
# For z^2 - 2 with Chebyshev test functions, T_m o f = T_{2m} and these are
# orthogonal under the arcsine law.

from equimeasure import families, harmonics, sphere
from equimeasure.measures import PullbackConfig, pullback_iterate
from equimeasure.stats import mixing_correlation, uniform_circle_measure

D = harmonics.harmonic_dictionary(2, 2)
rep = mixing_correlation(families.power_map(2), uniform_circle_measure(4096), "Y1,1", "Y1,1", 8, dictionary=D)
print("z^2  :", [f"{c:.1e}" for _, c in rep.correlations])

f = families.chebyshev_map()
mu = pullback_iterate(f, sphere.sample_uniform(1, 700)[0], 14, PullbackConfig(max_atoms=1 << 14))
C = harmonics.chebyshev_dictionary(4)
rep = mixing_correlation(f, mu, "T1", "T2", 10, dictionary=C)
print("z^2-2:", [f"{c:.1e}" for _, c in rep.correlations], "invariance residual", f"{rep.invariance_residual:.1e}")
