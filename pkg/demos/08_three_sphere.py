# # A power map of S^3
#
# Conjugating x -> 3x by a Zorich map gives a branched self-map of S^3 of
# degree 9 whose iterates all have the same distortion.  The same pullback
# machinery runs unchanged.

from equimeasure import harmonics, sphere
from equimeasure.measures import PullbackConfig
from equimeasure.stats import convergence_rate
from equimeasure.zorich import ZorichPowerMap

f = ZorichPowerMap(3)
print(f"degree {f.degree}, measured distortion {f.distortion:.1f}")
D = harmonics.harmonic_dictionary(3, 3)
rep = convergence_rate(f, sphere.sample_uniform(1, 3, dim=3)[0], D, 5, PullbackConfig(prune_strategy="none"))
for k, v in rep.deviations:
    print(f"k={k}  deviation from mu_5: {v:.2e}")
print(f"fitted exponent {rep.fitted_exponent:.2f}, bound log(9)/3 = {rep.bound_exponent:.2f}")
