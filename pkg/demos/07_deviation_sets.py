# # Where pullbacks deviate
#
# For each grid seed, compare the pullback integral of a test function with
# the same integral for the pulled-back volume.  Seeds deviating by at least
# epsilon form a set whose capacity is bounded by
# K^(1/n) ||grad phi||_n / (epsilon d^(k/n)).

from equimeasure import families, harmonics, sphere
from equimeasure.potential import deviation_sweep

f = families.power_map(2)
D = harmonics.harmonic_dictionary(2, 2)
reports = deviation_sweep(f, D.subset(ids={"Y1,0", "Y2,0"}), [0.1], range(0, 11, 2), sphere.fibonacci_sphere(512))
for r in reports:
    print(f"{r.test_function} k={r.level:2d}  flagged={r.flagged_count:4d}  capacity={r.capacity:.3f}  bound={r.bound:.3f}")
