# # Support of the limit versus the Julia set
#
# The Julia set is sampled independently: escape-time boundary pixels for
# polynomials, a backward orbit of a repelling fixed point otherwise.  The
# atoms of the pullback measure should lie near it and fill it out.

from equimeasure import families, julia, sphere
from equimeasure.measures import PullbackConfig, pullback_iterate
from equimeasure.stats import atom_scan, support_vs_julia

a = sphere.sample_uniform(1, 600)[0]
for name, k, budget in [("z^2", 14, 1 << 14), ("z^2-2", 14, 1 << 14),
                        ("z^2-1", 14, 1 << 14), ("z^2-1", 16, 1 << 16)]:
    f = families.reference_map(name)
    mu = pullback_iterate(f, a, k, PullbackConfig(max_atoms=budget, seed=6))
    ref = julia.julia_reference(f)
    print(f"{name:6s} k={k}  Hausdorff distance {support_vs_julia(mu, ref):.3f}"
          f"  max ball mass (r=0.1, 0.03, 0.01): {[round(m, 4) for _, m in atom_scan(mu, [0.1, 0.03, 0.01])]}")

# The basilica needs a deeper level: the pullback puts very little mass
# near the alpha fixed point, so those parts of the Julia set are reached late.
