# # Balance and invariance
#
# The limit measure mu satisfies f^* mu = d mu (balanced) and hence
# f_* mu = mu (invariant).  For the finite-level pullbacks both residuals
# shrink geometrically.  Invariance of mu_k is exactly the balance of
# mu_{k-1}, because pushing mu_k forward returns mu_{k-1}; so the
# invariance residual trails the balance residual by one level.

from equimeasure import families, harmonics, sphere
from equimeasure.measures import PullbackConfig
from equimeasure.stats import residual_trend

D = harmonics.harmonic_dictionary(2, 8)
a = sphere.sample_uniform(1, 400)[0]
for name in ("z^2", "z^2-2", "cubic"):
    f = families.reference_map(name)
    print(name)
    for k, bal, inv in residual_trend(f, a, D, range(2, 11), PullbackConfig(prune_strategy="none")):
        print(f"  k={k:2d}  balance={bal:.2e}  invariance={inv:.2e}")
