# # Exceptional points
#
# A point whose backward orbit is finite never spreads out under pullback.
# For z^d these are 0 and infinity; a polynomial always has infinity; a
# Lattes map has none.

import warnings

from equimeasure import families, harmonics, sphere
from equimeasure.measures import ExceptionalSeedWarning
from equimeasure.stats import convergence_rate, exceptional_scan


def describe(points):
    out = []
    for p in points:
        z = sphere.to_chart(p)
        out.append("inf" if z is sphere.INF else f"{z.real:+.3f}{z.imag:+.3f}i")
    return out


for name, f in [("z^2", families.power_map(2)), ("z^3", families.power_map(3)),
                ("z^2-2", families.chebyshev_map()), ("lattes", families.lattes_map())]:
    print(f"{name:7s} exceptional: {describe(exceptional_scan(f))}")

# Seeding the pullback at 0 for z^2 leaves the mass stuck there; the report says so.

D = harmonics.harmonic_dictionary(2, 4)
with warnings.catch_warnings():
    warnings.simplefilter("ignore", ExceptionalSeedWarning)
    rep = convergence_rate(families.power_map(2), sphere.south_pole(2), D, 8)
print("seed 0:", "converged" if rep.converged else "not converged",
      f"(atom mass {rep.final_atom_mass:.2f})")
