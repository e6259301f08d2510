# # Discrete Riesz capacity
#
# Each point stands for a small flat cell; the cell self-energy makes the
# discrete energy a positive definite form, minimized over the simplex.
# Symmetric sets get symmetric weights, and capacity grows with the set.

import numpy as np

from equimeasure import sphere
from equimeasure.potential import equilibrium_weights, grid_cell_radius

two = equilibrium_weights(sphere.stereo_lift(np.array([0.0, 1.5 + 0.5j])))
print("two points:", two.weights, f"capacity {two.capacity:.4f}")

for n in (16, 64, 256):
    rep = equilibrium_weights(sphere.circle_points(n))
    print(f"circle N={n:4d}: weight spread {np.ptp(rep.weights):.1e}  energy {rep.energy:.4f}"
          f"  KKT {rep.kkt_residual:.1e}")

grid = sphere.fibonacci_sphere(1000)
rho = grid_cell_radius(1000)
caps = [equilibrium_weights(grid[:m], cell_radius=rho).capacity for m in (10, 100, 1000)]
print("nested caps on a shared grid:", [round(c, 4) for c in caps])
