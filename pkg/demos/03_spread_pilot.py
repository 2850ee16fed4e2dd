"""Spread pilots: a point pilot smeared by a 2-D CAZAC filter.

The filter spreads the pilot over the whole frame (low PAPR) while the
self-ambiguity collapses onto a lattice with exactly MN points.
"""

import math

import numpy as np

from zakwave import dd_ambiguity, idzt, make_grid, papr
from zakwave.spread import Cazac2DParams, PilotSpec, lattice_descriptor, lattice_support, point_pilot, spread_pilot

grid = make_grid(5, 7)
MN = grid.MN
p = Cazac2DParams(alpha1=3, beta1=1, alpha2=2, beta2=4, gamma=0, grid=grid)
spec = PilotSpec(0, 0, grid)

xs = spread_pilot(p, spec).normalized(MN)
print(f"point pilot PAPR {papr(idzt(point_pilot(spec).normalized(MN))):.1f}, "
      f"spread pilot PAPR {papr(idzt(xs)):.2f}")

A = dd_ambiguity(xs, xs).magnitude
k, l = np.meshgrid(np.arange(MN), np.arange(MN), indexing="ij")
pred = lattice_support(p, k, l)
d = lattice_descriptor(p)
print(f"theta = {d.theta}; lattice points {pred.sum()} of {MN * MN}")
print(f"|A| on lattice in [{A[pred].min():.6f}, {A[pred].max():.6f}], off lattice max {A[~pred].max():.1e}")
print("lattice points with k < 5:", sorted((int(a), int(b)) for a, b in zip(*np.nonzero(pred)) if a < 5))
print(f"gcd(2*alpha1, MN) = {math.gcd(2 * p.alpha1, MN)}, gcd(2*alpha2, MN) = {math.gcd(2 * p.alpha2, MN)}")
