"""Tour of the Zak grid: DZT round trip, carrier waveforms, pulse trains.

Run with ``python demos/01_zak_grid.py``.
"""

import numpy as np

from zakwave import PeriodicSequence, basis_dd, basis_td, dzt, idzt, make_grid, papr
from zakwave.spread import PilotSpec, point_pilot

grid = make_grid(31, 37, nu_p=30e3)
print(f"grid {grid.M} x {grid.N}: MN = {grid.MN}, bandwidth {grid.bandwidth / 1e3:.0f} kHz, "
      f"frame {grid.duration * 1e3:.3f} ms")

# The DZT is unitary: energy and inner products survive, and idzt undoes it.
rng = np.random.default_rng(0)
x = PeriodicSequence(grid, rng.standard_normal(grid.MN) + 1j * rng.standard_normal(grid.MN))
X = dzt(x)
print(f"energy TD {x.energy:.6f}, DD {X.energy:.6f}")
print(f"round-trip error {np.max(np.abs(idzt(X).samples - x.samples)):.1e}")

# Quasi-periodicity: one step of M in delay picks up a Doppler phase.
k, l = 5, 3
print(f"X[k+M, l] / X[k, l] = {X.at(k + grid.M, l) / X.at(k, l):.6f}, "
      f"expected {np.exp(2j * np.pi * l / grid.N):.6f}")

# A DD carrier at (r, s) is a pulse train in time: N pulses, one every M samples.
small = make_grid(3, 5)
v = basis_td(small, 1, 1).samples
print("basis_td(1, 1) nonzero samples:", np.flatnonzero(np.abs(v) > 1e-12))
print("maps to basis_dd(1, 1):", np.allclose(dzt(basis_td(small, 1, 1)).fundamental,
                                              basis_dd(small, 1, 1).fundamental))

# A point pilot at the origin is the same kind of pulse train, so its PAPR is M.
train = idzt(point_pilot(PilotSpec(0, 0, grid)))
print(f"point-pilot PAPR {papr(train):.1f} (M = {grid.M})")
