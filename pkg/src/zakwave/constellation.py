"""Square QAM constellations with Gray labelling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConstellation
from .grid import GridParams, QuasiPeriodicArray


def _gray(n: int) -> int:
    return n ^ (n >> 1)


@dataclass(frozen=True, eq=False)
class Constellation:
    """Symbol alphabet plus the bit label of each point."""

    points: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)  # (size, bits_per_symbol) of 0/1
    name: str = ""

    @property
    def bits_per_symbol(self) -> int:
        return self.labels.shape[1]

    @property
    def mean_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    def check_unit_energy(self, tol: float = 1e-12):
        if abs(self.mean_energy - 1.0) > tol:
            raise InvalidConstellation(
                f"constellation {self.name or '?'} has mean energy {self.mean_energy}, expected 1"
            )

    def random_indices(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.integers(0, self.points.size, size=shape)

    def random_symbols(self, rng: np.random.Generator, shape) -> np.ndarray:
        return self.points[self.random_indices(rng, shape)]

    def slice(self, z) -> np.ndarray:
        """Index of the nearest point for each entry of ``z``."""
        z = np.asarray(z)
        d = np.abs(z[..., None] - self.points) ** 2
        return np.argmin(d, axis=-1)

    def bit_errors(self, idx_tx, idx_rx) -> int:
        return int(np.sum(self.labels[np.asarray(idx_tx)] != self.labels[np.asarray(idx_rx)]))


def qam(order: int = 4) -> Constellation:
    """Unit-energy square ``order``-QAM with Gray mapping per axis."""
    side = math.isqrt(order)
    if side * side != order or side < 2 or side & (side - 1):
        raise InvalidConstellation(f"square QAM needs order 4, 16, 64, ..., got {order}")
    half = side.bit_length() - 1
    levels = np.arange(side) * 2 - (side - 1)
    pts, labels = [], []
    for i in range(side):
        for q in range(side):
            pts.append(levels[i] + 1j * levels[q])
            gi, gq = _gray(i), _gray(q)
            labels.append([(gi >> b) & 1 for b in reversed(range(half))] +
                          [(gq >> b) & 1 for b in reversed(range(half))])
    pts = np.array(pts)
    pts /= np.sqrt(np.mean(np.abs(pts) ** 2))
    return Constellation(pts, np.array(labels, dtype=np.int8), name=f"{order}-QAM")


@dataclass(frozen=True, eq=False)
class DataFrame:
    """Information symbols on the ``M x N`` fundamental grid, kept as indices."""

    grid: GridParams
    indices: np.ndarray = field(repr=False)
    constellation: Constellation = field(repr=False)

    @property
    def symbols(self) -> np.ndarray:
        return self.constellation.points[self.indices]

    def as_array(self) -> QuasiPeriodicArray:
        return QuasiPeriodicArray(self.grid, self.symbols)

    def bit_error_rate(self, other: "DataFrame") -> float:
        errs = self.constellation.bit_errors(self.indices, other.indices)
        return errs / (self.indices.size * self.constellation.bits_per_symbol)


def random_data_frame(grid: GridParams, constellation: Constellation, rng: np.random.Generator) -> DataFrame:
    constellation.check_unit_energy()
    idx = constellation.random_indices(rng, (grid.M, grid.N))
    return DataFrame(grid, idx, constellation)
