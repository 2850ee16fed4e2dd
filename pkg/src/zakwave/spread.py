"""Twisted convolution, point pilots and 2-D CAZAC spread pilots.

A spread pilot is a point pilot filtered by the unit-modulus DD filter

    W[k, l] = exp(j 2 pi (a1 k^2 + b1 k + a2 l^2 + b2 l + g) / MN)

through the MN-periodic twisted convolution. Its self-ambiguity has
constant magnitude on the sublattice

    2 a1 k - l = 0 (mod M),   k - theta l = 0 (mod N),
    theta = (2 a1)^-1 - 2 a2 (mod MN)

and vanishes elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, InvalidAlpha, NoInverse
from .grid import GridParams, QuasiPeriodicArray, qp_eval


@dataclass(frozen=True)
class Cazac2DParams:
    alpha1: int
    beta1: int
    alpha2: int
    beta2: int
    gamma: int
    grid: GridParams

    def __post_init__(self):
        MN = self.grid.MN
        for name in ("alpha1", "beta1", "alpha2", "beta2", "gamma"):
            object.__setattr__(self, name, int(getattr(self, name)) % MN)
        for name in ("alpha1", "alpha2"):
            if (2 * getattr(self, name)) % MN == 0:
                raise InvalidAlpha(f"2*{name} must be nonzero mod {MN}")


@dataclass(frozen=True)
class PilotSpec:
    k_p: int
    l_p: int
    grid: GridParams

    def __post_init__(self):
        object.__setattr__(self, "k_p", int(self.k_p) % self.grid.M)
        object.__setattr__(self, "l_p", int(self.l_p) % self.grid.N)


@dataclass(frozen=True)
class LatticeDescriptor:
    theta: int
    slope_mod_M: int  # 2 * alpha1 reduced mod M
    grid: GridParams

    def contains(self, k, l):
        M, N = self.grid.M, self.grid.N
        k = np.asarray(k)
        l = np.asarray(l)
        return ((self.slope_mod_M * k - l) % M == 0) & ((k - self.theta * l) % N == 0)


def twisted_shift(b: QuasiPeriodicArray, k0: int, l0: int) -> np.ndarray:
    """Fundamental domain of ``b[k - k0, l - l0] exp(j 2 pi l0 (k - k0) / MN)``."""
    grid = b.grid
    MN = grid.MN
    k = np.arange(grid.M)[:, None]
    l = np.arange(grid.N)[None, :]
    return qp_eval(b, k - k0, l - l0) * np.exp(2j * np.pi * np.mod(l0 * (k - k0), MN) / MN)


def twisted_conv_points(ks, ls, values, b: QuasiPeriodicArray) -> QuasiPeriodicArray:
    """Twisted convolution of a sparse MN-periodic kernel with ``b``.

    The kernel is given as parallel sequences of integer positions and
    complex weights; positions are taken modulo ``MN``.
    """
    out = np.zeros((b.grid.M, b.grid.N), dtype=np.complex128)
    for k0, l0, v in zip(ks, ls, values):
        if v != 0:
            out += v * twisted_shift(b, int(k0), int(l0))
    return QuasiPeriodicArray(b.grid, out)


def twisted_conv(a: np.ndarray, b: QuasiPeriodicArray) -> QuasiPeriodicArray:
    """MN-periodic twisted convolution of ``a`` (one ``MN x MN`` period) with ``b``.

    ``c[k, l] = sum_{k', l' in [0, MN)} a[k', l'] b[k - k', l - l'] exp(j 2 pi l' (k - k') / MN)``
    """
    MN = b.grid.MN
    a = np.asarray(a)
    if a.shape != (MN, MN):
        raise GridMismatch(f"kernel must be one {MN}x{MN} period, got shape {a.shape}")
    ks, ls = np.nonzero(a)
    return twisted_conv_points(ks, ls, a[ks, ls], b)


def point_pilot(spec: PilotSpec) -> QuasiPeriodicArray:
    grid = spec.grid
    X = np.zeros((grid.M, grid.N), dtype=np.complex128)
    X[spec.k_p, spec.l_p] = 1.0
    return QuasiPeriodicArray(grid, X)


def cazac_filter_2d(p: Cazac2DParams) -> np.ndarray:
    """One ``MN x MN`` period of the 2-D CAZAC DD filter."""
    MN = p.grid.MN
    k = np.arange(MN, dtype=np.int64)[:, None]
    l = np.arange(MN, dtype=np.int64)[None, :]
    e = (p.alpha1 * (k * k % MN) + p.beta1 * k + p.alpha2 * (l * l % MN) + p.beta2 * l + p.gamma) % MN
    return np.exp(2j * np.pi * e / MN)


def spread_pilot(p: Cazac2DParams, spec: PilotSpec) -> QuasiPeriodicArray:
    """Point pilot at ``spec`` filtered by the 2-D CAZAC filter (not normalized)."""
    if p.grid != spec.grid:
        raise GridMismatch("filter and pilot grids differ")
    return twisted_conv(cazac_filter_2d(p), point_pilot(spec))


def spread_pilot_origin(p: Cazac2DParams) -> QuasiPeriodicArray:
    """Spread pilot for a point pilot at the origin, from the folded sum

    ``x_s[k, l] = sum_{n<N} sum_{m<M} W[k - nM, l - mN] exp(j 2 pi n l / N)``.
    """
    grid = p.grid
    M, N, MN = grid.M, grid.N, grid.MN
    W = cazac_filter_2d(p)
    out = np.zeros((M, N), dtype=np.complex128)
    k = np.arange(M)[:, None]
    l = np.arange(N)[None, :]
    for n in range(N):
        tone = np.exp(2j * np.pi * n * l / N)
        for m in range(M):
            out += W[(k - n * M) % MN, (l - m * N) % MN] * tone
    return QuasiPeriodicArray(grid, out)


def lattice_descriptor(p: Cazac2DParams) -> LatticeDescriptor:
    MN = p.grid.MN
    # a Doppler chirp rate sharing a factor with MN breaks the lattice for
    # some offsets beta, so both rates must be invertible
    for name in ("alpha1", "alpha2"):
        a = getattr(p, name)
        if math.gcd(2 * a, MN) != 1:
            raise NoInverse(f"2*{name} = {2 * a} has no inverse mod {MN}")
    theta = (pow(2 * p.alpha1, -1, MN) - 2 * p.alpha2) % MN
    return LatticeDescriptor(theta, (2 * p.alpha1) % p.grid.M, p.grid)


def lattice_support(p: Cazac2DParams, k, l):
    """True where the spread-pilot self-ambiguity is nonzero.

    Raises
    ------
    NoInverse
        If ``2 alpha1`` or ``2 alpha2`` shares a factor with ``MN``.
    """
    return lattice_descriptor(p).contains(k, l)
