"""Zak grid parameters, MN-periodic sequences and quasi-periodic DD arrays.

A grid is fixed by the number of delay bins ``M``, the number of Doppler
bins ``N`` and the Doppler period ``nu_p`` (Hz). Time-domain (TD) signals
are sequences of period ``MN``; delay-Doppler (DD) signals are ``M x N``
arrays extended to all of Z^2 by the quasi-periodicity rule

    X[k + nM, l + mN] = exp(j 2 pi n l / N) X[k, l].

Only the fundamental domain ``[0, M) x [0, N)`` is stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EvenDimension, GridMismatch, NonPositive, NotCoprime, ZeroSignal


@dataclass(frozen=True)
class GridParams:
    """Zak grid with ``M`` delay bins, ``N`` Doppler bins, Doppler period ``nu_p``."""

    M: int
    N: int
    nu_p: float

    @property
    def MN(self) -> int:
        return self.M * self.N

    @property
    def tau_p(self) -> float:
        """Delay period in seconds."""
        return 1.0 / self.nu_p

    @property
    def bandwidth(self) -> float:
        return self.M * self.nu_p

    @property
    def duration(self) -> float:
        return self.N * self.tau_p

    @property
    def delay_res(self) -> float:
        return self.tau_p / self.M

    @property
    def doppler_res(self) -> float:
        return self.nu_p / self.N

    def as_dict(self) -> dict:
        return {"M": self.M, "N": self.N, "nu_p": self.nu_p}


def make_grid(M: int, N: int, nu_p: float = 1.0) -> GridParams:
    """Validate and build a :class:`GridParams`.

    Raises
    ------
    EvenDimension
        If ``M`` or ``N`` is even.
    NotCoprime
        If ``gcd(M, N) != 1``.
    NonPositive
        If any of ``M``, ``N``, ``nu_p`` is not positive.
    """
    M, N = int(M), int(N)
    if M <= 0 or N <= 0:
        raise NonPositive(f"grid dimensions must be positive, got M={M}, N={N}")
    if not nu_p > 0:
        raise NonPositive(f"Doppler period must be positive, got {nu_p}")
    if M % 2 == 0 or N % 2 == 0:
        raise EvenDimension(f"M and N must be odd, got M={M}, N={N}")
    if math.gcd(M, N) != 1:
        raise NotCoprime(f"gcd(M, N) must be 1, got gcd({M}, {N}) = {math.gcd(M, N)}")
    return GridParams(M, N, float(nu_p))


def check_same_grid(*items) -> GridParams:
    grids = {item.grid for item in items}
    if len(grids) != 1:
        raise GridMismatch(f"operands live on different grids: {sorted(map(str, grids))}")
    return grids.pop()


def _frozen(arr, shape) -> np.ndarray:
    out = np.array(arr, dtype=np.complex128)
    if out.size != math.prod(shape):
        raise GridMismatch(f"expected {math.prod(shape)} samples for shape {shape}, got {out.size}")
    out = out.reshape(shape)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PeriodicSequence:
    """One period of an MN-periodic TD sequence."""

    grid: GridParams
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen(self.samples, (self.grid.MN,)))

    def __call__(self, n):
        """Evaluate at any integer index (scalar or array)."""
        return self.samples[np.mod(n, self.grid.MN)]

    def __len__(self):
        return self.grid.MN

    @property
    def energy(self) -> float:
        return float(np.vdot(self.samples, self.samples).real)


def qp_eval(X: "QuasiPeriodicArray", k, l):
    """Evaluate a quasi-periodic array at arbitrary integer ``(k, l)``.

    ``k`` and ``l`` may be scalars or broadcastable integer arrays.
    """
    M, N = X.grid.M, X.grid.N
    k = np.asarray(k)
    l = np.asarray(l)
    n, k0 = np.divmod(k, M)
    l0 = np.mod(l, N)
    # n * l0 can be large; reduce mod N before the exponential
    phase = np.exp(2j * np.pi * np.mod(n * l0, N) / N)
    out = phase * X.fundamental[k0, l0]
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class QuasiPeriodicArray:
    """DD array stored on its ``M x N`` fundamental domain."""

    grid: GridParams
    fundamental: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "fundamental", _frozen(self.fundamental, (self.grid.M, self.grid.N))
        )

    def at(self, k, l):
        return qp_eval(self, k, l)

    @property
    def energy(self) -> float:
        return float(np.vdot(self.fundamental, self.fundamental).real)

    def scaled(self, c) -> "QuasiPeriodicArray":
        return QuasiPeriodicArray(self.grid, c * self.fundamental)

    def normalized(self, energy: float = 1.0) -> "QuasiPeriodicArray":
        """Rescale so that the fundamental-domain energy equals ``energy``."""
        e = self.energy
        if e == 0:
            raise ZeroSignal("cannot normalize an all-zero array")
        return self.scaled(math.sqrt(energy / e))

    def __add__(self, other: "QuasiPeriodicArray") -> "QuasiPeriodicArray":
        check_same_grid(self, other)
        return QuasiPeriodicArray(self.grid, self.fundamental + other.fundamental)

    def __sub__(self, other: "QuasiPeriodicArray") -> "QuasiPeriodicArray":
        check_same_grid(self, other)
        return QuasiPeriodicArray(self.grid, self.fundamental - other.fundamental)


def zeros_dd(grid: GridParams) -> QuasiPeriodicArray:
    return QuasiPeriodicArray(grid, np.zeros((grid.M, grid.N)))


def inner_product_qp(X: QuasiPeriodicArray, Y: QuasiPeriodicArray, offset=(0, 0)) -> complex:
    """Sum of ``X * conj(Y)`` over the ``M x N`` window starting at ``offset``."""
    grid = check_same_grid(X, Y)
    k = offset[0] + np.arange(grid.M)[:, None]
    l = offset[1] + np.arange(grid.N)[None, :]
    return complex(np.sum(qp_eval(X, k, l) * np.conj(qp_eval(Y, k, l))))


def papr(x: PeriodicSequence) -> float:
    """Peak-to-average power ratio over one period (linear, not dB)."""
    p = np.abs(x.samples) ** 2
    mean = p.mean()
    if mean == 0:
        raise ZeroSignal("PAPR of an all-zero sequence is undefined")
    return float(p.max() / mean)
