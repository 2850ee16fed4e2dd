"""Quadratic-phase CAZAC sequences and their delay-Doppler images.

The general sequence is ``x[n] = exp(j 2 pi (alpha n^2 + beta n + gamma) / MN)``.
Named special cases:

* Zadoff-Chu of root ``u``: ``alpha = beta = u / 2``, ``gamma = 0``. Since
  ``MN`` is odd, ``u / 2`` is taken as ``u * inv(2) mod MN``, which equals the
  ordinary quotient for even ``u``.
* Gaussian: ``gamma = 0``.
* Wiener: ``beta = gamma = 0``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidAlpha
from .grid import GridParams, PeriodicSequence, QuasiPeriodicArray

FAMILIES = ("general", "zadoff-chu", "gaussian", "wiener")


@dataclass(frozen=True)
class CazacParams:
    alpha: int
    beta: int
    gamma: int
    grid: GridParams

    def __post_init__(self):
        MN = self.grid.MN
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, int(getattr(self, name)) % MN)
        if (2 * self.alpha) % MN == 0:
            raise InvalidAlpha(f"2*alpha must be nonzero mod {MN}, got alpha={self.alpha}")

    @property
    def has_zac(self) -> bool:
        """Zero autocorrelation holds exactly when ``gcd(2 alpha, MN) = 1``.

        ``2 alpha != 0 (mod MN)`` alone is not enough: with ``g = gcd(alpha, MN) > 1``
        the lag ``MN / g`` correlates perfectly.
        """
        return math.gcd(2 * self.alpha, self.grid.MN) == 1

    @property
    def line_slope(self) -> int:
        """Slope ``2 alpha mod MN`` of the self-ambiguity support line."""
        return (2 * self.alpha) % self.grid.MN


@dataclass(frozen=True)
class CazacFamily:
    tag: str
    resolved: CazacParams
    root: int | None = None


def resolve_family(tag: str, grid: GridParams, *, u=None, alpha=None, beta=0, gamma=0) -> CazacFamily:
    """Resolve a named CAZAC family into concrete ``(alpha, beta, gamma)``.

    Examples
    --------
    >>> from zakwave import make_grid
    >>> g = make_grid(31, 37, 30e3)
    >>> resolve_family("zadoff-chu", g, u=14).resolved.alpha
    7
    """
    MN = grid.MN
    if tag == "zadoff-chu":
        if u is None:
            raise ValueError("Zadoff-Chu needs a root u")
        a = (int(u) * pow(2, -1, MN)) % MN
        return CazacFamily(tag, CazacParams(a, a, 0, grid), root=int(u))
    if alpha is None:
        raise ValueError(f"family {tag!r} needs alpha")
    if tag == "general":
        return CazacFamily(tag, CazacParams(alpha, beta, gamma, grid))
    if tag == "gaussian":
        return CazacFamily(tag, CazacParams(alpha, beta, 0, grid))
    if tag == "wiener":
        return CazacFamily(tag, CazacParams(alpha, 0, 0, grid))
    raise ValueError(f"unknown CAZAC family {tag!r}; expected one of {FAMILIES}")


def _phase_int(p: CazacParams, n: np.ndarray) -> np.ndarray:
    MN = p.grid.MN
    n = np.mod(n, MN).astype(np.int64)
    return (p.alpha * (n * n % MN) + p.beta * n + p.gamma) % MN


def cazac_td(p: CazacParams) -> PeriodicSequence:
    MN = p.grid.MN
    n = np.arange(MN)
    return PeriodicSequence(p.grid, np.exp(2j * np.pi * _phase_int(p, n) / MN))


def cazac_dd(p: CazacParams) -> QuasiPeriodicArray:
    """Closed-form DD array of :func:`cazac_td`, evaluated term by term."""
    grid = p.grid
    M, N, MN = grid.M, grid.N, grid.MN
    k = np.arange(M, dtype=np.int64)[:, None, None]
    l = np.arange(N, dtype=np.int64)[None, :, None]
    pp = np.arange(N, dtype=np.int64)[None, None, :]
    t = k + pp * M
    expo = (p.alpha * (t * t % MN) + pp * M * np.mod(p.beta - l, MN)) % MN
    inner = np.exp(2j * np.pi * expo / MN).sum(axis=2)
    lead = np.exp(2j * np.pi * ((p.gamma + k[:, :, 0] * p.beta) % MN) / MN)
    return QuasiPeriodicArray(grid, lead * inner / np.sqrt(N))


def periodic_autocorrelation(x: PeriodicSequence) -> np.ndarray:
    """``(1/MN) sum_n x[n+k] conj(x[n])`` for every lag ``k`` by direct summation."""
    s = x.samples
    MN = s.size
    idx = (np.arange(MN)[:, None] + np.arange(MN)[None, :]) % MN
    return (s[idx] * np.conj(s)[None, :]).sum(axis=1) / MN


def verify_ca(x: PeriodicSequence, tol: float = 1e-10) -> bool:
    return bool(np.max(np.abs(np.abs(x.samples) - 1.0)) <= tol)


def verify_zac(x: PeriodicSequence, tol: float = 1e-10) -> bool:
    r = periodic_autocorrelation(x)
    return bool(abs(r[0] - 1.0) <= tol and np.max(np.abs(r[1:]), initial=0.0) <= tol)


def write_sequence_csv(x: PeriodicSequence, path) -> None:
    """Write one period as CSV with columns ``n, re, im``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "re", "im"])
        for n, v in enumerate(x.samples):
            w.writerow([n, repr(float(v.real)), repr(float(v.imag))])
