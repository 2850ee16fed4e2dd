"""Discrete Zak transform and the orthonormal TD/DD basis pair."""

from __future__ import annotations

import numpy as np

from .errors import IndexOutOfRange
from .grid import GridParams, PeriodicSequence, QuasiPeriodicArray


def dzt(x: PeriodicSequence, method: str = "fft") -> QuasiPeriodicArray:
    """Discrete Zak transform of an MN-periodic sequence.

    ``X[k, l] = N**-0.5 * sum_p x[k + pM] exp(-j 2 pi p l / N)`` on the
    fundamental domain.

    Parameters
    ----------
    x : PeriodicSequence
        Input sequence.
    method : {"fft", "direct"}
        ``"direct"`` evaluates the p-sum literally; ``"fft"`` runs an
        N-point FFT along p. Both agree to rounding.
    """
    grid = x.grid
    M, N = grid.M, grid.N
    # rows are p, columns are k: blocks[p, k] = x[k + pM]
    blocks = x.samples.reshape(N, M)
    if method == "fft":
        X = np.fft.fft(blocks, axis=0).T / np.sqrt(N)
    elif method == "direct":
        p = np.arange(N)
        l = np.arange(N)
        kernel = np.exp(-2j * np.pi * np.outer(p, l) / N)
        X = np.empty((M, N), dtype=np.complex128)
        for k in range(M):
            for li in range(N):
                X[k, li] = np.sum(blocks[:, k] * kernel[:, li])
        X /= np.sqrt(N)
    else:
        raise ValueError(f"unknown method {method!r}")
    return QuasiPeriodicArray(grid, X)


def idzt(X: QuasiPeriodicArray) -> PeriodicSequence:
    """Inverse DZT: ``x[k + pM] = N**-0.5 * sum_l X[k, l] exp(+j 2 pi p l / N)``."""
    N = X.grid.N
    blocks = np.fft.ifft(X.fundamental, axis=1) * np.sqrt(N)  # [k, p]
    return PeriodicSequence(X.grid, blocks.T.reshape(-1))


def _check_index(grid: GridParams, r: int, s: int):
    if not (0 <= r < grid.N and 0 <= s < grid.M):
        raise IndexOutOfRange(f"basis index (r={r}, s={s}) outside [0,{grid.N})x[0,{grid.M})")


def basis_td(grid: GridParams, r: int, s: int) -> PeriodicSequence:
    """TD basis sequence: a length-M tone on the r-th block of M samples."""
    _check_index(grid, r, s)
    M = grid.M
    v = np.zeros(grid.MN, dtype=np.complex128)
    n = np.arange(r * M, (r + 1) * M)
    v[n] = np.exp(2j * np.pi * s * n / M) / np.sqrt(M)
    return PeriodicSequence(grid, v)


def basis_dd(grid: GridParams, r: int, s: int) -> QuasiPeriodicArray:
    """DD image of :func:`basis_td` in closed form."""
    _check_index(grid, r, s)
    M, N = grid.M, grid.N
    k = np.arange(M)[:, None]
    l = np.arange(N)[None, :]
    # floor(k / M) vanishes on the fundamental domain
    V = np.exp(2j * np.pi * s * k / M) * np.exp(-2j * np.pi * r * l / N) / np.sqrt(grid.MN)
    return QuasiPeriodicArray(grid, V)


def basis_matrix(grid: GridParams) -> np.ndarray:
    """MN x MN matrix whose columns are the TD basis sequences, ordered (r, s)."""
    cols = [basis_td(grid, r, s).samples for r in range(grid.N) for s in range(grid.M)]
    return np.stack(cols, axis=1)
