"""Discrete ambiguity functions in the time and delay-Doppler domains.

Both surfaces are evaluated on ``(k, l) in [0, MN)^2``; they are exactly
MN-periodic in each axis. The DD ambiguity of two DZT images equals the TD
ambiguity of the underlying sequences, which gives an ``O((MN)^2 log MN)``
route for large grids. The literal double sum is kept for small grids and
serves as the oracle for the fast route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cazac import CazacParams
from .constellation import Constellation, qam
from .errors import BadModulus, EmptyTrialSet
from .grid import GridParams, PeriodicSequence, QuasiPeriodicArray, check_same_grid, qp_eval
from .zak import idzt

# grids up to this MN use the literal double sum when method="auto"
DIRECT_MAX_MN = 225


@dataclass(frozen=True, eq=False)
class AmbiguitySurface:
    grid: GridParams
    values: np.ndarray = field(repr=False)

    def __call__(self, k, l):
        MN = self.grid.MN
        return self.values[np.mod(k, MN), np.mod(l, MN)]

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


def td_ambiguity(x: PeriodicSequence, y: PeriodicSequence, method: str = "fft") -> AmbiguitySurface:
    """TD cross-ambiguity ``(1/MN) sum_n x[k+n] conj(y[n]) exp(-j 2 pi n l / MN)``."""
    grid = check_same_grid(x, y)
    MN = grid.MN
    n = np.arange(MN)
    # rows indexed by k: x[k + n] * conj(y[n])
    Z = x.samples[(n[:, None] + n[None, :]) % MN] * np.conj(y.samples)[None, :]
    if method == "fft":
        A = np.fft.fft(Z, axis=1) / MN
    elif method == "direct":
        E = np.exp(-2j * np.pi * (np.outer(n, n) % MN) / MN)
        A = Z @ E / MN
    else:
        raise ValueError(f"unknown method {method!r}")
    return AmbiguitySurface(grid, A)


def td_ambiguity_rows(x: np.ndarray, y: np.ndarray, ks) -> np.ndarray:
    """Selected delay rows of the TD ambiguity of raw sample vectors.

    ``x`` may be 1-D or a stack ``(B, MN)``; the result has shape
    ``(..., len(ks), MN)``.
    """
    x = np.asarray(x)
    MN = x.shape[-1]
    n = np.arange(MN)
    idx = (np.asarray(ks, dtype=np.int64)[:, None] + n[None, :]) % MN
    Z = x[..., idx] * np.conj(y)
    return np.fft.fft(Z, axis=-1) / MN


def _shift_kernel(Y: QuasiPeriodicArray, k, l) -> np.ndarray:
    """``conj(Y[k'-k, l'-l]) exp(-j 2 pi (k'-k) l / MN)`` over the fundamental window.

    ``k`` and ``l`` are 1-D arrays of equal length; the result has shape
    ``(len(k), M, N)``.
    """
    grid = Y.grid
    M, N, MN = grid.M, grid.N, grid.MN
    k = np.asarray(k, dtype=np.int64)[:, None, None]
    l = np.asarray(l, dtype=np.int64)[:, None, None]
    kp = np.arange(M)[None, :, None]
    lp = np.arange(N)[None, None, :]
    Yv = qp_eval(Y, kp - k, lp - l)
    return np.conj(Yv) * np.exp(-2j * np.pi * np.mod((kp - k) * l, MN) / MN)


def dd_ambiguity_at(X: QuasiPeriodicArray, Y: QuasiPeriodicArray, k, l) -> np.ndarray:
    """Literal DD cross-ambiguity at the given points (any integers)."""
    grid = check_same_grid(X, Y)
    k = np.atleast_1d(np.asarray(k, dtype=np.int64))
    l = np.atleast_1d(np.asarray(l, dtype=np.int64))
    k, l = np.broadcast_arrays(k, l)
    K = _shift_kernel(Y, k.ravel(), l.ravel())
    vals = np.einsum("pmn,mn->p", K, X.fundamental) / grid.MN
    return vals.reshape(k.shape)


def dd_ambiguity(X: QuasiPeriodicArray, Y: QuasiPeriodicArray, method: str = "auto") -> AmbiguitySurface:
    """DD cross-ambiguity surface on ``[0, MN)^2``.

    Parameters
    ----------
    method : {"auto", "direct", "fft"}
        ``"direct"`` evaluates the double sum over the fundamental window;
        ``"fft"`` maps both arrays back to TD and uses :func:`td_ambiguity`.
    """
    grid = check_same_grid(X, Y)
    if method == "auto":
        method = "direct" if grid.MN <= DIRECT_MAX_MN else "fft"
    if method == "fft":
        return td_ambiguity(idzt(X), idzt(Y), method="fft")
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    MN = grid.MN
    A = np.empty((MN, MN), dtype=np.complex128)
    ls = np.arange(MN)
    for k in range(MN):
        A[k] = dd_ambiguity_at(X, Y, np.full(MN, k), ls)
    return AmbiguitySurface(grid, A)


def self_af_closed_form(p: CazacParams, k: int, l: int) -> complex:
    """Closed-form DD self-ambiguity of :func:`cazac_dd` at ``(k, l)``."""
    MN = p.grid.MN
    k, l = int(k), int(l)
    if (2 * p.alpha * k - l) % MN:
        return 0j
    return complex(np.exp(2j * np.pi * ((l * k + k * p.beta - p.alpha * k * k) % MN) / MN))


def line_support_mask(p: CazacParams) -> np.ndarray:
    """Boolean ``MN x MN`` mask of ``2 alpha k - l = 0 mod MN``."""
    MN = p.grid.MN
    k = np.arange(MN)[:, None]
    l = np.arange(MN)[None, :]
    return (2 * p.alpha * k - l) % MN == 0


@dataclass(frozen=True)
class FlatnessReport:
    eligible: bool
    magnitude: float | None
    gcd: int


def cross_af_flatness(p: CazacParams, q: CazacParams) -> FlatnessReport:
    """Predict whether the DD cross-ambiguity of two CAZAC arrays is flat.

    The pair is eligible when ``alpha_p - alpha_q`` is coprime to ``MN``;
    the flat level is then ``1 / sqrt(MN)``.
    """
    grid = check_same_grid(p, q)
    g = math.gcd((p.alpha - q.alpha) % grid.MN, grid.MN)
    if g == 1:
        return FlatnessReport(True, 1.0 / math.sqrt(grid.MN), g)
    return FlatnessReport(False, None, g)


@dataclass(frozen=True)
class UnbiasednessReport:
    mean_sq_cross: float
    std_err: float
    trials: int
    psi: int
    target: float

    @property
    def z_score(self) -> float:
        d = self.mean_sq_cross - self.target
        if self.std_err == 0.0:
            # constant-modulus data against a point pilot has no spread at all
            return 0.0 if abs(d) <= 1e-12 * self.target else math.copysign(math.inf, d)
        return d / self.std_err


def unbiasedness_stat(
    X: QuasiPeriodicArray,
    constellation: Constellation | None = None,
    trials: int = 1000,
    rng_seed: int = 0,
    n_probes: int = 16,
    batch: int = 4096,
) -> UnbiasednessReport:
    """Monte-Carlo estimate of ``E |A_{D,X}[k,l]|^2`` for random data frames ``D``.

    Each trial draws i.i.d. symbols on the fundamental grid and evaluates the
    cross-ambiguity against ``X`` at ``n_probes`` fixed random points. The
    ensemble value is ``1/MN`` when ``X`` has unit average cell energy.
    """
    if trials <= 0:
        raise EmptyTrialSet("unbiasedness statistic needs at least one trial")
    const = constellation if constellation is not None else qam(4)
    const.check_unit_energy()
    grid = X.grid
    M, N, MN = grid.M, grid.N, grid.MN
    rng = np.random.default_rng(rng_seed)
    pk = rng.integers(0, MN, n_probes)
    pl = rng.integers(0, MN, n_probes)
    S = _shift_kernel(X, pk, pl).reshape(n_probes, MN)
    per_trial = np.empty(trials)
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        D = const.random_symbols(rng, (b, MN))
        A = D @ S.T / MN
        per_trial[done:done + b] = np.mean(np.abs(A) ** 2, axis=1)
        done += b
    mean = float(per_trial.mean())
    se = float(per_trial.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("inf")
    psi = pow(4 * M % N, -1, N) if N > 1 else 0
    return UnbiasednessReport(mean, se, trials, psi, 1.0 / MN)


def gauss_sum_magnitude(a: int, N: int) -> float:
    """``|sum_{n<N} exp(j 2 pi a n^2 / N)|`` for odd ``N`` and ``gcd(a, N) = 1``."""
    a, N = int(a), int(N)
    if N < 1 or N % 2 == 0 or math.gcd(a, N) != 1:
        raise BadModulus(f"need odd N and gcd(a, N) = 1, got a={a}, N={N}")
    n = np.arange(N, dtype=np.int64)
    return float(abs(np.exp(2j * np.pi * (a * n * n % N) / N).sum()))


def roots_of_unity_sum(k: int, N: int) -> complex:
    """Direct ``sum_{n<N} exp(j 2 pi k n / N)``."""
    n = np.arange(N, dtype=np.int64)
    return complex(np.exp(2j * np.pi * (int(k) * n % N) / N).sum())


def write_surface_csv(surface: AmbiguitySurface, path) -> None:
    """CSV with header ``k,l,mag,phase``, row-major in ``k`` then ``l``."""
    A = surface.values
    mag = np.abs(A)
    ph = np.angle(A)
    with open(path, "w", newline="") as fh:
        fh.write("k,l,mag,phase\n")
        MN = A.shape[0]
        for k in range(MN):
            fh.writelines(
                f"{k},{l},{mag[k, l]:.12e},{ph[k, l]:.12e}\n" for l in range(A.shape[1])
            )
