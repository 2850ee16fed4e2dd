"""Doubly-spread channel simulation on the Zak grid.

Physical paths ``(h_i, tau_i, nu_i)`` are imaged onto the information lattice
by sampling a root-raised-cosine (RRC) pulse in delay and in Doppler. The
resulting finite tap map acts on DD frames by MN-periodic twisted
convolution, so the whole link is a discrete DD system model. The TX/RX
filter details of a real Zak-OTFS modem are abstracted into these taps.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .constellation import Constellation, DataFrame, qam
from .errors import BadPdr, EmptyProfile, EmptyTrialSet, GridMismatch, SpreadTooLarge
from .grid import GridParams, PeriodicSequence, QuasiPeriodicArray, check_same_grid
from .spread import twisted_conv_points
from .zak import dzt, idzt

VEH_A_DELAYS_NS = (0.0, 310.0, 710.0, 1090.0, 1730.0, 2510.0)
VEH_A_POWERS_DB = (0.0, -1.0, -9.0, -10.0, -15.0, -20.0)


@dataclass(frozen=True)
class ChannelConfig:
    delays_ns: tuple = VEH_A_DELAYS_NS
    powers_db: tuple = VEH_A_POWERS_DB
    nu_max: float = 6000.0
    use_profile: bool = True  # False: equal-power paths before normalization
    seed: int = 0

    def __post_init__(self):
        if len(self.delays_ns) == 0:
            raise EmptyProfile("channel profile has no paths")
        if len(self.delays_ns) != len(self.powers_db):
            raise ValueError("delays_ns and powers_db must have equal length")
        if self.nu_max < 0:
            raise ValueError(f"nu_max must be >= 0, got {self.nu_max}")

    @property
    def num_paths(self) -> int:
        return len(self.delays_ns)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    gains: np.ndarray
    delays: np.ndarray  # seconds
    dopplers: np.ndarray  # Hz
    angles: np.ndarray  # radians

    @property
    def num_paths(self) -> int:
        return self.gains.size


@dataclass(frozen=True)
class PulseShapeConfig:
    beta_tau: float = 0.6
    beta_nu: float = 0.6
    tap_halfwidth: int = 8

    def __post_init__(self):
        for b in (self.beta_tau, self.beta_nu):
            if not 0.0 <= b <= 1.0:
                raise ValueError(f"roll-off must lie in [0, 1], got {b}")
        if self.tap_halfwidth < 1:
            raise ValueError("tap_halfwidth must be >= 1")


def sample_channel(cfg: ChannelConfig, rng: np.random.Generator | None = None) -> ChannelRealization:
    """Draw path gains and Dopplers; gains are normalized to unit total power."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    P = cfg.num_paths
    if cfg.use_profile:
        power = 10.0 ** (np.asarray(cfg.powers_db, dtype=float) / 10.0)
    else:
        power = np.ones(P)
    g = (rng.standard_normal(P) + 1j * rng.standard_normal(P)) * np.sqrt(power / 2)
    g /= np.linalg.norm(g)
    theta = rng.uniform(-np.pi, np.pi, P)
    nu = cfg.nu_max * np.cos(theta)
    tau = np.asarray(cfg.delays_ns, dtype=float) * 1e-9
    return ChannelRealization(g, tau, nu, theta)


def rrc(t, beta: float) -> np.ndarray:
    """Root-raised-cosine impulse response with unit symbol period."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    at0 = np.isclose(t, 0.0, atol=1e-12)
    out[at0] = 1.0 - beta + 4.0 * beta / np.pi
    if beta > 0:
        sing = np.isclose(np.abs(t), 1.0 / (4.0 * beta), atol=1e-9) & ~at0
        a = np.pi / (4.0 * beta)
        out[sing] = beta / np.sqrt(2) * ((1 + 2 / np.pi) * np.sin(a) + (1 - 2 / np.pi) * np.cos(a))
    else:
        sing = np.zeros_like(at0)
    rest = ~(at0 | sing)
    tr = t[rest]
    num = np.sin(np.pi * tr * (1 - beta)) + 4 * beta * tr * np.cos(np.pi * tr * (1 + beta))
    den = np.pi * tr * (1 - (4 * beta * tr) ** 2)
    out[rest] = num / den
    return out


def _rrc_taps(offset: float, idx: np.ndarray, beta: float, halfwidth: int) -> np.ndarray:
    d = idx - offset
    v = np.where(np.abs(d) <= halfwidth, rrc(d, beta), 0.0)
    return v / np.linalg.norm(v)


@dataclass(frozen=True, eq=False)
class EffectiveChannel:
    """Finite tap map on the information lattice.

    ``taps[i, j]`` is the coefficient at ``(k_lo + i, l_lo + j)``.
    """

    grid: GridParams
    taps: np.ndarray = field(repr=False)
    k_lo: int = 0
    l_lo: int = 0

    @classmethod
    def from_points(cls, grid, ks, ls, values) -> "EffectiveChannel":
        ks = np.asarray(ks, dtype=int)
        ls = np.asarray(ls, dtype=int)
        if ks.size == 0:
            return cls(grid, np.zeros((1, 1), dtype=np.complex128))
        k_lo, l_lo = int(ks.min()), int(ls.min())
        T = np.zeros((ks.max() - k_lo + 1, ls.max() - l_lo + 1), dtype=np.complex128)
        np.add.at(T, (ks - k_lo, ls - l_lo), np.asarray(values, dtype=np.complex128))
        return cls(grid, T, k_lo, l_lo)

    @classmethod
    def identity(cls, grid) -> "EffectiveChannel":
        return cls(grid, np.ones((1, 1), dtype=np.complex128))

    def points(self):
        i, j = np.nonzero(self.taps)
        return i + self.k_lo, j + self.l_lo, self.taps[i, j]

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.taps) ** 2))

    def tap(self, k: int, l: int) -> complex:
        i, j = k - self.k_lo, l - self.l_lo
        if 0 <= i < self.taps.shape[0] and 0 <= j < self.taps.shape[1]:
            return complex(self.taps[i, j])
        return 0j

    def kernel(self) -> np.ndarray:
        """The taps periodized onto one ``MN x MN`` period."""
        MN = self.grid.MN
        K = np.zeros((MN, MN), dtype=np.complex128)
        ks, ls, v = self.points()
        np.add.at(K, (ks % MN, ls % MN), v)
        return K

    @functools.cached_property
    def _td_operator(self) -> sp.csr_matrix:
        MN = self.grid.MN
        n = np.arange(MN)
        ks, ls, v = self.points()
        delays = np.unique(ks)
        if delays.size == 0:
            return sp.csr_matrix((MN, MN), dtype=np.complex128)
        # row a of C holds the Doppler taps of delay a on [0, MN); its inverse
        # DFT gives sum_b h[a, b] exp(j 2 pi b m / MN) for every m
        C = np.zeros((delays.size, MN), dtype=np.complex128)
        np.add.at(C, (np.searchsorted(delays, ks), ls % MN), v)
        C = np.fft.ifft(C, axis=1) * MN
        cols = (n[None, :] - delays[:, None]) % MN
        vals = np.take_along_axis(C, cols, axis=1)
        rows = np.broadcast_to(n, cols.shape)
        return sp.csr_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=(MN, MN))

    def td_operator(self) -> sp.csr_matrix:
        """Sparse ``MN x MN`` matrix of the channel acting on TD samples.

        A twisted shift by ``(a, b)`` in DD is ``x[n - a] exp(j 2 pi b (n - a) / MN)``
        in TD, so the operator only has one band per delay tap. The matrix
        is built once per channel and cached.
        """
        return self._td_operator


def effective_channel(ch: ChannelRealization, grid: GridParams, ps: PulseShapeConfig | None = None) -> EffectiveChannel:
    """Sample each path through RRC pulses in delay and Doppler and sum."""
    ps = ps or PulseShapeConfig()
    kt = ch.delays / grid.delay_res
    lt = ch.dopplers / grid.doppler_res
    w = ps.tap_halfwidth
    k_lo = int(math.floor(kt.min())) - w
    k_hi = int(math.ceil(kt.max())) + w
    l_lo = int(math.floor(lt.min())) - w
    l_hi = int(math.ceil(lt.max())) + w
    if max(-k_lo, k_hi) > grid.M / 2 or max(-l_lo, l_hi) > grid.N / 2:
        raise SpreadTooLarge(
            f"tap window k in [{k_lo},{k_hi}], l in [{l_lo},{l_hi}] exceeds half a period "
            f"({grid.M / 2}, {grid.N / 2})"
        )
    K = np.arange(k_lo, k_hi + 1)
    L = np.arange(l_lo, l_hi + 1)
    T = np.zeros((K.size, L.size), dtype=np.complex128)
    for h, kk, ll in zip(ch.gains, kt, lt):
        T += h * np.outer(_rrc_taps(kk, K, ps.beta_tau, w), _rrc_taps(ll, L, ps.beta_nu, w))
    return EffectiveChannel(grid, T, k_lo, l_lo)


def apply_channel(h: EffectiveChannel, frame: QuasiPeriodicArray, method: str = "td") -> QuasiPeriodicArray:
    """Twisted convolution of the periodized taps with ``frame``.

    ``method="td"`` applies the banded time-domain operator, ``"direct"``
    sums the twisted shifts on the DD grid.
    """
    if h.grid != frame.grid:
        raise GridMismatch("channel and frame grids differ")
    if method == "td":
        return dzt(PeriodicSequence(frame.grid, h.td_operator() @ idzt(frame).samples))
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    ks, ls, v = h.points()
    return twisted_conv_points(ks, ls, v, frame)


def tap_power_prior(cfg: ChannelConfig, grid: GridParams, ps: PulseShapeConfig | None = None,
                    trials: int = 300, rng: np.random.Generator | None = None) -> dict:
    """Monte-Carlo mean of ``|h[k, l]|^2`` over channel draws, keyed by ``(k, l)``."""
    if trials <= 0:
        raise EmptyTrialSet("tap prior needs at least one channel draw")
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    acc = {}
    for _ in range(trials):
        h = effective_channel(sample_channel(cfg, rng), grid, ps)
        ks, ls, v = h.points()
        for k, l, p in zip(ks.tolist(), ls.tolist(), (np.abs(v) ** 2).tolist()):
            acc[(k, l)] = acc.get((k, l), 0.0) + p / trials
    return acc


@dataclass(frozen=True, eq=False)
class FrameConfig:
    pilot: QuasiPeriodicArray  # unit energy over the fundamental domain
    pdr: float = 1.0
    rho_d_db: float = 25.0
    constellation: Constellation = field(default_factory=qam)

    def __post_init__(self):
        if not self.pdr > 0:
            raise BadPdr(f"pilot-to-data ratio must be positive, got {self.pdr}")

    def energies(self) -> tuple[float, float]:
        """Total pilot and data energy; they sum to MN."""
        MN = self.pilot.grid.MN
        e_p = MN * self.pdr / (1.0 + self.pdr)
        return e_p, MN - e_p

    @property
    def data_scale(self) -> float:
        return math.sqrt(self.energies()[1] / self.pilot.grid.MN)

    def scaled_pilot(self) -> QuasiPeriodicArray:
        return self.pilot.normalized(self.energies()[0])

    def noise_variance(self) -> float:
        """Per-cell noise variance giving data SNR ``rho_d_db``."""
        return noise_variance(self.rho_d_db, self.energies()[1], self.pilot.grid.MN)


def assemble_frame(data: DataFrame, fc: FrameConfig) -> QuasiPeriodicArray:
    """Superimpose the scaled pilot and the scaled data grid."""
    check_same_grid(data, fc.pilot)
    return fc.scaled_pilot() + data.as_array().scaled(fc.data_scale)


def noise_variance(snr_db: float, signal_ref_energy: float, MN: int) -> float:
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return signal_ref_energy / (MN * 10.0 ** (snr_db / 10.0))


def add_noise(y: QuasiPeriodicArray, snr_db: float, signal_ref_energy: float, rng: np.random.Generator):
    """Add circular complex Gaussian noise; returns ``(noisy, sigma2)``."""
    grid = y.grid
    s2 = noise_variance(snr_db, signal_ref_energy, grid.MN)
    if s2 == 0.0:
        return y, 0.0
    w = rng.standard_normal((grid.M, grid.N)) + 1j * rng.standard_normal((grid.M, grid.N))
    return QuasiPeriodicArray(grid, y.fundamental + np.sqrt(s2 / 2) * w), s2


def multiuser_superpose(users, rng: np.random.Generator, snr_db: float, signal_ref_energy: float | None = None):
    """Sum of per-user channel outputs plus noise; returns ``(y, sigma2)``.

    ``users`` is a sequence of ``(preamble, channel)`` pairs. The noise
    reference defaults to unit average cell energy (``MN``).
    """
    users = list(users)
    if not users:
        raise ValueError("need at least one user")
    grid = check_same_grid(*[u[0] for u in users])
    acc = np.zeros((grid.M, grid.N), dtype=np.complex128)
    for pre, ch in users:
        acc += apply_channel(ch, pre).fundamental
    ref = grid.MN if signal_ref_energy is None else signal_ref_energy
    return add_noise(QuasiPeriodicArray(grid, acc), snr_db, ref, rng)
