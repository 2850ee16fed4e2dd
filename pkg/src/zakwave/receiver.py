"""Pilot-based channel sensing, MMSE data detection, turbo iterations and
one-step-thresholding (OST) preamble detection.

Channel taps are read off the cross-ambiguity between the received frame and
the transmitted pilot. A spread pilot's self-ambiguity is supported on a set
``S`` of shifts (a line for CAZAC pilots), so taps that differ by an element
of ``S`` are indistinguishable from the pilot alone. A sensing region must
therefore hold at most one point of every coset; :class:`SensingRegion`
checks this against the pilot's support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .ambiguity import td_ambiguity_rows
from .channel import EffectiveChannel, apply_channel
from .constellation import Constellation, DataFrame
from .errors import EmptyDictionary, RegionAliased, SingularChannel
from .grid import PeriodicSequence, QuasiPeriodicArray, check_same_grid
from .zak import dzt, idzt


@dataclass(frozen=True, eq=False)
class SensingRegion:
    """Set of DD shifts ``(k, l)`` on which channel taps are estimated."""

    ks: np.ndarray
    ls: np.ndarray

    def __post_init__(self):
        ks = np.asarray(self.ks, dtype=int).ravel()
        ls = np.asarray(self.ls, dtype=int).ravel()
        if ks.shape != ls.shape:
            raise ValueError("ks and ls must have the same length")
        object.__setattr__(self, "ks", ks)
        object.__setattr__(self, "ls", ls)

    def __len__(self):
        return self.ks.size

    @classmethod
    def rectangle(cls, k_max: int, l_max: int, k_min: int = 0) -> "SensingRegion":
        k, l = np.meshgrid(np.arange(k_min, k_max + 1), np.arange(-l_max, l_max + 1), indexing="ij")
        return cls(k.ravel(), l.ravel())

    @classmethod
    def from_prior(cls, power: dict, MN: int, support, size: int) -> "SensingRegion":
        """Pick, per coset of ``support``, the point of largest prior tap power.

        ``power`` maps ``(k, l)`` to expected ``|h[k, l]|^2``. Points are taken
        greedily by decreasing power while they do not alias with a point
        already chosen; at most ``size`` points are kept.
        """
        sup = _support_set(support, MN)
        chosen = []
        for (k, l), _ in sorted(power.items(), key=lambda kv: -kv[1]):
            if len(chosen) >= size:
                break
            if all(((k - a) % MN, (l - b) % MN) not in sup for a, b in chosen):
                chosen.append((k, l))
        ks, ls = zip(*chosen)
        return cls(np.array(ks), np.array(ls))

    def aliased_pairs(self, support, MN: int) -> list:
        """Pairs of region points whose difference lies in ``support``."""
        sup = _support_set(support, MN)
        pts = list(zip(self.ks.tolist(), self.ls.tolist()))
        bad = []
        for i, (k1, l1) in enumerate(pts):
            for k2, l2 in pts[i + 1:]:
                if ((k1 - k2) % MN, (l1 - l2) % MN) in sup:
                    bad.append(((k1, l1), (k2, l2)))
        return bad

    def check(self, support, MN: int) -> None:
        bad = self.aliased_pairs(support, MN)
        if bad:
            raise RegionAliased(f"{len(bad)} region point pairs alias under the pilot, e.g. {bad[0]}")


def _support_set(support, MN: int) -> set:
    s = {(int(k) % MN, int(l) % MN) for k, l in support}
    s.discard((0, 0))
    return s


def pilot_support(pilot: QuasiPeriodicArray, rel: float = 0.5) -> list:
    """Shifts where the pilot's self-ambiguity reaches ``rel`` of its peak."""
    x = idzt(pilot).samples
    MN = pilot.grid.MN
    A = np.abs(td_ambiguity_rows(x, x, np.arange(MN)))
    k, l = np.nonzero(A >= rel * A[0, 0])
    return list(zip(k.tolist(), l.tolist()))


def line_support(slope: int, MN: int) -> list:
    """Support ``{(k, slope*k mod MN)}`` of a CAZAC self-ambiguity."""
    return [(k, (slope * k) % MN) for k in range(MN)]


def _readoff(y_td: np.ndarray, ref_td: np.ndarray, region: SensingRegion, MN: int) -> np.ndarray:
    vals = np.empty(len(region), dtype=np.complex128)
    uk = np.unique(region.ks)
    rows = td_ambiguity_rows(y_td, ref_td, uk)
    for i, k in enumerate(uk):
        sel = region.ks == k
        vals[sel] = rows[i, region.ls[sel] % MN]
    return vals


def estimate_channel(
    y: QuasiPeriodicArray,
    pilot: QuasiPeriodicArray,
    region: SensingRegion,
    pilot_energy: float | None = None,
    support=None,
) -> EffectiveChannel:
    """Read channel taps off ``A_{y,pilot}`` on ``region``.

    ``h[k, l] = MN / E_p * A_{y,pilot}[k, l]``. ``support`` is the pilot's
    self-ambiguity support; when omitted it is computed from ``pilot``
    (an ``MN x MN`` FFT surface).
    """
    grid = check_same_grid(y, pilot)
    MN = grid.MN
    if support is None:
        support = pilot_support(pilot)
    region.check(support, MN)
    e_p = pilot.energy if pilot_energy is None else pilot_energy
    vals = _readoff(idzt(y).samples, idzt(pilot).samples, region, MN) * MN / e_p
    return EffectiveChannel.from_points(grid, region.ks, region.ls, vals)


def shift_dictionary_td(ref_td: np.ndarray, ks, ls) -> np.ndarray:
    """Columns are TD images of the twisted shifts of ``ref`` by ``(k, l)``."""
    MN = ref_td.size
    n = np.arange(MN)
    ks = np.asarray(ks)
    ls = np.asarray(ls)
    idx = (n[:, None] - ks[None, :]) % MN
    phase = np.exp(2j * np.pi * np.mod(ls[None, :] * (n[:, None] - ks[None, :]), MN) / MN)
    return ref_td[idx] * phase


def estimate_channel_joint(
    y: QuasiPeriodicArray,
    reference: QuasiPeriodicArray,
    region: SensingRegion,
    sigma2: float,
) -> EffectiveChannel:
    """Ridge least-squares taps on ``region`` given a known full frame.

    Used once data decisions are available: pilot plus re-modulated data
    break the pilot's coset ambiguity, so ``region`` need not be alias-free.
    """
    grid = check_same_grid(y, reference)
    Phi = shift_dictionary_td(idzt(reference).samples, region.ks, region.ls)
    G = Phi.conj().T @ Phi
    G[np.diag_indices_from(G)] += max(sigma2, 1e-12)
    h = np.linalg.solve(G, Phi.conj().T @ idzt(y).samples)
    return EffectiveChannel.from_points(grid, region.ks, region.ls, h)


def mmse_equalize(h: EffectiveChannel, y: QuasiPeriodicArray, sigma2: float) -> QuasiPeriodicArray:
    """Linear MMSE estimate ``H^H (H H^H + sigma2 I)^-1 y`` for unit-power inputs.

    ``H`` is the twisted-convolution operator of ``h``. It is assembled in the
    time domain, where it is banded (one diagonal per delay tap); since the
    DZT is unitary the estimate equals the one computed in DD coordinates.
    """
    MN = h.grid.MN
    H = h.td_operator()
    G = (H @ H.conj().T + sigma2 * sp.identity(MN, format="csr")).tocsc()
    try:
        lu = spla.splu(G)
    except RuntimeError as exc:
        raise SingularChannel(f"H H^H + sigma2 I is singular (sigma2={sigma2})") from exc
    z = lu.solve(idzt(y).samples)
    if not np.all(np.isfinite(z)):
        raise SingularChannel("MMSE solve produced non-finite values")
    return dzt(PeriodicSequence(h.grid, H.conj().T @ z))


def twisted_conv_matrix(h: EffectiveChannel) -> np.ndarray:
    """Dense DD operator (row-major ``k * N + l`` ordering); small grids only."""
    grid = h.grid
    MN = grid.MN
    H = np.empty((MN, MN), dtype=np.complex128)
    for j in range(MN):
        e = np.zeros(MN, dtype=np.complex128)
        e[j] = 1.0
        H[:, j] = apply_channel(h, QuasiPeriodicArray(grid, e)).fundamental.ravel()
    return H


def detect_data(
    y: QuasiPeriodicArray,
    h: EffectiveChannel,
    pilot_scaled: QuasiPeriodicArray | None,
    sigma2: float,
    constellation: Constellation,
    data_scale: float = 1.0,
) -> DataFrame:
    """Cancel the pilot through ``h``, MMSE-equalize and slice."""
    grid = check_same_grid(y, h)
    r = y if pilot_scaled is None else y - apply_channel(h, pilot_scaled)
    z = mmse_equalize(h, r.scaled(1.0 / data_scale), sigma2 / data_scale ** 2)
    return DataFrame(grid, constellation.slice(z.fundamental), constellation)


@dataclass
class TurboResult:
    h_est: list = field(default_factory=list)
    detected: list = field(default_factory=list)
    ber_trace: list = field(default_factory=list)


def turbo_loop(
    y: QuasiPeriodicArray,
    pilot_scaled: QuasiPeriodicArray,
    region: SensingRegion,
    iters: int,
    sigma2: float,
    constellation: Constellation,
    data_scale: float = 1.0,
    truth: DataFrame | None = None,
    refine_region: SensingRegion | None = None,
    mode: str = "joint",
    support=None,
) -> TurboResult:
    """Alternate channel sensing and data detection.

    Iteration 1 reads the channel off the pilot on ``region``. Later
    iterations use the previous decisions:

    * ``mode="joint"``: ridge LS on ``refine_region`` with pilot plus
      re-modulated data as the known reference.
    * ``mode="cancel"``: subtract the re-modulated data through the previous
      estimate and read off the pilot again on ``region``.
    """
    if iters < 1:
        raise ValueError("turbo_loop needs iters >= 1")
    if mode not in ("joint", "cancel"):
        raise ValueError(f"unknown turbo mode {mode!r}")
    grid = check_same_grid(y, pilot_scaled)
    MN = grid.MN
    if support is None:
        support = pilot_support(pilot_scaled)
    region.check(support, MN)
    refine_region = refine_region or region
    e_p = pilot_scaled.energy
    y_td = idzt(y).samples
    p_td = idzt(pilot_scaled).samples
    res = TurboResult()
    h = None
    for t in range(iters):
        if t == 0:
            vals = _readoff(y_td, p_td, region, MN) * MN / e_p
            h = EffectiveChannel.from_points(grid, region.ks, region.ls, vals)
        else:
            data = res.detected[-1].as_array().scaled(data_scale)
            if mode == "joint":
                h = estimate_channel_joint(y, pilot_scaled + data, refine_region, sigma2)
            else:
                r = y - apply_channel(h, data)
                vals = _readoff(idzt(r).samples, p_td, region, MN) * MN / e_p
                h = EffectiveChannel.from_points(grid, region.ks, region.ls, vals)
        det = detect_data(y, h, pilot_scaled, sigma2, constellation, data_scale)
        res.h_est.append(h)
        res.detected.append(det)
        if truth is not None:
            res.ber_trace.append(truth.bit_error_rate(det))
    return res


@dataclass
class DetectionReport:
    active_set: set
    statistics: np.ndarray
    threshold: float
    noise_level: float = 0.0

    def __post_init__(self):
        self.active_set = {i for i, s in enumerate(self.statistics) if s > self.threshold}


def ost_detect(
    y: QuasiPeriodicArray,
    dictionary,
    region: SensingRegion,
    sigma2: float,
    pfa_target: float = 1e-2,
    threshold_factor: float | None = None,
) -> DetectionReport:
    """One-step thresholding over a preamble dictionary.

    Each preamble is rescaled to unit average cell energy, so that for a
    preamble absent from ``y`` the value ``MN |A|^2 / s2`` is approximately
    unit exponential, where ``s2`` is the per-cell power of everything else
    in the frame. ``s2`` is taken as ``max(sigma2, |y|^2 / MN)``: with flat
    cross-ambiguity the other users look like extra white noise. The
    statistic is the peak of ``|A|^2`` over ``region`` and the threshold
    ``s2 * log(|region| / pfa_target) / MN`` (union bound over the region),
    unless a calibrated ``threshold_factor`` replaces the log term.
    """
    dictionary = list(dictionary)
    if not dictionary:
        raise EmptyDictionary("OST needs at least one candidate preamble")
    grid = check_same_grid(y, *dictionary)
    MN = grid.MN
    D = np.stack([idzt(d.normalized(MN)).samples for d in dictionary])
    y_td = idzt(y).samples
    uk = np.unique(region.ks)
    rows = td_ambiguity_rows(y_td, D[:, None, :], uk)  # (D, K, MN)
    stats = np.zeros(len(dictionary))
    for i, k in enumerate(uk):
        sel = region.ls[region.ks == k] % MN
        stats = np.maximum(stats, np.max(np.abs(rows[:, i, sel]) ** 2, axis=1))
    s2 = max(sigma2, float(np.vdot(y_td, y_td).real) / MN)
    factor = math.log(len(region) / pfa_target) if threshold_factor is None else threshold_factor
    return DetectionReport(set(), stats, s2 * factor / MN, s2)


def calibrate_threshold(
    dictionary,
    region: SensingRegion,
    sigma2: float,
    pfa_target: float,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """Empirical ``threshold_factor`` from noise-only frames."""
    dictionary = list(dictionary)
    grid = dictionary[0].grid
    vals = []
    for _ in range(trials):
        w = rng.standard_normal((grid.M, grid.N)) + 1j * rng.standard_normal((grid.M, grid.N))
        y = QuasiPeriodicArray(grid, np.sqrt(sigma2 / 2) * w)
        rep = ost_detect(y, dictionary, region, sigma2, pfa_target)
        vals.append(rep.statistics * grid.MN / rep.noise_level)
    return float(np.quantile(np.concatenate(vals), 1.0 - pfa_target))
