"""Experiment runners behind the ``zakwave`` command.

Each runner takes an :class:`ExperimentConfig`, writes CSV/JSON files into
``cfg.out`` and returns the JSON report as a dict. Reports echo the fully
resolved configuration. Every random draw comes from a generator seeded by
``(seed, ...indices)`` so reruns are byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import ambiguity as amb
from .cazac import CazacParams, cazac_dd, cazac_td, resolve_family, verify_ca, verify_zac
from .channel import (
    ChannelConfig,
    FrameConfig,
    PulseShapeConfig,
    add_noise,
    assemble_frame,
    apply_channel,
    effective_channel,
    sample_channel,
    tap_power_prior,
)
from .constellation import qam, random_data_frame
from .errors import EmptyTrialSet
from .grid import PeriodicSequence, QuasiPeriodicArray, make_grid, papr
from .receiver import SensingRegion, line_support, ost_detect, turbo_loop
from .spread import Cazac2DParams, PilotSpec, lattice_support, spread_pilot
from .zak import dzt, idzt

EXPERIMENTS = ("ambiguity", "isac", "rach", "verify")
RACH_FAMILIES = ("zadoff-chu", "gaussian", "wiener")

# per-experiment defaults for keys left unset (None)
_DEFAULTS = {
    "ambiguity": {"trials": 0, "nu_max": 0.0},
    "isac": {"trials": 200, "nu_max": 6000.0},
    "rach": {"trials": 1000, "nu_max": 815.0},
    "verify": {"trials": 1000, "nu_max": 0.0},
}


@dataclass
class ExperimentConfig:
    """Flat configuration shared by all experiments.

    Keys that only matter to one experiment are ignored by the others.
    ``trials`` and ``nu_max`` default per experiment when left as ``None``.
    """

    experiment: str = "verify"
    M: int = 31
    N: int = 37
    nu_p: float = 30e3
    seed: int = 0
    trials: int | None = None
    out: str = "out"
    # CAZAC sequence for `ambiguity`
    family: str = "zadoff-chu"
    u: int | None = 14
    alpha: int | None = None
    beta: int = 0
    gamma: int = 0
    # channel
    nu_max: float | None = None
    delays_ns: tuple = (0.0, 310.0, 710.0, 1090.0, 1730.0, 2510.0)
    powers_db: tuple = (0.0, -1.0, -9.0, -10.0, -15.0, -20.0)
    use_profile: bool = True
    beta_tau: float = 0.6
    beta_nu: float = 0.6
    tap_halfwidth: int = 8
    # isac
    pilot_u: int = 11
    pdr: tuple = (0.25, 1.0, 4.0)
    iters: int = 5
    rho_d_db: float = 25.0
    qam_order: int = 4
    prior_trials: int = 300
    region_size: int = 60
    joint_size: int = 200
    # rach
    snr_db: tuple = (-25.0, -20.0, -15.0, -10.0, -5.0, 0.0)
    families: tuple = RACH_FAMILIES
    K: int = 5
    dictionary_size: int = 30
    pfa: float = 1e-2
    rach_region_k: tuple = (-1, 4)
    rach_region_l: int = 2
    # verify
    mutate: bool = False

    def resolved(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        d = _DEFAULTS[self.experiment]
        return dataclasses.replace(
            self,
            trials=d["trials"] if self.trials is None else int(self.trials),
            nu_max=d["nu_max"] if self.nu_max is None else float(self.nu_max),
            pdr=tuple(float(v) for v in self.pdr),
            snr_db=tuple(float(v) for v in self.snr_db),
            families=tuple(self.families),
            delays_ns=tuple(float(v) for v in self.delays_ns),
            powers_db=tuple(float(v) for v in self.powers_db),
        )

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    def grid(self):
        return make_grid(self.M, self.N, self.nu_p)

    def channel(self) -> ChannelConfig:
        return ChannelConfig(self.delays_ns, self.powers_db, self.nu_max, self.use_profile, self.seed)

    def pulse(self) -> PulseShapeConfig:
        return PulseShapeConfig(self.beta_tau, self.beta_nu, self.tap_halfwidth)


def _write_json(path, report: dict) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _out_dir(cfg: ExperimentConfig) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


def _fmt(v: float) -> str:
    return f"{v:.10e}"


# ---------------------------------------------------------------- ambiguity

def run_ambiguity(cfg: ExperimentConfig) -> dict:
    """DD self-ambiguity of a CAZAC array and the TD baseline of the raw sequence."""
    cfg = cfg.resolved()
    grid = cfg.grid()
    fam = resolve_family(cfg.family, grid, u=cfg.u, alpha=cfg.alpha, beta=cfg.beta, gamma=cfg.gamma)
    p = fam.resolved
    X = cazac_dd(p).normalized(grid.MN)
    dd = amb.dd_ambiguity(X, X)
    x = cazac_td(p)
    td = amb.td_ambiguity(x, x)
    on = amb.line_support_mask(p)
    mag = dd.magnitude
    summary = {
        "on_line_min_mag": float(mag[on].min()),
        "off_line_max_mag": float(mag[~on].max()) if (~on).any() else 0.0,
        "support_count": int(np.count_nonzero(mag >= 0.5)),
        "line_count": int(np.count_nonzero(on)),
        "td_dd_max_dev": float(np.max(np.abs(dd.values - td.values))),
    }
    out = _out_dir(cfg)
    amb.write_surface_csv(dd, os.path.join(out, "ambiguity_dd.csv"))
    amb.write_surface_csv(td, os.path.join(out, "ambiguity_td.csv"))
    report = {
        "config": cfg.as_dict(),
        "family": {"tag": fam.tag, "alpha": p.alpha, "beta": p.beta, "gamma": p.gamma, "root": fam.root},
        "grid": grid.as_dict(),
        "summary": summary,
    }
    _write_json(os.path.join(out, "ambiguity.json"), report)
    return report


# --------------------------------------------------------------------- isac

@dataclass
class IsacSetup:
    """Everything the ISAC receiver knows before the first frame."""

    grid: object
    pilot: QuasiPeriodicArray
    support: list
    region: SensingRegion
    joint_region: SensingRegion
    prior_captured: float = 0.0
    joint_captured: float = 0.0


def isac_setup(cfg: ExperimentConfig) -> IsacSetup:
    """Pilot, alias-free sensing region and refinement region.

    The regions come from the mean tap-power map of the channel model,
    estimated from channel draws independent of the evaluation frames.
    The sensing region keeps the strongest point of every coset of the
    pilot's ambiguity line; the refinement region is simply the strongest
    ``joint_size`` points.
    """
    grid = cfg.grid()
    p = resolve_family("zadoff-chu", grid, u=cfg.pilot_u).resolved
    pilot = cazac_dd(p).normalized(1.0)
    support = line_support(p.line_slope, grid.MN)
    rng = np.random.default_rng([cfg.seed, 0xBEEF])
    power = tap_power_prior(cfg.channel(), grid, cfg.pulse(), cfg.prior_trials, rng)
    region = SensingRegion.from_prior(power, grid.MN, support, cfg.region_size)
    top = sorted(power.items(), key=lambda kv: -kv[1])[: cfg.joint_size]
    joint = SensingRegion(np.array([k for (k, _), _ in top]), np.array([l for (_, l), _ in top]))
    total = sum(power.values())
    cap = sum(power.get((int(k), int(l)), 0.0) for k, l in zip(region.ks, region.ls)) / total
    jcap = sum(v for _, v in top) / total
    return IsacSetup(grid, pilot, support, region, joint, cap, jcap)


def isac_frame_bers(cfg: ExperimentConfig, setup: IsacSetup, pdr: float, frame: int) -> list:
    """Per-iteration BER of one superimposed frame."""
    rng = np.random.default_rng([cfg.seed, frame])
    grid = setup.grid
    const = qam(cfg.qam_order)
    fc = FrameConfig(setup.pilot, pdr, cfg.rho_d_db, const)
    h = effective_channel(sample_channel(cfg.channel(), rng), grid, cfg.pulse())
    data = random_data_frame(grid, const, rng)
    tx = assemble_frame(data, fc)
    s2 = fc.noise_variance()
    y, _ = add_noise(apply_channel(h, tx), cfg.rho_d_db, fc.energies()[1], rng)
    res = turbo_loop(
        y, fc.scaled_pilot(), setup.region, cfg.iters, s2, const,
        data_scale=fc.data_scale, truth=data, refine_region=setup.joint_region,
        support=setup.support,
    )
    return res.ber_trace


def _mean_ci(x: np.ndarray) -> tuple[float, float, float]:
    m = float(np.mean(x))
    if x.size < 2:
        return m, m, m
    half = 1.959963984540054 * float(np.std(x, ddof=1)) / math.sqrt(x.size)
    return m, max(0.0, m - half), min(1.0, m + half)


def run_isac(cfg: ExperimentConfig) -> dict:
    """BER versus PDR and turbo iteration over ``trials`` frames per PDR."""
    cfg = cfg.resolved()
    if cfg.trials <= 0:
        raise EmptyTrialSet("isac needs trials >= 1")
    if cfg.iters < 1:
        raise ValueError("iters must be >= 1")
    FrameConfig(QuasiPeriodicArray(cfg.grid(), np.ones((cfg.M, cfg.N))), min(cfg.pdr))  # validate PDRs
    setup = isac_setup(cfg)
    rows, per_pdr = [], []
    for pdr in cfg.pdr:
        B = np.array([isac_frame_bers(cfg, setup, pdr, f) for f in range(cfg.trials)])
        entry = {"pdr": pdr, "mean": [], "median": [], "ci_low": [], "ci_high": []}
        for t in range(cfg.iters):
            m, lo, hi = _mean_ci(B[:, t])
            rows.append((pdr, t + 1, m, lo, hi))
            entry["mean"].append(m)
            entry["median"].append(float(np.median(B[:, t])))
            entry["ci_low"].append(lo)
            entry["ci_high"].append(hi)
        diff = B[:, 0] - B[:, -1]
        if np.any(diff != 0):
            pval = float(stats.wilcoxon(B[:, 0], B[:, -1], alternative="greater").pvalue)
        else:
            pval = 1.0
        entry["paired_p_first_vs_last"] = pval
        entry["median_non_increasing"] = bool(np.all(np.diff(entry["median"]) <= 0))
        per_pdr.append(entry)
    out = _out_dir(cfg)
    with open(os.path.join(out, "isac.csv"), "w") as fh:
        fh.write("pdr,iter,ber,ci_low,ci_high\n")
        for pdr, it, m, lo, hi in rows:
            fh.write(f"{pdr!r},{it},{_fmt(m)},{_fmt(lo)},{_fmt(hi)}\n")
    report = {
        "config": cfg.as_dict(),
        "grid": setup.grid.as_dict(),
        "sensing_region_size": len(setup.region),
        "sensing_region_prior_power": setup.prior_captured,
        "joint_region_size": len(setup.joint_region),
        "joint_region_prior_power": setup.joint_captured,
        "results": per_pdr,
    }
    _write_json(os.path.join(out, "isac.json"), report)
    return report


# --------------------------------------------------------------------- rach

def rach_alphas(MN: int, size: int, start: int = 4) -> list:
    """Chirp rates ``start, start+1, ...`` coprime to ``MN``, pairwise differences coprime too.

    Rates sharing a factor with ``MN`` are skipped: they lose zero
    autocorrelation. Consecutive rates keep differences small, which for
    ``MN = M N`` with prime ``M, N`` guarantees flat cross-ambiguity as long
    as the span stays below ``min(M, N)``.
    """
    out, a = [], start
    while len(out) < size:
        if math.gcd(a, MN) == 1:
            out.append(a)
        a += 1
        if a > start + 4 * size + MN:
            raise ValueError(f"cannot find {size} chirp rates coprime to {MN}")
    for i, a in enumerate(out):
        for b in out[:i]:
            if math.gcd(a - b, MN) != 1:
                raise ValueError(
                    f"dictionary_size={size} gives rates {b} and {a} with non-flat cross-ambiguity at MN={MN}"
                )
    return out


def rach_dictionary(cfg: ExperimentConfig, family: str) -> list:
    """Candidate preambles of one family with pairwise flat cross-ambiguity.

    All preambles use the chirp rates of :func:`rach_alphas`; the smallest
    line slope ``2 alpha`` is 8, which keeps the default detection region
    alias-free. Preambles are scaled to unit average cell energy.
    """
    grid = cfg.grid()
    MN = grid.MN
    out = []
    for i, a in enumerate(rach_alphas(MN, cfg.dictionary_size)):
        if family == "zadoff-chu":
            p = resolve_family(family, grid, u=2 * a).resolved
        elif family == "gaussian":
            p = resolve_family(family, grid, alpha=a, beta=(7 * i + 1) % MN).resolved
        elif family == "wiener":
            p = resolve_family(family, grid, alpha=a).resolved
        else:
            raise ValueError(f"unknown RACH family {family!r}; expected one of {RACH_FAMILIES}")
        out.append(cazac_dd(p).normalized(MN))
    return out


def rach_region(cfg: ExperimentConfig) -> SensingRegion:
    k0, k1 = cfg.rach_region_k
    return SensingRegion.rectangle(int(k1), int(cfg.rach_region_l), k_min=int(k0))


def rach_trial(cfg, dictionaries: dict, region: SensingRegion, snr_list, trial: int) -> dict:
    """One random-access slot, evaluated for every family and SNR point.

    The active set, channels and unit noise draw depend only on
    ``(seed, trial)``: all families and SNR points see the same slot with
    the noise rescaled (common random numbers). Returns
    ``{(snr_db, family): (missed, false_alarms)}``.
    """
    grid = cfg.grid()
    rng = np.random.default_rng([cfg.seed, trial])
    D = len(next(iter(dictionaries.values())))
    active = rng.choice(D, size=cfg.K, replace=False) if cfg.K > 0 else np.array([], dtype=int)
    chans = [effective_channel(sample_channel(cfg.channel(), rng), grid, cfg.pulse()) for _ in range(cfg.K)]
    w = rng.standard_normal((grid.M, grid.N)) + 1j * rng.standard_normal((grid.M, grid.N))
    act = set(int(a) for a in active)
    res = {}
    for fam, dic in dictionaries.items():
        sig = np.zeros((grid.M, grid.N), dtype=np.complex128)
        for a, h in zip(active, chans):
            sig += apply_channel(h, dic[a]).fundamental
        for snr in snr_list:
            sigma2 = 10.0 ** (-snr / 10.0)
            y = QuasiPeriodicArray(grid, sig + np.sqrt(sigma2 / 2) * w)
            found = ost_detect(y, dic, region, sigma2, cfg.pfa).active_set
            res[(snr, fam)] = (len(act - found), len(found - act))
    return res


def _wilson(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = k / n
    den = 1 + z * z / n
    c = (p + z * z / (2 * n)) / den
    h = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, c - h), min(1.0, c + h)


def run_rach(cfg: ExperimentConfig) -> dict:
    """Missed-detection rate of OST preamble detection versus user SNR."""
    cfg = cfg.resolved()
    if cfg.trials <= 0:
        raise EmptyTrialSet("rach needs trials >= 1")
    if cfg.K < 0 or cfg.K > cfg.dictionary_size:
        raise ValueError(f"K must lie in [0, dictionary_size], got {cfg.K}")
    dictionaries = {f: rach_dictionary(cfg, f) for f in cfg.families}
    region = rach_region(cfg)
    MN = cfg.M * cfg.N
    for a in rach_alphas(MN, cfg.dictionary_size):
        region.check(line_support(2 * a % MN, MN), MN)
    D = cfg.dictionary_size
    miss = {(s, f): 0 for s in cfg.snr_db for f in cfg.families}
    fa = dict(miss)
    for t in range(cfg.trials):
        for key, (m, a) in rach_trial(cfg, dictionaries, region, cfg.snr_db, t).items():
            miss[key] += m
            fa[key] += a
    rows, results = [], []
    for snr in cfg.snr_db:
        for f in cfg.families:
            n_act = cfg.K * cfg.trials
            n_idle = (D - cfg.K) * cfg.trials
            mr = miss[snr, f] / n_act if n_act else None
            lo, hi = _wilson(miss[snr, f], n_act) if n_act else (None, None)
            far = fa[snr, f] / n_idle if n_idle else None
            rows.append((snr, f, mr))
            results.append({
                "snr_db": snr, "family": f, "miss_rate": mr, "miss_ci_low": lo, "miss_ci_high": hi,
                "false_alarm_rate": far, "trials": cfg.trials,
            })
    out = _out_dir(cfg)
    with open(os.path.join(out, "rach.csv"), "w") as fh:
        fh.write("snr_db,family,miss_rate,trials\n")
        for snr, f, mr in rows:
            fh.write(f"{snr!r},{f},{'' if mr is None else _fmt(mr)},{cfg.trials}\n")
    report = {"config": cfg.as_dict(), "grid": cfg.grid().as_dict(), "region_size": len(region), "results": results}
    _write_json(os.path.join(out, "rach.json"), report)
    return report


# ------------------------------------------------------------------- verify

def _corrupt_dzt(x: PeriodicSequence) -> QuasiPeriodicArray:
    X = dzt(x).fundamental.copy()
    X[0, 0] *= -1
    return QuasiPeriodicArray(x.grid, X)


def _check(name, error, tol, **extra) -> dict:
    return {"name": name, "max_error": float(error), "tol": tol, "pass": bool(error <= tol), **extra}


def run_verify(cfg: ExperimentConfig) -> dict:
    """Small-grid property suite; failures become report entries."""
    cfg = cfg.resolved()
    rng = np.random.default_rng(cfg.seed)
    fwd = _corrupt_dzt if cfg.mutate else dzt
    checks = []

    g = make_grid(5, 7)
    err_rt, err_ip = 0.0, 0.0
    for _ in range(20):
        x = PeriodicSequence(g, rng.standard_normal(35) + 1j * rng.standard_normal(35))
        y = PeriodicSequence(g, rng.standard_normal(35) + 1j * rng.standard_normal(35))
        X, Y = fwd(x), fwd(y)
        err_rt = max(err_rt, np.max(np.abs(idzt(X).samples - x.samples)))
        err_ip = max(err_ip, abs(np.vdot(Y.fundamental, X.fundamental) - np.vdot(y.samples, x.samples)))
    checks.append(_check("dzt_round_trip", err_rt, 1e-12))
    checks.append(_check("dzt_inner_product", err_ip, 1e-9))

    err = 0.0
    for _ in range(10):
        x = PeriodicSequence(g, rng.standard_normal(35) + 1j * rng.standard_normal(35))
        y = PeriodicSequence(g, rng.standard_normal(35) + 1j * rng.standard_normal(35))
        dd = amb.dd_ambiguity(fwd(x), fwd(y), method="direct").values
        err = max(err, np.max(np.abs(dd - amb.td_ambiguity(x, y, method="direct").values)))
    checks.append(_check("td_dd_equivalence", err, 1e-12))

    g15 = make_grid(3, 5)
    p = CazacParams(1, 0, 0, g15)
    X = cazac_dd(p).normalized(15)
    mag = amb.dd_ambiguity(X, X, method="direct").magnitude
    on = amb.line_support_mask(p)
    err = max(float(np.max(np.abs(mag[on] - 1))), float(mag[~on].max()))
    checks.append(_check("line_support", err, 1e-9, support_count=int(np.count_nonzero(mag > 0.5))))

    q = Cazac2DParams(1, 0, 2, 0, 0, g15)
    xs = spread_pilot(q, PilotSpec(0, 0, g15))
    A = np.abs(amb.dd_ambiguity(xs, xs, method="direct").values)
    k, l = np.meshgrid(np.arange(15), np.arange(15), indexing="ij")
    pred = lattice_support(q, k, l)
    big = A > 1e-6 * A.max()
    checks.append(_check("lattice_support", float(np.count_nonzero(big != pred)), 0.0,
                         support_count=int(np.count_nonzero(big))))

    err = 0.0
    for a1, a2 in [(1, 2), (1, 3), (2, 4)]:
        P1, P2 = CazacParams(a1, 0, 0, g15), CazacParams(a2, 1, 0, g15)
        rep = amb.cross_af_flatness(P1, P2)
        if rep.eligible:
            S = amb.dd_ambiguity(cazac_dd(P1).normalized(15), cazac_dd(P2).normalized(15), method="direct")
            err = max(err, float(np.max(np.abs(S.magnitude - rep.magnitude))))
    checks.append(_check("cross_af_flatness", err, 1e-9))

    err = 0.0
    for n in range(3, 40, 2):
        for a in range(1, n):
            if math.gcd(a, n) == 1:
                err = max(err, abs(amb.gauss_sum_magnitude(a, n) - math.sqrt(n)))
    checks.append(_check("gauss_sum", err, 1e-9))

    x = cazac_td(p)
    checks.append(_check("cazac_ca_zac", 0.0 if (verify_ca(x) and verify_zac(x)) else 1.0, 0.0))
    checks.append(_check("cazac_papr", abs(papr(x) - 1.0), 1e-12))

    rep = amb.unbiasedness_stat(X, trials=cfg.trials, rng_seed=cfg.seed)
    checks.append(_check("unbiasedness_z", abs(rep.z_score), 3.0, mean=rep.mean_sq_cross, target=rep.target))

    report = {"config": cfg.as_dict(), "checks": checks, "all_pass": all(c["pass"] for c in checks)}
    _write_json(os.path.join(_out_dir(cfg), "verify.json"), report)
    return report


RUNNERS = {"ambiguity": run_ambiguity, "isac": run_isac, "rach": run_rach, "verify": run_verify}


def run(cfg: ExperimentConfig) -> dict:
    return RUNNERS[cfg.resolved().experiment](cfg)
