import math

import numpy as np
import pytest

import oracles
from zakwave import PeriodicSequence, QuasiPeriodicArray, dzt, idzt, make_grid
from zakwave.cazac import cazac_dd, resolve_family
from zakwave.channel import (
    VEH_A_DELAYS_NS,
    ChannelConfig,
    ChannelRealization,
    EffectiveChannel,
    FrameConfig,
    PulseShapeConfig,
    add_noise,
    apply_channel,
    assemble_frame,
    effective_channel,
    multiuser_superpose,
    noise_variance,
    rrc,
    sample_channel,
    tap_power_prior,
)
from zakwave.constellation import qam, random_data_frame
from zakwave.errors import BadPdr, EmptyProfile, GridMismatch, SpreadTooLarge
from zakwave.spread import twisted_conv

G = make_grid(31, 37, 30e3)


def _rand_qp(rng, g):
    return QuasiPeriodicArray(g, rng.standard_normal((g.M, g.N)) + 1j * rng.standard_normal((g.M, g.N)))


def test_sample_channel_bounds_and_determinism():
    cfg = ChannelConfig(nu_max=6000.0)
    ch = sample_channel(cfg, np.random.default_rng(5))
    assert ch.num_paths == 6
    assert np.all(np.abs(ch.dopplers) <= 6000.0)
    assert np.allclose(ch.dopplers, 6000.0 * np.cos(ch.angles))
    assert np.allclose(ch.delays, np.array(VEH_A_DELAYS_NS) * 1e-9)
    assert np.linalg.norm(ch.gains) == pytest.approx(1.0)
    again = sample_channel(cfg, np.random.default_rng(5))
    assert np.array_equal(ch.gains, again.gains) and np.array_equal(ch.dopplers, again.dopplers)
    assert np.array_equal(sample_channel(cfg).gains, sample_channel(cfg).gains)
    still = sample_channel(ChannelConfig(nu_max=0.0), np.random.default_rng(1))
    assert np.all(still.dopplers == 0)


def test_profile_power_ordering():
    # average path power follows the profile
    cfg = ChannelConfig(nu_max=0.0)
    rng = np.random.default_rng(0)
    P = np.mean([np.abs(sample_channel(cfg, rng).gains) ** 2 for _ in range(4000)], axis=0)
    assert P[0] > P[2] > P[4] > P[5]
    flat = ChannelConfig(nu_max=0.0, use_profile=False)
    P = np.mean([np.abs(sample_channel(flat, rng).gains) ** 2 for _ in range(4000)], axis=0)
    assert np.allclose(P, 1 / 6, atol=0.02)


def test_config_errors():
    with pytest.raises(EmptyProfile):
        ChannelConfig(delays_ns=(), powers_db=())
    with pytest.raises(ValueError):
        ChannelConfig(delays_ns=(0.0,), powers_db=(0.0, 1.0))
    with pytest.raises(ValueError):
        PulseShapeConfig(beta_tau=1.5)


@pytest.mark.parametrize("beta", [0.0, 0.25, 0.6, 1.0])
def test_rrc_matches_spectral_oracle(beta):
    t = np.array([0.0, 0.1, 0.5, 1.0, 1.7, 3.0, -2.2])
    if beta > 0:
        t = np.append(t, [1 / (4 * beta), -1 / (4 * beta)])
    ref = np.array([oracles.rrc(v, beta) for v in t])
    assert np.max(np.abs(rrc(t, beta) - ref)) < 1e-7


def _single(tau, nu, h=1.0):
    return ChannelRealization(np.array([h], dtype=complex), np.array([tau]), np.array([nu]), np.zeros(1))


def test_single_path_at_origin():
    ps = PulseShapeConfig()
    h = effective_channel(_single(0.0, 0.0), G, ps)
    idx = np.arange(-8, 9)
    taps = np.array([oracles.rrc(v, 0.6) for v in idx])
    norm = np.linalg.norm(taps)
    peak = h.tap(0, 0)
    assert peak == pytest.approx((oracles.rrc(0.0, 0.6) / norm) ** 2, rel=1e-7)
    assert abs(peak) == np.max(np.abs(h.taps))
    assert h.tap(1, 0) == pytest.approx(taps[9] * taps[8] / norm**2, rel=1e-6)
    assert h.tap(0, 0) == pytest.approx(h.tap(0, 0).real)


def test_integer_bin_sinc_limit():
    ps = PulseShapeConfig(beta_tau=0.0, beta_nu=0.0)
    h = effective_channel(_single(3 * G.delay_res, 0.0), G, ps)
    T = np.abs(h.taps)
    i, j = np.unravel_index(np.argmax(T), T.shape)
    assert (i + h.k_lo, j + h.l_lo) == (3, 0)
    assert h.tap(3, 0) == pytest.approx(1.0)
    assert np.sum(T > 1e-12) == 1


def test_channel_linearity():
    a = _single(310e-9, 1200.0, 0.8)
    b = _single(1730e-9, -4000.0, 0.3j)
    both = ChannelRealization(np.r_[a.gains, b.gains], np.r_[a.delays, b.delays],
                              np.r_[a.dopplers, b.dopplers], np.zeros(2))
    ha, hb, hab = (effective_channel(c, G) for c in (a, b, both))
    for k in range(-8, 12):
        for l in range(-14, 14):
            assert hab.tap(k, l) == pytest.approx(ha.tap(k, l) + hb.tap(k, l), abs=1e-14)


def test_spread_too_large():
    with pytest.raises(SpreadTooLarge):
        effective_channel(_single(0.0, 20e3), G)
    with pytest.raises(SpreadTooLarge):
        effective_channel(_single(0.0, 0.0), make_grid(5, 7))


def test_apply_channel_delta_and_shift():
    rng = np.random.default_rng(0)
    x = _rand_qp(rng, G)
    assert np.allclose(apply_channel(EffectiveChannel.identity(G), x).fundamental, x.fundamental)
    h = EffectiveChannel.from_points(G, [2], [-3], [1.0])
    a = np.zeros((G.MN, G.MN), dtype=complex)
    a[2, -3 % G.MN] = 1
    assert np.allclose(apply_channel(h, x).fundamental, twisted_conv(a, x).fundamental, atol=1e-12)
    h = EffectiveChannel.from_points(G, [4], [5], [np.exp(0.7j)])
    assert apply_channel(h, x).energy == pytest.approx(x.energy)


def test_apply_channel_methods_agree_and_match_oracle():
    g = make_grid(3, 5)
    rng = np.random.default_rng(1)
    h = EffectiveChannel.from_points(g, [0, 1, -1, 7], [0, 2, 1, -4], rng.standard_normal(4) + 1j)
    x = _rand_qp(rng, g)
    td = apply_channel(h, x, method="td").fundamental
    direct = apply_channel(h, x, method="direct").fundamental
    ref = oracles.twisted_conv(h.kernel(), x.fundamental, 15)
    assert np.max(np.abs(td - ref)) < 1e-12 and np.max(np.abs(direct - ref)) < 1e-12
    with pytest.raises(ValueError):
        apply_channel(h, x, method="magic")
    with pytest.raises(GridMismatch):
        apply_channel(h, _rand_qp(rng, make_grid(5, 7)))


def test_frame_energies():
    pilot = cazac_dd(resolve_family("zadoff-chu", G, u=11).resolved).scaled(1 / math.sqrt(G.MN))
    assert pilot.energy == pytest.approx(1.0)
    fc = FrameConfig(pilot, pdr=1.0)
    assert fc.energies() == pytest.approx((G.MN / 2, G.MN / 2))
    assert fc.scaled_pilot().energy == pytest.approx(G.MN / 2)
    assert FrameConfig(pilot, pdr=1e-9).data_scale == pytest.approx(1.0)
    data = random_data_frame(G, qam(4), np.random.default_rng(0))
    frame = assemble_frame(data, FrameConfig(pilot, pdr=3.0))
    e_p = G.MN * 3 / 4
    resid = frame - pilot.normalized(e_p)
    assert np.allclose(resid.fundamental, data.symbols * math.sqrt((G.MN - e_p) / G.MN))
    for bad in (0.0, -1.0):
        with pytest.raises(BadPdr):
            FrameConfig(pilot, pdr=bad)


def test_noise():
    g = make_grid(31, 37)
    y = QuasiPeriodicArray(g, np.ones((31, 37)))
    same, s2 = add_noise(y, math.inf, g.MN, np.random.default_rng(0))
    assert s2 == 0.0 and np.max(np.abs(same.fundamental - 1)) < 1e-12
    assert noise_variance(0.0, g.MN, g.MN) == 1.0
    assert noise_variance(10.0, g.MN, g.MN) == pytest.approx(0.1)
    n1, s2 = add_noise(y, 0.0, g.MN, np.random.default_rng(3))
    n2, _ = add_noise(y, 0.0, g.MN, np.random.default_rng(3))
    assert s2 == 1.0 and np.array_equal(n1.fundamental, n2.fundamental)
    assert np.mean(np.abs(n1.fundamental - 1) ** 2) == pytest.approx(1.0, rel=0.1)


def test_multiuser_superpose():
    g = make_grid(3, 5)
    rng = np.random.default_rng(0)
    a, b = _rand_qp(rng, g), _rand_qp(rng, g)
    I = EffectiveChannel.identity(g)
    y, s2 = multiuser_superpose([(a, I)], rng, math.inf)
    assert s2 == 0 and np.allclose(y.fundamental, a.fundamental)
    y, _ = multiuser_superpose([(a, I), (b, I)], rng, math.inf)
    assert np.allclose(y.fundamental, (a + b).fundamental)
    with pytest.raises(GridMismatch):
        multiuser_superpose([(a, I), (_rand_qp(rng, make_grid(5, 7)), I)], rng, math.inf)


def test_multiuser_deterministic_veh_a():
    cfg = ChannelConfig(nu_max=815.0)
    pre = [cazac_dd(resolve_family("wiener", G, alpha=a).resolved) for a in range(4, 9)]

    def frame(seed):
        rng = np.random.default_rng(seed)
        users = [(p, effective_channel(sample_channel(cfg, rng), G)) for p in pre]
        return multiuser_superpose(users, rng, 10.0)[0].fundamental

    assert np.array_equal(frame(7), frame(7))
    assert not np.array_equal(frame(7), frame(8))


def test_tap_power_prior():
    cfg = ChannelConfig(nu_max=6000.0)
    P = tap_power_prior(cfg, G, trials=50, rng=np.random.default_rng(0))
    assert sum(P.values()) == pytest.approx(1.0, rel=0.15)
    best = max(P, key=P.get)
    assert best[0] in (0, 1) and abs(best[1]) <= 8


def test_td_operator_matches_dd_kernel():
    h = effective_channel(_single(0.4e-6, 0.0), G)
    assert h.td_operator() is h.td_operator()
    g = make_grid(5, 7)
    hs = EffectiveChannel.from_points(g, [0, 2, -1], [1, -2, 3], [1.0, 0.5j, -0.2])
    x = _rand_qp(np.random.default_rng(4), g)
    y = dzt(PeriodicSequence(g, hs.td_operator() @ idzt(x).samples))
    assert np.allclose(y.fundamental, oracles.twisted_conv(hs.kernel(), x.fundamental, 35), atol=1e-12)
