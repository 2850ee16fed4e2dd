import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

import oracles
from zakwave import PeriodicSequence, QuasiPeriodicArray, basis_dd, basis_td, dzt, idzt, make_grid
from zakwave.errors import IndexOutOfRange
from zakwave.spread import PilotSpec, point_pilot
from zakwave.zak import basis_matrix


def _rand(rng, g):
    return PeriodicSequence(g, rng.standard_normal(g.MN) + 1j * rng.standard_normal(g.MN))


@pytest.mark.parametrize("M,N", [(3, 5), (5, 7), (1, 7), (5, 1)])
@pytest.mark.parametrize("method", ["fft", "direct"])
def test_dzt_matches_oracle(M, N, method):
    g = make_grid(M, N)
    x = _rand(np.random.default_rng(M * N), g)
    assert np.max(np.abs(dzt(x, method=method).fundamental - oracles.dzt(x.samples, M, N))) < 1e-12


def test_idzt_matches_oracle():
    g = make_grid(5, 7)
    rng = np.random.default_rng(3)
    X = QuasiPeriodicArray(g, rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7)))
    assert np.max(np.abs(idzt(X).samples - oracles.idzt(X.fundamental))) < 1e-12


def test_dzt_of_delta_and_constant():
    g = make_grid(3, 5)
    d = np.zeros(15)
    d[0] = 1
    X = dzt(PeriodicSequence(g, d)).fundamental
    expected = np.zeros((3, 5))
    expected[0, :] = 1 / math.sqrt(5)
    assert np.allclose(X, expected, atol=1e-15)
    X = dzt(PeriodicSequence(g, np.ones(15))).fundamental
    expected = np.zeros((3, 5))
    expected[:, 0] = math.sqrt(5)
    assert np.allclose(X, expected, atol=1e-14)


def test_round_trip_many():
    g = make_grid(5, 7)
    rng = np.random.default_rng(4)
    for _ in range(100):
        x = _rand(rng, g)
        assert np.max(np.abs(idzt(dzt(x)).samples - x.samples)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(
    mn=st.sampled_from([(1, 1), (3, 5), (5, 3), (7, 9), (9, 11), (3, 31)]),
    seed=st.integers(0, 2**32 - 1),
)
def test_unitarity_property(mn, seed):
    M, N = mn
    g = make_grid(M, N)
    rng = np.random.default_rng(seed)
    x, y = _rand(rng, g), _rand(rng, g)
    X, Y = dzt(x), dzt(y)
    assert np.vdot(Y.fundamental, X.fundamental) == pytest.approx(np.vdot(y.samples, x.samples), abs=1e-9)
    assert X.energy == pytest.approx(x.energy, rel=1e-12)
    assert np.max(np.abs(idzt(X).samples - x.samples)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(hnp.arrays(np.float64, (3, 5), elements=st.floats(-10, 10)))
def test_inverse_then_forward(a):
    g = make_grid(3, 5)
    X = QuasiPeriodicArray(g, a + 0.5j * a[::-1, ::-1])
    assert np.max(np.abs(dzt(idzt(X)).fundamental - X.fundamental)) < 1e-12


def test_dzt_output_is_quasi_periodic():
    # direct summation of the DZT at indices outside the fundamental domain
    g = make_grid(3, 5)
    x = _rand(np.random.default_rng(5), g)
    X = dzt(x)
    for k, l in [(4, 2), (-2, 7), (9, -3), (14, 11)]:
        direct = sum(x((k + p * 3)) * np.exp(-2j * np.pi * p * l / 5) for p in range(5)) / math.sqrt(5)
        assert X.at(k, l) == pytest.approx(direct, abs=1e-12)


def test_basis_td_examples():
    g = make_grid(3, 5)
    v = basis_td(g, 0, 0).samples
    assert np.allclose(v[:3], 1 / math.sqrt(3)) and np.allclose(v[3:], 0)
    v = basis_td(g, 1, 1).samples
    n = np.arange(3, 6)
    assert np.allclose(v[3:6], np.exp(2j * np.pi * n / 3) / math.sqrt(3))
    assert np.count_nonzero(np.abs(v) > 1e-15) == 3


def test_basis_orthonormal_both_domains():
    g = make_grid(3, 5)
    B = basis_matrix(g)
    assert np.allclose(B.conj().T @ B, np.eye(15), atol=1e-12)
    V = np.stack([basis_dd(g, r, s).fundamental.ravel() for r in range(5) for s in range(3)], axis=1)
    assert np.allclose(V.conj().T @ V, np.eye(15), atol=1e-12)


def test_basis_maps_under_dzt():
    g = make_grid(3, 5)
    assert np.max(np.abs(dzt(basis_td(g, 1, 2)).fundamental - basis_dd(g, 1, 2).fundamental)) < 1e-12
    for r in range(5):
        for s in range(3):
            assert np.allclose(idzt(basis_dd(g, r, s)).samples, basis_td(g, r, s).samples, atol=1e-12)


def test_basis_dd_origin_value():
    g = make_grid(3, 5)
    assert np.allclose(basis_dd(g, 0, 0).fundamental, 1 / math.sqrt(15))


@pytest.mark.parametrize("r,s", [(-1, 0), (5, 0), (0, 3), (0, -1)])
def test_basis_index_range(r, s):
    g = make_grid(3, 5)
    with pytest.raises(IndexOutOfRange):
        basis_td(g, r, s)
    with pytest.raises(IndexOutOfRange):
        basis_dd(g, r, s)


def test_point_pilot_pulse_train():
    # frozen from the brute-force inverse: 1/sqrt(N) at multiples of M
    g = make_grid(3, 5)
    x = idzt(point_pilot(PilotSpec(0, 0, g))).samples
    ref = oracles.idzt(point_pilot(PilotSpec(0, 0, g)).fundamental)
    assert np.allclose(x, ref, atol=1e-15)
    expected = np.zeros(15)
    expected[::3] = 1 / math.sqrt(5)
    assert np.allclose(x, expected, atol=1e-15)


def test_unknown_method():
    g = make_grid(3, 5)
    with pytest.raises(ValueError):
        dzt(PeriodicSequence(g, np.ones(15)), method="slow")
