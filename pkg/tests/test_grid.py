import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from zakwave import QuasiPeriodicArray, PeriodicSequence, basis_dd, make_grid, papr, qp_eval, inner_product_qp
from zakwave.errors import EvenDimension, GridMismatch, NonPositive, NotCoprime, ZeroSignal, ZakwaveError
from zakwave.grid import check_same_grid, zeros_dd
from zakwave.spread import PilotSpec, point_pilot
from zakwave.zak import idzt


def test_paper_grid_derived_quantities():
    g = make_grid(31, 37, 30e3)
    assert g.MN == 1147
    assert g.bandwidth == pytest.approx(930e3)
    assert g.duration == pytest.approx(37 / 30e3)
    assert g.duration == pytest.approx(1.2333e-3, rel=1e-4)
    assert g.tau_p * g.nu_p == pytest.approx(1.0)


def test_small_grid_resolutions():
    g = make_grid(3, 5, 1.0)
    assert g.MN == 15
    assert g.delay_res == pytest.approx(1 / 3)
    assert g.doppler_res == pytest.approx(1 / 5)


@pytest.mark.parametrize("M,N,nu_p,exc", [
    (4, 5, 1.0, EvenDimension),
    (3, 6, 1.0, EvenDimension),
    (3, 9, 1.0, NotCoprime),
    (15, 21, 1.0, NotCoprime),
    (3, 5, 0.0, NonPositive),
    (3, 5, -2.0, NonPositive),
    (0, 5, 1.0, NonPositive),
])
def test_make_grid_rejects(M, N, nu_p, exc):
    with pytest.raises(exc):
        make_grid(M, N, nu_p)


def test_errors_are_value_errors():
    with pytest.raises(ValueError):
        make_grid(4, 5)
    assert issubclass(EvenDimension, ZakwaveError)


def test_grid_mismatch():
    a = zeros_dd(make_grid(3, 5))
    b = zeros_dd(make_grid(5, 7))
    with pytest.raises(GridMismatch):
        check_same_grid(a, b)
    with pytest.raises(GridMismatch):
        inner_product_qp(a, b)


def test_periodic_sequence_wraps():
    g = make_grid(3, 5)
    x = PeriodicSequence(g, np.arange(15) + 0j)
    assert x(15) == x(0)
    assert x(-1) == 14
    assert np.array_equal(x(np.array([16, 31])), [1, 1])


def test_periodic_sequence_is_read_only():
    g = make_grid(3, 5)
    x = PeriodicSequence(g, np.ones(15))
    with pytest.raises(ValueError):
        x.samples[0] = 2
    with pytest.raises(GridMismatch):
        PeriodicSequence(g, np.ones(14))


def test_qp_eval_examples():
    g = make_grid(3, 5)
    F = np.zeros((3, 5), dtype=complex)
    F[0, 1] = 1
    X = QuasiPeriodicArray(g, F)
    assert qp_eval(X, 3, 1) == pytest.approx(cmath.exp(2j * math.pi / 5))
    F = np.random.default_rng(0).standard_normal((3, 5)) + 0j
    X = QuasiPeriodicArray(g, F)
    assert qp_eval(X, 6, 3) == pytest.approx(cmath.exp(2j * math.pi * 6 / 5) * F[0, 3])


@settings(max_examples=60, deadline=None)
@given(k=st.integers(-100, 100), l=st.integers(-100, 100), n=st.integers(-4, 4), m=st.integers(-4, 4))
def test_quasi_periodicity(k, l, n, m):
    g = make_grid(3, 5)
    F = np.random.default_rng(1).standard_normal((3, 5)) + 1j
    X = QuasiPeriodicArray(g, F)
    lhs = qp_eval(X, k + n * 3, l + m * 5)
    assert lhs == pytest.approx(cmath.exp(2j * math.pi * n * l / 5) * qp_eval(X, k, l))
    assert qp_eval(X, k, l + 5) == pytest.approx(qp_eval(X, k, l))
    assert qp_eval(X, k, l) == pytest.approx(oracles.qp_value(F, k, l))


def test_inner_product_basis_orthonormal():
    g = make_grid(3, 5)
    V00 = basis_dd(g, 0, 0)
    assert inner_product_qp(V00, V00) == pytest.approx(1.0)
    assert abs(inner_product_qp(V00, basis_dd(g, 1, 2))) < 1e-12


def test_inner_product_offset_independent():
    rng = np.random.default_rng(2)
    g = make_grid(5, 7)
    X = QuasiPeriodicArray(g, rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7)))
    Y = QuasiPeriodicArray(g, rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7)))
    ref = inner_product_qp(X, Y, (0, 0))
    for off in [(7, 3), (-11, 20), (2, -9)]:
        assert abs(inner_product_qp(X, Y, off) - ref) < 1e-12


def test_papr_values():
    g = make_grid(3, 5)
    d = np.zeros(15)
    d[0] = 1
    assert papr(PeriodicSequence(g, d)) == pytest.approx(15.0)
    assert papr(PeriodicSequence(g, np.exp(1j * np.arange(15)))) == pytest.approx(1.0)
    with pytest.raises(ZeroSignal):
        papr(PeriodicSequence(g, np.zeros(15)))


def test_papr_point_pilot_pulse_train():
    # oracle: the pulse train has N equal peaks among MN samples
    g = make_grid(3, 5)
    x = oracles.idzt(point_pilot(PilotSpec(0, 0, g)).fundamental)
    mag2 = np.abs(x) ** 2
    assert papr(idzt(point_pilot(PilotSpec(0, 0, g)))) == pytest.approx(mag2.max() / mag2.mean())
    assert papr(idzt(point_pilot(PilotSpec(0, 0, g)))) == pytest.approx(3.0)


def test_quasi_periodic_array_arithmetic():
    g = make_grid(3, 5)
    X = QuasiPeriodicArray(g, np.ones((3, 5)))
    assert X.energy == pytest.approx(15)
    assert X.normalized(2.0).energy == pytest.approx(2.0)
    assert np.allclose((X + X - X.scaled(2)).fundamental, 0)
    with pytest.raises(ZeroSignal):
        zeros_dd(g).normalized()
