from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from isomartin import series as ser
from isomartin.series import RationalSeries


def test_displayed_coefficients():
    s = ser.s_by_newton(10)
    assert [s[i] for i in range(0, 11, 2)] == [Fraction(1, 2), Fraction(3, 32), Fraction(3, 64),
                                               Fraction(123, 4096), Fraction(177, 8192),
                                               Fraction(34887, 2097152)]
    t = ser.t_by_newton(10)
    assert [t[i] for i in range(0, 11, 2)] == [1, 0, Fraction(3, 64), Fraction(3, 64),
                                               Fraction(711, 16384), Fraction(327, 8192)]


def test_H_display():
    H = ser.H_series(5)
    assert (H[1], H[3], H[5]) == (Fraction(1, 4), Fraction(1, 16), Fraction(33, 1024))
    assert ser.hypergeometric_2f1(Fraction(1, 2), Fraction(5, 6), Fraction(5, 3), 1)[1] == Fraction(1, 4)


def test_recurrence_first_step():
    s = ser.s_by_recurrence(6)
    assert s[4] == Fraction(3, 64) and s[6] == Fraction(123, 4096)


def test_routes_agree_to_order_80():
    a, b, c = ser.s_by_newton(80), ser.s_by_recurrence(80), ser.s_by_hypergeometric(80)
    assert a.coeffs == b.coeffs == c.coeffs
    t1, t2 = ser.t_routes(80)
    assert t1.coeffs == t2.coeffs


def test_lagrange():
    assert ser.s_coeff_lagrange(1) == Fraction(3, 32)
    assert ser.s_coeff_lagrange(2) == Fraction(3, 64)
    s = ser.s_by_newton(40)
    assert all(ser.s_coeff_lagrange(n) == s[2 * n] for n in range(1, 21))
    with pytest.raises(ValueError):
        ser.s_coeff_lagrange(0)


def test_ode_residual_vanishes():
    res = ser.ode_residual(ser.s_by_newton(40))
    assert all(c == 0 for c in res.coeffs)


def test_moment_integral_low_orders():
    assert float(ser.moment_integral(0)) == pytest.approx(0.5, abs=1e-10)
    assert float(ser.moment_integral(1)) == pytest.approx(3 / 32, abs=1e-10)


def test_certify_report():
    rep = ser.certify(40, lagrange_max=20, moments=3)
    assert rep.passed
    text = rep.text()
    assert "FAIL" not in text and "moment integral" in text


def test_certify_detects_failures(monkeypatch):
    monkeypatch.setitem(ser.DISPLAYED_S, 4, Fraction(1, 7))
    with pytest.raises(ser.CertificationError, match="displayed"):
        ser.certify(20, lagrange_max=5, moments=1)


coeff_lists = st.lists(st.fractions(max_denominator=50), min_size=1, max_size=8)


@given(a=coeff_lists, b=coeff_lists)
def test_series_ring_axioms(a, b):
    A = RationalSeries(tuple(a), 7)
    B = RationalSeries(tuple(b), 7)
    assert (A * B).coeffs == (B * A).coeffs
    assert ((A + B) - B).coeffs == A.coeffs
    if A[0] != 0:
        assert (A * A.inverse()).coeffs == RationalSeries.constant(1, 7).coeffs


def test_compose_square_and_shift():
    A = RationalSeries((1, 2, 3), 2)
    assert A.compose_square().coeffs == tuple(map(Fraction, (1, 0, 2, 0, 3)))
    assert A.shift(1).order == 3 and A.shift(1)[3] == 3
    assert A.as_strings() == ["1/1", "2/1", "3/1"]
