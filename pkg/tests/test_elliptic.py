import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from isomartin import elliptic as el

KS = [0.1, 0.3, 0.5, 0.7, 0.9]


@pytest.mark.parametrize("k", [0.0, 0.2, 0.5, 0.8, 0.99])
def test_complete_integrals_match_scipy(k):
    ctx = el.make_context(k)
    assert ctx.K == pytest.approx(special.ellipk(k * k), rel=1e-14)
    assert ctx.E == pytest.approx(special.ellipe(k * k), rel=1e-14)
    if k > 0:
        assert ctx.K_prime == pytest.approx(special.ellipk(1 - k * k), rel=1e-13)


def test_massless_context():
    ctx = el.make_context(0.0)
    assert ctx.massless
    assert ctx.K == pytest.approx(math.pi / 2)
    assert math.isinf(ctx.K_prime)
    u = np.array([0.3, 1.1 + 0.2j])
    s, c, d = el.jacobi(u, ctx)
    np.testing.assert_allclose(s, np.sin(u))
    np.testing.assert_allclose(d, 1.0)
    assert el.A_func(0.7, ctx) == pytest.approx(math.tan(0.7))


@pytest.mark.parametrize("k", [1.0, -0.1, 1.5, float("nan")])
def test_invalid_modulus(k):
    with pytest.raises(ValueError):
        el.make_context(k)


@pytest.mark.parametrize("k", KS)
def test_real_jacobi_matches_scipy(k):
    ctx = el.make_context(k)
    x = np.linspace(-7, 7, 301)
    s, c, d = el.jacobi(x, ctx)
    sr, cr, dr, _ = special.ellipj(x, k * k)
    np.testing.assert_allclose(s.real, sr, atol=1e-13)
    np.testing.assert_allclose(c.real, cr, atol=1e-13)
    np.testing.assert_allclose(d.real, dr, atol=1e-13)


@pytest.mark.parametrize("k", [0.2, 0.6, 0.9])
def test_complex_jacobi_matches_mpmath(k):
    ctx = el.make_context(k)
    rng = np.random.default_rng(7)
    u = rng.uniform(-2 * ctx.K, 2 * ctx.K, 40) + 1j * rng.uniform(-1.9 * ctx.K_prime, 1.9 * ctx.K_prime, 40)
    s, c, d = el.jacobi(u, ctx)
    m = k * k
    for i, ui in enumerate(u):
        ref = [complex(mpmath.ellipfun(f, ui, m=m)) for f in ("sn", "cn", "dn")]
        for got, want in zip((s[i], c[i], d[i]), ref):
            assert abs(got - want) <= 1e-11 * max(1.0, abs(want))


@settings(max_examples=60, deadline=None)
@given(k=st.floats(0.05, 0.95), x=st.floats(-20, 20), y=st.floats(-20, 20))
def test_jacobi_identities_property(k, x, y):
    ctx = el.make_context(k)
    u = complex(x, y * ctx.K_prime / 10)
    try:
        s, c, d = el.jacobi(u, ctx)
    except el.PoleError:
        return
    scale = max(1.0, abs(s) ** 2)
    if not np.isfinite(scale) or scale > 1e8:
        return
    assert abs(s * s + c * c - 1) <= 1e-10 * scale
    assert abs(d * d + k * k * s * s - 1) <= 1e-10 * scale


@pytest.mark.parametrize("k", KS)
def test_sc_complement_and_half_period(k):
    ctx = el.make_context(k)
    th = np.linspace(0.05, ctx.K - 0.05, 50)
    lhs = el.sc(ctx.K - th, ctx) * ctx.k_prime * el.sc(th, ctx)
    np.testing.assert_allclose(lhs, 1.0, atol=1e-12)
    u = th + 0.3j
    np.testing.assert_allclose(el.sc(u + ctx.K, ctx), -1.0 / (ctx.k_prime * el.sc(u, ctx)), rtol=1e-11)


def test_sc_pole_raises():
    ctx = el.make_context(0.5)
    with pytest.raises(el.PoleError):
        el.sc(ctx.K, ctx)
    with pytest.raises(el.PoleError):
        el.sc_real(ctx.K, ctx)


@pytest.mark.parametrize("k", KS)
def test_legendre_relation(k):
    ctx = el.make_context(k)
    lhs = ctx.E * ctx.K_prime + ctx.E_prime * ctx.K - ctx.K * ctx.K_prime
    assert lhs == pytest.approx(math.pi / 2, abs=1e-13)


@pytest.mark.parametrize("k", KS)
def test_big_F_inverts_sn(k):
    ctx = el.make_context(k)
    assert el.big_F(1.0, ctx) == ctx.K
    for v in np.linspace(0.0, ctx.K * 0.999, 25):
        s = el.jacobi_real(v, ctx)[0]
        assert el.big_F(s, ctx) == pytest.approx(v, abs=1e-12)
    with pytest.raises(ValueError):
        el.big_F(1.2, ctx)


@pytest.mark.parametrize("k", KS)
def test_A_sum_identity(k):
    ctx = el.make_context(k)
    for th in np.linspace(0.05, ctx.K - 0.05, 9):
        lhs = el.A_func(th, ctx) + el.A_func(ctx.K - th, ctx)
        s, c, d = el.jacobi_real(th, ctx)
        assert lhs == pytest.approx((1 / s) * (d / c) / ctx.k_prime, rel=1e-11)


def test_A_increasing_and_derivative():
    ctx = el.make_context(0.6)
    us = np.linspace(0.01, 0.99 * ctx.K, 40)
    a = np.array([el.A_func(u, ctx) for u in us])
    assert np.all(np.diff(a) > 0)
    # A' = (dc^2 + E/K - 1) / k'
    u, h = 0.7, 1e-5
    num = (el.A_func(u + h, ctx) - el.A_func(u - h, ctx)) / (2 * h)
    assert num == pytest.approx((el.dc_real(u, ctx) ** 2 + ctx.E / ctx.K - 1) / ctx.k_prime, rel=1e-8)


def test_Dc_continuation_is_smooth_across_the_pole_lattice():
    ctx = el.make_context(0.5)
    # Dc(u) - (u - eps(u) + dn sn / cn) vanishes below K as well
    for u in (0.3, 0.9, 1.4):
        s, c, d = el.jacobi_real(u, ctx)
        assert el.Dc(u, ctx) == pytest.approx(u - el.jacobi_epsilon(u, ctx) + d * s / c, rel=1e-11)
    with pytest.raises(el.PoleError):
        el.Dc(ctx.K, ctx)


def test_reduce_torus():
    ctx = el.make_context(0.5)
    u = el.reduce_torus(-0.1 + 9 * ctx.K_prime * 1j, ctx)
    assert 0 <= u.real < 4 * ctx.K and 0 <= u.imag < 4 * ctx.K_prime
    assert el.TorusPoint.from_complex(4 * ctx.K + 1j, ctx).u == pytest.approx(1j)
