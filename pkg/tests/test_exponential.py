import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isomartin import elliptic as el
from isomartin import graph as gr
from isomartin import laplacian as lap
from isomartin.exponential import ExponentialEvaluator, SaddleError, expo_lift, relabel, sign_changes


def _residual(g, ctx, u):
    op = lap.assemble(g, ctx)
    ev = ExponentialEvaluator(g, ctx)
    f = ev.expo_field(g.primal[0], u)
    r = lap.apply(op, f)[op.rows]
    scale = lap.local_scale(op, f)[op.rows]
    return np.max(np.abs(r) / scale)


@pytest.mark.parametrize("k", [0.1, 0.5, 0.9])
def test_exponential_is_massive_harmonic(square_skew, triangular, demo, k):
    ctx = el.make_context(k)
    rng = np.random.default_rng(11)
    for g in (square_skew, triangular, demo):
        for _ in range(4):
            u = rng.uniform(0, 4 * ctx.K) + 1j * rng.uniform(0, 4 * ctx.K_prime)
            assert _residual(g, ctx, u) < 1e-12


def test_massless_exponential_is_discrete_harmonic(square_skew):
    ctx = el.make_context(0.0)
    assert _residual(square_skew, ctx, 0.3 + 0.2j) < 1e-12


def test_path_independence(triangular):
    g = triangular
    ctx = el.make_context(0.6)
    ev = ExponentialEvaluator(g, ctx)
    x = g.index([0, 0, 0])
    y = g.primal[7]
    u = 0.8 + 0.3j
    rng = np.random.default_rng(0)
    ref = ev.expo(x, y, u)
    for _ in range(5):
        assert ev.expo_path(g.minimal_path(x, y, rng=rng), u) == pytest.approx(ref, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-3, 3), ur=st.floats(-5, 5), ui=st.floats(-2, 2))
def test_reversed_step_inverts_factor(a, ur, ui):
    ctx = el.make_context(0.5)
    u = complex(ur, ui)
    try:
        f1 = expo_lift([1], [a], u, ctx)
        f2 = expo_lift([1], [a + 2 * ctx.K], u, ctx)
    except el.PoleError:
        return
    if np.isfinite(f1) and np.isfinite(f2) and 1e-6 < abs(f1) < 1e6:
        assert f1 * f2 == pytest.approx(1.0, rel=1e-10)


def test_positive_on_the_line(demo):
    ctx = el.make_context(0.4)
    ev = ExponentialEvaluator(demo, ctx)
    x = demo.index(demo.domain[0])
    for y in demo.primal[::25]:
        for v in (-1.0, 0.2, 2.5):
            if y != x:
                assert ev.expo_positive(x, y, v) > 0


def test_chi_derivatives_match_finite_differences(triangular):
    ctx = el.make_context(0.7)
    ev = ExponentialEvaluator(triangular, ctx)
    n = np.array([0.5, -0.2, 0.3])
    v, h = 0.37, 1e-5
    d1 = (ev.chi(n, v + h) - ev.chi(n, v - h)) / (2 * h)
    d2 = (ev.chi(n, v + h) - 2 * ev.chi(n, v) + ev.chi(n, v - h)) / h ** 2
    assert ev.chi_prime(n, v) == pytest.approx(d1, rel=1e-8)
    assert ev.chi_second(n, v) == pytest.approx(d2, rel=1e-4)


def test_chi_is_odd_in_direction(triangular):
    ev = ExponentialEvaluator(triangular, el.make_context(0.5))
    n = np.array([0.2, 0.5, -0.3])
    assert ev.chi(-n, 0.4) == pytest.approx(-ev.chi(n, 0.4), abs=1e-15)


@pytest.mark.parametrize("k", [0.2, 0.6, 0.95])
def test_saddle_minimises_chi_on_the_line(square, k):
    ctx = el.make_context(k)
    ev = ExponentialEvaluator(square, ctx)
    for n in ([1.0, 0.0], [0.5, 0.5], [0.2, -0.8], [-0.5, -0.5]):
        sad = ev.saddle(n)
        assert sad.residual <= 1e-12
        assert sad.chi < 0 and sad.chi2 > 0
        # along the real line the saddle is a minimum of chi
        assert ev.chi(n, sad.v0 + 1e-3) > sad.chi and ev.chi(n, sad.v0 - 1e-3) > sad.chi


def test_saddle_axis_closed_form(square):
    # for n = e_j the saddle is the step angle itself, where dn = 1
    ctx = el.make_context(0.5)
    ev = ExponentialEvaluator(square, ctx)
    sad = ev.saddle([1.0, 0.0])
    assert sad.v0 == pytest.approx(ev.alphas[0], abs=1e-9)
    assert sad.chi == pytest.approx(0.5 * math.log(ctx.k_prime), abs=1e-12)
    assert sad.boundary == pytest.approx(ev.alphas[0] + 2 * ctx.K, abs=1e-9)


def test_relabel_rejects_non_monotone():
    ctx = el.make_context(0.5)
    alphas = ctx.to_elliptic(np.array([0.0, math.pi / 2, math.pi, 3 * math.pi / 2]))
    with pytest.raises(SaddleError):
        relabel([1.0, 1.0, 1.0, 1.0], alphas, ctx)


def test_tau_linear_and_odd(triangular):
    ev = ExponentialEvaluator(triangular, el.make_context(0.5))
    a, b = np.array([0.3, -0.1, 0.6]), np.array([-0.2, 0.7, 0.1])
    v = 0.9
    assert ev.tau(2 * a - 3 * b, v) == pytest.approx(2 * ev.tau(a, v) - 3 * ev.tau(b, v), abs=1e-12)
    assert ev.tau(a, v) + ev.tau(-a, v) == pytest.approx(0.0, abs=1e-15)


def test_hemisphere_has_two_arcs(demo):
    ctx = el.make_context(0.6)
    ev = ExponentialEvaluator(demo, ctx)
    dirs = [demo.asymptotic_direction(p).n for p in np.linspace(0, 2 * math.pi, 360, endpoint=False)]
    for v in np.linspace(0, 4 * ctx.K, 5, endpoint=False):
        assert sign_changes(ev.hemisphere(v, dirs)) == 2


def test_sign_changes():
    assert sign_changes([1, 1, -1, -1]) == 2
    assert sign_changes([1, 0, 1]) == 0
    assert sign_changes([]) == 0


def test_expo_safe_shifts_at_pole(square):
    ctx = el.make_context(0.5)
    ev = ExponentialEvaluator(square, ctx)
    x = square.index([0, 0])
    y = square.index([1, 1])
    pole = ev.alphas[0] + 2 * ctx.K
    val, shifted = ev.expo_safe(x, y, pole)
    assert shifted and np.isfinite(val)
    val, shifted = ev.expo_safe(x, y, 0.3 + 0.2j)
    assert not shifted
