"""Discrete massive exponential functions, the rate function and its saddle point.

A diamond step of direction ``alpha`` (elliptic units) contributes the factor
``i sqrt(k') sc((u - alpha) / 2)``.  The exponential between two vertices is
the product over any diamond path, which only depends on the lifted
difference ``N``:

    e_{(x,y)}(u) = prod_j (i sqrt(k') sc((u - alpha_j) / 2)) ** N_j.

Reversing a step (``alpha -> alpha + 2K``) inverts its factor.  On the line
``u = 2iK' + v`` each factor equals ``-sqrt(k') / dn((v - alpha) / 2)``, so
the exponential between primal vertices is positive there and

    chi(v) = sum_j n_j (log(k') / 2 - log dn((v - alpha_j) / 2)).
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import elliptic as el
from . import _kernels
from .graph import Direction, GraphError

SADDLE_TOL = 1e-13
POLE_SHIFT = 1e-6
POLE_NEAR = 1e-8


class SaddleError(ArithmeticError):
    """The saddle-point equation could not be bracketed or solved."""


def edge_factor(alpha, u, ctx):
    """Factor ``i sqrt(k') sc((u - alpha) / 2)`` of one diamond step."""
    return 1j * math.sqrt(ctx.k_prime) * el.sc((np.asarray(u) - alpha) / 2.0, ctx)


def expo_lift(N, alphas, u, ctx):
    """Exponential across the lifted difference `N` with step angles `alphas` (elliptic units).

    `u` may be a scalar or an array; poles produce ``inf``/``nan`` entries.
    """
    uu = np.atleast_1d(np.asarray(u, dtype=np.complex128))
    flat = uu.ravel()
    N = np.asarray(N, dtype=np.int64)
    alphas = np.asarray(alphas, dtype=float)
    if ctx.massless:
        out = np.ones(flat.size, dtype=np.complex128)
        with np.errstate(all="ignore"):
            for a, p in zip(alphas, N):
                if p:
                    out *= (1j * np.tan((flat - a) / 2.0)) ** int(p)
    else:
        out = _kernels.expo_kernel(np.ascontiguousarray(flat.real), np.ascontiguousarray(flat.imag),
                                   alphas, N, *el._kargs(ctx))
    out = out.reshape(uu.shape)
    return complex(out[0]) if np.ndim(u) == 0 else out


def relabel(n, alphas, ctx):
    """Atoms of ``sum_j n_j delta_{alpha_j}`` with non-negative weights.

    Negative weights move to ``alpha_j + 2K``.  Atoms are returned on a
    common lift of the circle ``R / 4K Z`` so that they fit in an arc of
    length less than ``2K``; raises :class:`SaddleError` otherwise.
    """
    n = np.asarray(n, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    active = n != 0
    w = np.abs(n[active])
    a = np.where(n[active] > 0, alphas[active], alphas[active] + 2 * ctx.K)
    P = 4 * ctx.K
    a = np.mod(a, P)
    order = np.argsort(a)
    a, w = a[order], w[order]
    if a.size > 1:
        gaps = np.diff(np.concatenate([a, [a[0] + P]]))
        j = int(np.argmax(gaps))
        if gaps[j] <= 2 * ctx.K + 1e-14:
            raise SaddleError("direction is not monotone: atoms do not fit in a half circle")
        # start the arc after the largest gap
        a = np.concatenate([a[j + 1:], a[:j + 1] + P])
        w = np.concatenate([w[j + 1:], w[:j + 1]])
    return a, w


@dataclass(frozen=True)
class SaddleResult:
    """Saddle point of the rate function on the line ``2iK' + R``.

    Attributes
    ----------
    v0 : float
        Zero of ``chi'`` in the admissible interval.
    chi, chi2 : float
        ``chi(v0)`` (negative) and ``chi''(v0)`` (positive).
    midpoint, half_width : float
        Centre of the atom arc and half-width of the bracket used.
    residual : float
        ``|chi'(v0)|``.
    boundary : float
        ``v0 + 2K`` reduced to ``[-2K, 2K)``: the boundary point ``2iK' + boundary``
        at which ``e_{(x0, x)}`` gives the Martin limit in this direction.
    """

    v0: float
    chi: float
    chi2: float
    midpoint: float
    half_width: float
    residual: float
    boundary: float = math.nan


class RateFunction:
    """Rate function, saddle point and growth rate for fixed step angles.

    Parameters
    ----------
    alphas : array_like
        Step angles in elliptic units.
    ctx : EllipticContext
    """

    def __init__(self, alphas, ctx):
        self.ctx = ctx
        self.alphas = np.asarray(alphas, dtype=float)

    def log_expo_positive(self, N, v):
        """``log e(2iK' + v)`` for a lifted difference, from ``dn`` directly."""
        return float(np.dot(N, self._log_factors(v)))

    def _log_factors(self, v):
        ctx = self.ctx
        out = np.empty(self.alphas.size)
        for j, a in enumerate(self.alphas):
            _, _, d = el.jacobi_real(0.5 * (v - a), ctx)
            out[j] = 0.5 * math.log(ctx.k_prime) - math.log(d)
        return out

    def _n(self, direction):
        n = direction.n if isinstance(direction, Direction) else np.asarray(direction, dtype=float)
        if n.shape != self.alphas.shape:
            raise ValueError("direction has the wrong number of coordinates")
        return n

    def chi(self, direction, v):
        """``chi(v) = sum_j n_j log(sqrt(k') / dn((v - alpha_j) / 2))``."""
        return float(np.dot(self._n(direction), self._log_factors(v)))

    def _sncndn(self, v):
        s = np.empty(self.alphas.size)
        c = np.empty(self.alphas.size)
        d = np.empty(self.alphas.size)
        for j, a in enumerate(self.alphas):
            s[j], c[j], d[j] = el.jacobi_real(0.5 * (v - a), self.ctx)
        return s, c, d

    def chi_prime(self, direction, v):
        """``chi'(v) = (k^2 / 2) sum_j n_j (sn cn / dn)((v - alpha_j) / 2)``."""
        s, c, d = self._sncndn(v)
        return 0.5 * self.ctx.k ** 2 * float(np.dot(self._n(direction), s * c / d))

    def chi_second(self, direction, v):
        """``chi''(v) = (k^2 / 4) sum_j n_j (cn^2 - sn^2 + k^2 sn^2 cn^2 / dn^2)``."""
        s, c, d = self._sncndn(v)
        k2 = self.ctx.k ** 2
        terms = c * c - s * s + k2 * (s * c / d) ** 2
        return 0.25 * k2 * float(np.dot(self._n(direction), terms))

    def saddle(self, direction):
        """Unique zero of ``chi'`` between the relabelled atoms.

        With atoms ``a_1 <= ... <= a_m`` (non-negative weights, arc shorter
        than ``2K``), ``chi'`` is non-positive at ``a_m - 2K`` and
        non-negative at ``a_1 + 2K``; bisection on that bracket is followed by
        Newton steps.
        """
        ctx = self.ctx
        if ctx.massless:
            raise SaddleError("the saddle point needs k > 0")
        n = self._n(direction)
        a, w = relabel(n, self.alphas, ctx)
        K = ctx.K
        # the end points can be zeros of chi' themselves; step just inside
        lo, hi = a[-1] - 2 * K + 1e-9 * K, a[0] + 2 * K - 1e-9 * K
        mid = 0.5 * (a[0] + a[-1])

        def f(v):
            return self.chi_prime(n, v)

        flo, fhi = f(lo), f(hi)
        if flo > 0 or fhi < 0:
            raise SaddleError(f"chi' does not change sign on [{lo}, {hi}]")
        if flo == 0:
            v0 = lo
        elif fhi == 0:
            v0 = hi
        else:
            v0 = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        for _ in range(8):
            g = f(v0)
            if abs(g) <= SADDLE_TOL:
                break
            h = self.chi_second(n, v0)
            if h <= 0:
                break
            step = g / h
            if not lo <= v0 - step <= hi:
                break
            v0 -= step
        v0 = _canonical(v0, mid, K)
        return SaddleResult(v0=float(v0), chi=self.chi(n, v0), chi2=self.chi_second(n, v0),
                            midpoint=float(_canonical(mid, mid, K)),
                            half_width=float(0.5 * (hi - lo)), residual=abs(f(v0)),
                            boundary=float((v0 + 4 * K) % (4 * K) - 2 * K))

    # -- growth rate ----------------------------------------------------------

    def tau(self, vector, v):
        """Growth rate ``sum_j N_j log(sqrt(k') / dn((v - alpha_j) / 2))``, linear in `vector`."""
        vec = vector.n if isinstance(vector, Direction) else np.asarray(vector, dtype=float)
        return float(np.dot(vec, self._log_factors(v)))

    def hemisphere(self, v, directions):
        """Signs of ``tau(., v)`` over a sequence of (reduced-coordinate) directions."""
        f = self._log_factors(v)
        return np.sign(np.asarray(directions, dtype=float) @ f)


class ExponentialEvaluator(RateFunction):
    """Exponential functions and rates on a graph at a fixed modulus.

    Step angles are converted once to elliptic units ``alpha * 2K / pi``.
    """

    def __init__(self, graph, ctx):
        super().__init__(ctx.to_elliptic(graph.alphas), ctx)
        self.graph = graph

    # -- exponential ----------------------------------------------------------

    def expo(self, x, y, u):
        """``e_{(x,y)}(u)`` via the lifted difference."""
        return expo_lift(self.graph.lift_difference(x, y), self.alphas, u, self.ctx)

    def expo_field(self, x0, u):
        """``e_{(x0, x)}(u)`` at every vertex ``x`` of the window."""
        N = self.graph.lifts - self.graph.lifts[self.graph._vertex(x0)]
        f = np.array([complex(edge_factor(a, u, self.ctx)) for a in self.alphas])
        out = np.ones(N.shape[0], dtype=np.complex128)
        for j in range(f.size):
            pos = N[:, j] >= 0
            out *= np.where(pos, f[j], 1.0 / f[j]) ** np.abs(N[:, j])
        return out

    def expo_path(self, path, u):
        """Ordered product of edge factors along a path of ``(class, sign)`` steps."""
        val = complex(1.0)
        for j, s in path:
            a = self.alphas[j] + (0.0 if s > 0 else 2 * self.ctx.K)
            val *= complex(edge_factor(a, u, self.ctx))
        return val

    def expo_safe(self, x, y, u):
        """Exponential with the pole policy: near a pole shift ``Im u`` and flag.

        Returns ``(value, shifted)``.
        """
        val = self.expo(x, y, u)
        if np.isfinite(val) and abs(val) < 1e300:
            try:
                N = self.graph.lift_difference(x, y)
                for a, p in zip(self.alphas, N):
                    if p:
                        w = (complex(u) - a) / 2.0
                        s, c, _ = el.jacobi(w, self.ctx)
                        if abs(c) < POLE_NEAR or abs(s) < POLE_NEAR:
                            raise el.PoleError("near a pole or zero")
                return val, False
            except el.PoleError:
                pass
        return self.expo(x, y, complex(u) + 1j * POLE_SHIFT), True

    def expo_positive(self, x, y, v, check=True):
        """``e_{(x,y)}(2iK' + v)`` as a positive real."""
        if self.ctx.massless:
            raise ValueError("the line 2iK' + R needs k > 0")
        N = self.graph.lift_difference(x, y)
        if N.sum() % 2:
            raise GraphError("expo_positive needs vertices of the same parity")
        val = expo_lift(N, self.alphas, 2j * self.ctx.K_prime + v, self.ctx)
        if check and abs(val.imag) > 1e-11 * abs(val):
            raise ArithmeticError(f"imaginary residue {abs(val.imag / val):.3e}")
        if val.real <= 0:
            raise ArithmeticError("exponential not positive on the line 2iK' + R")
        return val.real


def _canonical(v, mid, K):
    """Representative of ``v`` modulo ``4K`` within ``2K`` of ``mid``, then of ``mid`` in ``[-2K, 2K)``."""
    P = 4 * K
    shift = P * math.floor((mid + 2 * K) / P)
    return v - shift


def sign_changes(signs):
    """Number of sign changes around a closed sequence (zeros are skipped)."""
    s = np.asarray(signs)
    s = s[s != 0]
    if s.size == 0:
        return 0
    return int(np.sum(s != np.roll(s, 1)))
