"""Elliptic integrals and Jacobi elliptic functions at real and complex arguments.

The modulus convention is the one of Abramowitz & Stegun: ``k`` is the modulus,
``k' = sqrt(1 - k^2)`` the complementary modulus, ``K = K(k)``, ``K' = K(k')``.

Complex evaluation combines a descending Landen transformation for the real
part with Jacobi's imaginary transformation and the addition formulas; the
kernels live in :mod:`isomartin._kernels`.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import _kernels

POLE_TOL = 1e-12
POLE_GUARD = 1e-6
QUAD_TOL = 1e-13


class PoleError(ArithmeticError):
    """Raised when a Jacobi quotient is evaluated at (or too close to) a pole."""


# --------------------------------------------------------------------------
# Carlson symmetric integrals

def carlson_rf(x, y, z):
    """Carlson's symmetric integral R_F(x, y, z) by duplication."""
    xt, yt, zt = float(x), float(y), float(z)
    if min(xt, yt, zt) < 0 or min(xt + yt, xt + zt, yt + zt) == 0:
        raise ValueError("invalid arguments for R_F")
    for _ in range(100):
        sx, sy, sz = math.sqrt(xt), math.sqrt(yt), math.sqrt(zt)
        lam = sx * (sy + sz) + sy * sz
        xt, yt, zt = 0.25 * (xt + lam), 0.25 * (yt + lam), 0.25 * (zt + lam)
        ave = (xt + yt + zt) / 3.0
        dx, dy, dz = (ave - xt) / ave, (ave - yt) / ave, (ave - zt) / ave
        if max(abs(dx), abs(dy), abs(dz)) < 1e-4:
            break
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    return (1.0 + (e2 / 24.0 - 0.1 - 3.0 / 44.0 * e3) * e2 + e3 / 14.0) / math.sqrt(ave)


def carlson_rd(x, y, z):
    """Carlson's symmetric integral R_D(x, y, z) by duplication."""
    xt, yt, zt = float(x), float(y), float(z)
    if min(xt, yt) < 0 or xt + yt == 0 or zt <= 0:
        raise ValueError("invalid arguments for R_D")
    total, fac = 0.0, 1.0
    for _ in range(100):
        sx, sy, sz = math.sqrt(xt), math.sqrt(yt), math.sqrt(zt)
        lam = sx * (sy + sz) + sy * sz
        total += fac / (sz * (zt + lam))
        fac *= 0.25
        xt, yt, zt = 0.25 * (xt + lam), 0.25 * (yt + lam), 0.25 * (zt + lam)
        ave = 0.2 * (xt + yt + 3.0 * zt)
        dx, dy, dz = (ave - xt) / ave, (ave - yt) / ave, (ave - zt) / ave
        if max(abs(dx), abs(dy), abs(dz)) < 1e-4:
            break
    ea = dx * dy
    eb = dz * dz
    ec = ea - eb
    ed = ea - 6.0 * eb
    ee = ed + 2.0 * ec
    c3, c4 = 9.0 / 22.0, 3.0 / 26.0
    series = (1.0 + ed * (-3.0 / 14.0 + 0.25 * c3 * ed - 1.5 * c4 * dz * ee)
              + dz * (ee / 6.0 + dz * (-c3 * ec + dz * c4 * ea)))
    return 3.0 * total + fac * series / (ave * math.sqrt(ave))


def ellipk(k):
    """Complete elliptic integral of the first kind K(k)."""
    if not 0.0 <= k < 1.0:
        raise ValueError(f"modulus must lie in [0, 1), got {k!r}")
    return carlson_rf(0.0, (1.0 - k) * (1.0 + k), 1.0)


def ellipe(k):
    """Complete elliptic integral of the second kind E(k), for k in [0, 1]."""
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"modulus must lie in [0, 1], got {k!r}")
    if k == 1.0:
        return 1.0
    kp2 = (1.0 - k) * (1.0 + k)
    return carlson_rf(0.0, kp2, 1.0) - k * k / 3.0 * carlson_rd(0.0, kp2, 1.0)


# --------------------------------------------------------------------------
# context

@dataclass(frozen=True, eq=False)
class EllipticContext:
    """A fixed modulus with its derived constants.

    ``K_prime`` is ``inf`` at ``k = 0``; everything that needs the imaginary
    period (torus reduction, the line ``2iK' + R``) requires ``k > 0``.
    """

    k: float
    k_prime: float
    K: float
    K_prime: float
    E: float
    E_prime: float
    _tab_k: tuple = field(repr=False)
    _tab_kp: tuple = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def massless(self):
        return self.k == 0.0

    def to_elliptic(self, angle):
        """Convert a geometric angle (radians) to elliptic units, ``angle * 2K/pi``."""
        return np.asarray(angle) * (2.0 * self.K / math.pi)

    def to_geometric(self, u):
        return np.asarray(u) * (math.pi / (2.0 * self.K))


def make_context(k):
    """Build the :class:`EllipticContext` of modulus `k` in ``[0, 1)``."""
    k = float(k)
    if not 0.0 <= k < 1.0 or math.isnan(k):
        raise ValueError(f"modulus must lie in [0, 1), got {k!r}")
    kp = math.sqrt((1.0 - k) * (1.0 + k))
    K = ellipk(k)
    E = ellipe(k)
    if k == 0.0:
        Kp = math.inf
        Ep = 1.0
    else:
        Kp = ellipk(kp)
        Ep = ellipe(kp)
    return EllipticContext(k=k, k_prime=kp, K=K, K_prime=Kp, E=E, E_prime=Ep,
                           _tab_k=_kernels.agm_table(k), _tab_kp=_kernels.agm_table(kp))


def _kargs(ctx):
    ak, ck, nk = ctx._tab_k
    ap, cp, npp = ctx._tab_kp
    return (ctx.k, ctx.k_prime, ctx.K, ctx.K_prime, ak, ck, nk, ap, cp, npp)


# --------------------------------------------------------------------------
# torus

@dataclass(frozen=True)
class TorusPoint:
    """A point of the torus C / (4K Z + 4iK' Z), stored in canonical form."""

    u: complex

    @classmethod
    def from_complex(cls, u, ctx):
        return cls(reduce_torus(u, ctx))


def reduce_torus(u, ctx):
    """Canonical representative with ``Re u`` in [0, 4K) and ``Im u`` in [0, 4K')."""
    if ctx.massless:
        raise ValueError("torus reduction needs k > 0")
    u = complex(u)
    pr, pi = 4.0 * ctx.K, 4.0 * ctx.K_prime
    x = u.real - pr * math.floor(u.real / pr)
    y = u.imag - pi * math.floor(u.imag / pi)
    if x >= pr:
        x = 0.0
    if y >= pi:
        y = 0.0
    return complex(x, y)


# --------------------------------------------------------------------------
# Jacobi functions

def _as_complex_array(u):
    arr = np.asarray(u, dtype=np.complex128)
    return arr, arr.ndim == 0


def jacobi(u, ctx):
    """Return ``(sn, cn, dn)`` at the (complex) argument(s) `u`."""
    arr, scalar = _as_complex_array(u)
    flat = arr.ravel()
    if ctx.massless:
        sn, cn, dn = np.sin(flat), np.cos(flat), np.ones_like(flat)
    else:
        sn, cn, dn = _kernels.jacobi_kernel(np.ascontiguousarray(flat.real),
                                            np.ascontiguousarray(flat.imag), *_kargs(ctx))
    if scalar:
        return complex(sn[0]), complex(cn[0]), complex(dn[0])
    return sn.reshape(arr.shape), cn.reshape(arr.shape), dn.reshape(arr.shape)


def jacobi_real(x, ctx):
    """Fast real-argument ``(sn, cn, dn)`` for a scalar `x`."""
    if ctx.massless:
        return math.sin(x), math.cos(x), 1.0
    ak, ck, nk = ctx._tab_k
    return _kernels.sncndn_real(float(x), ctx.k, ak, ck, nk, ctx.K)


def sc(u, ctx):
    """``sn/cn`` evaluated without forming the quotient near ``iK'``.

    Raises :class:`PoleError` at the zeros of ``cn``.
    """
    arr, scalar = _as_complex_array(u)
    flat = arr.ravel()
    if ctx.massless:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.tan(flat)
        bad = np.abs(np.cos(flat)) < POLE_TOL
    else:
        out = _kernels.sc_kernel(np.ascontiguousarray(flat.real),
                                 np.ascontiguousarray(flat.imag), *_kargs(ctx))
        bad = ~np.isfinite(out) | (np.abs(out) > 1.0 / POLE_TOL)
    if np.any(bad):
        raise PoleError(f"sc evaluated at a pole: u={flat[np.argmax(bad)]!r}")
    if scalar:
        return complex(out[0])
    return out.reshape(arr.shape)


def _quotient(num, den, name):
    den = np.asarray(den)
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError(f"{name} evaluated at a pole")
    return num / den


def dc(u, ctx):
    s, c, d = jacobi(u, ctx)
    return _quotient(d, c, "dc")


def nc(u, ctx):
    s, c, d = jacobi(u, ctx)
    return _quotient(1.0, c, "nc")


def ns(u, ctx):
    s, c, d = jacobi(u, ctx)
    return _quotient(1.0, s, "ns")


def sc_real(x, ctx):
    """Real ``sc`` for a scalar real argument."""
    s, c, _ = jacobi_real(x, ctx)
    if abs(c) < POLE_TOL:
        raise PoleError(f"sc evaluated at a pole: x={x!r}")
    return s / c


def dc_real(x, ctx):
    _, c, d = jacobi_real(x, ctx)
    if abs(c) < POLE_TOL:
        raise PoleError(f"dc evaluated at a pole: x={x!r}")
    return d / c


# --------------------------------------------------------------------------
# integrals

def big_F(x, ctx):
    """Incomplete integral of the first kind with modular-sine argument.

    Returns ``v`` with ``sn(v) = x``; ``big_F(1) = K``.
    """
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"argument must lie in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return ctx.K
    return x * carlson_rf((1.0 - x) * (1.0 + x), 1.0 - (ctx.k * x) ** 2, 1.0)


def jacobi_epsilon(u, ctx):
    """Jacobi's epsilon function, the integral of dn^2 from 0 to `u`."""
    if ctx.massless:
        return float(u)
    val, _ = integrate.quad(lambda v: jacobi_real(v, ctx)[2] ** 2, 0.0, float(u),
                            epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return val


def Dc(u, ctx):
    """Integral of dc^2 from 0 to `u` (analytic continuation past ``u = K``)."""
    u = float(u)
    if u < 0:
        return -Dc(-u, ctx)
    K = ctx.K
    r = u - 2.0 * K * math.floor(u / (2.0 * K))
    if abs(r - K) < POLE_GUARD:
        raise PoleError(f"Dc too close to the dc pole: u={u!r}")
    if u < K:
        val, _ = integrate.quad(lambda v: dc_real(v, ctx) ** 2, 0.0, u,
                                epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
        return val
    s, c, d = jacobi_real(u, ctx)
    return u - jacobi_epsilon(u, ctx) + d * s / c


def A_func(u, ctx):
    """``A(u|k) = (Dc(u) + (E - K) u / K) / k'``; cached per context."""
    u = float(u)
    key = ("A", u)
    cache = ctx._cache
    if key in cache:
        return cache[key]
    if ctx.massless:
        val = math.tan(u)
    else:
        val = (Dc(u, ctx) + (ctx.E - ctx.K) / ctx.K * u) / ctx.k_prime
    cache[key] = val
    return val

