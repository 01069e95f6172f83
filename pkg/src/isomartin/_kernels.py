"""Hot numeric kernels: complex Jacobi functions and exponential products.

Every kernel exists twice: a scalar-loop version compiled with numba and a
vectorised numpy version.  Both take the same arguments; the public dispatch
names at the bottom pick one according to ``ISOMARTIN_NUMBA`` and, when numba
is enabled, the array length.

All kernels assume ``0 < k < 1``; the trigonometric case ``k = 0`` is handled by
the callers in :mod:`isomartin.elliptic`.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

_AGM_MAX = 16


def agm_table(k):
    """Descending Landen table ``(a, c, n)`` for modulus `k`.

    ``a[i]`` and ``c[i]`` are the arithmetic means and half differences of the
    AGM started at ``(1, k')``; ``n`` is the last index used.
    """
    a = np.zeros(_AGM_MAX + 1)
    c = np.zeros(_AGM_MAX + 1)
    a[0] = 1.0
    b = math.sqrt((1.0 - k) * (1.0 + k))
    c[0] = k
    n = 0
    while n < _AGM_MAX and abs(c[n]) > 1e-17 * a[n]:
        a[n + 1] = 0.5 * (a[n] + b)
        c[n + 1] = 0.5 * (a[n] - b)
        b = math.sqrt(a[n] * b)
        n += 1
    return a, c, n


# --------------------------------------------------------------------------
# scalar kernels (numba)

@njit
def _reduce(x, period):
    """Reduce `x` into ``[-period/2, period/2)``."""
    r = x - period * math.floor(x / period + 0.5)
    return r


@njit
def sncndn_real(x, k, a, c, n, K):
    """Real-argument ``sn, cn, dn`` by descending Landen transformation."""
    x = _reduce(x, 4.0 * K)
    phi = (2.0 ** n) * a[n] * x
    for i in range(n, 0, -1):
        phi = 0.5 * (phi + math.asin(c[i] / a[i] * math.sin(phi)))
    s = math.sin(phi)
    cc = math.cos(phi)
    kp2 = (1.0 - k) * (1.0 + k)
    d = math.sqrt(kp2 + k * k * cc * cc)
    return s, cc, d


@njit
def _cdiv(a, b):
    """Complex ``a / b`` by Smith's method, as numpy does; ``b = 0`` gives inf/nan."""
    br, bi = b.real, b.imag
    if abs(br) >= abs(bi):
        if br == 0.0 and bi == 0.0:
            return complex(a.real / abs(br), a.imag / abs(bi))
        rat = bi / br
        scl = 1.0 / (br + bi * rat)
        return complex((a.real + a.imag * rat) * scl, (a.imag - a.real * rat) * scl)
    rat = br / bi
    scl = 1.0 / (bi + br * rat)
    return complex((a.real * rat + a.imag) * scl, (a.imag * rat - a.real) * scl)


@njit
def _base(xr, yi, k, kp, K, Kp, ak, ck, nk, ap, cp, npp):
    """Addition-formula pieces at ``x + i y`` with ``|y| <= K'/2`` after the shift.

    Returns the real triples at ``x`` (modulus k) and ``y`` (modulus k') and the
    number ``m`` of ``iK'`` half-shifts that were removed from the imaginary part.
    """
    x = _reduce(xr, 4.0 * K)
    y = _reduce(yi, 4.0 * Kp)
    m = int(math.floor(y / Kp + 0.5))
    yy = y - m * Kp
    s, c, d = sncndn_real(x, k, ak, ck, nk, K)
    s1, c1, d1 = sncndn_real(yy, kp, ap, cp, npp, Kp)
    return s, c, d, s1, c1, d1, m


@njit
def _jacobi_scalar(ur, ui, k, kp, K, Kp, ak, ck, nk, ap, cp, npp):
    s, c, d, s1, c1, d1, m = _base(ur, ui, k, kp, K, Kp, ak, ck, nk, ap, cp, npp)
    den = complex(c1 * c1 + k * k * s * s * s1 * s1, 0.0)
    sn = _cdiv(complex(s * d1, c * d * s1 * c1), den)
    cn = _cdiv(complex(c * c1, -s * d * s1 * d1), den)
    dn = _cdiv(complex(d * c1 * d1, -k * k * s * c * s1), den)
    if m == 1 or m == -1:
        sg = 1.0 if m == 1 else -1.0
        sn2 = _cdiv(complex(1.0, 0.0), k * sn)
        cn2 = _cdiv(-1j * sg * dn, k * sn)
        dn2 = _cdiv(-1j * sg * cn, sn)
        return sn2, cn2, dn2
    if m == 2 or m == -2:
        return sn, -cn, -dn
    return sn, cn, dn


@njit
def _sc_scalar(ur, ui, k, kp, K, Kp, ak, ck, nk, ap, cp, npp):
    s, c, d, s1, c1, d1, m = _base(ur, ui, k, kp, K, Kp, ak, ck, nk, ap, cp, npp)
    if m == 1 or m == -1:
        den = complex(c1 * c1 + k * k * s * s * s1 * s1, 0.0)
        dn = _cdiv(complex(d * c1 * d1, -k * k * s * c * s1), den)
        if m == 1:
            return _cdiv(1j, dn)
        return _cdiv(-1j, dn)
    num = complex(s * d1, c * d * s1 * c1)
    den = complex(c * c1, -s * d * s1 * d1)
    r = _cdiv(num, den)
    if m == 2 or m == -2:
        return -r
    return r


@njit
def _jacobi_loop(ur, ui, k, kp, K, Kp, ak, ck, nk, ap, cp, npp):
    n = ur.shape[0]
    sn = np.empty(n, dtype=np.complex128)
    cn = np.empty(n, dtype=np.complex128)
    dn = np.empty(n, dtype=np.complex128)
    for i in range(n):
        a, b, c = _jacobi_scalar(ur[i], ui[i], k, kp, K, Kp, ak, ck, nk, ap, cp, npp)
        sn[i] = a
        cn[i] = b
        dn[i] = c
    return sn, cn, dn


@njit
def _sc_loop(ur, ui, k, kp, K, Kp, ak, ck, nk, ap, cp, npp):
    n = ur.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for i in range(n):
        out[i] = _sc_scalar(ur[i], ui[i], k, kp, K, Kp, ak, ck, nk, ap, cp, npp)
    return out


@njit
def _expo_loop(ur, ui, alphas, powers, k, kp, K, Kp, ak, ck, nk, ap, cp, npp):
    n = ur.shape[0]
    out = np.empty(n, dtype=np.complex128)
    pref = 1j * math.sqrt(kp)
    for i in range(n):
        acc = complex(1.0, 0.0)
        for j in range(alphas.shape[0]):
            p = powers[j]
            if p == 0:
                continue
            f = pref * _sc_scalar(0.5 * (ur[i] - alphas[j]), 0.5 * ui[i],
                                  k, kp, K, Kp, ak, ck, nk, ap, cp, npp)
            if p < 0:
                f = _cdiv(complex(1.0, 0.0), f)
                p = -p
            # binary powering keeps the rounding of numpy's integer power
            r = complex(1.0, 0.0)
            while p > 0:
                if p & 1:
                    r = r * f
                f = f * f
                p >>= 1
            acc = acc * r
        out[i] = acc
    return out


# --------------------------------------------------------------------------
# vectorised numpy kernels

def _sncndn_real_vec(x, k, a, c, n, K):
    x = x - 4.0 * K * np.floor(x / (4.0 * K) + 0.5)
    phi = (2.0 ** n) * a[n] * x
    for i in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[i] / a[i] * np.sin(phi)))
    s = np.sin(phi)
    cc = np.cos(phi)
    d = np.sqrt((1.0 - k) * (1.0 + k) + k * k * cc * cc)
    return s, cc, d


def _base_vec(ur, ui, k, kp, K, Kp, ak, ck, nk, ap, cp, npp):
    y = ui - 4.0 * Kp * np.floor(ui / (4.0 * Kp) + 0.5)
    m = np.floor(y / Kp + 0.5).astype(np.int64)
    yy = y - m * Kp
    s, c, d = _sncndn_real_vec(ur, k, ak, ck, nk, K)
    s1, c1, d1 = _sncndn_real_vec(yy, kp, ap, cp, npp, Kp)
    return s, c, d, s1, c1, d1, m


def _jacobi_vec(ur, ui, k, kp, K, Kp, ak, ck, nk, ap, cp, npp):
    s, c, d, s1, c1, d1, m = _base_vec(ur, ui, k, kp, K, Kp, ak, ck, nk, ap, cp, npp)
    den = c1 * c1 + k * k * s * s * s1 * s1
    sn = (s * d1 + 1j * c * d * s1 * c1) / den
    cn = (c * c1 - 1j * s * d * s1 * d1) / den
    dn = (d * c1 * d1 - 1j * k * k * s * c * s1) / den
    odd = (m == 1) | (m == -1)
    if np.any(odd):
        sg = np.where(m == 1, 1.0, -1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            sn_o = 1.0 / (k * sn)
            cn_o = -1j * sg * dn / (k * sn)
            dn_o = -1j * sg * cn / sn
        sn = np.where(odd, sn_o, sn)
        cn, dn = np.where(odd, cn_o, cn), np.where(odd, dn_o, dn)
    even = (m == 2) | (m == -2)
    cn = np.where(even, -cn, cn)
    dn = np.where(even, -dn, dn)
    return sn, cn, dn


def _sc_vec(ur, ui, k, kp, K, Kp, ak, ck, nk, ap, cp, npp):
    s, c, d, s1, c1, d1, m = _base_vec(ur, ui, k, kp, K, Kp, ak, ck, nk, ap, cp, npp)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (s * d1 + 1j * c * d * s1 * c1) / (c * c1 - 1j * s * d * s1 * d1)
        den = c1 * c1 + k * k * s * s * s1 * s1
        dn = (d * c1 * d1 - 1j * k * k * s * c * s1) / den
        r = np.where(m == 1, 1j / dn, r)
        r = np.where(m == -1, -1j / dn, r)
    r = np.where((m == 2) | (m == -2), -r, r)
    return r


def _expo_vec(ur, ui, alphas, powers, k, kp, K, Kp, ak, ck, nk, ap, cp, npp):
    out = np.ones(ur.shape[0], dtype=np.complex128)
    pref = 1j * math.sqrt(kp)
    for alpha, p in zip(alphas, powers):
        if p == 0:
            continue
        f = pref * _sc_vec(0.5 * (ur - alpha), 0.5 * ui, k, kp, K, Kp, ak, ck, nk, ap, cp, npp)
        if p < 0:
            f = 1.0 / f
        out *= f ** abs(int(p))
    return out


# Without SVML the compiled loops call scalar libm, while numpy uses SIMD
# transcendentals; the loops only win on short arrays (see the benchmark).
NUMBA_MAX_LEN = 512


def _by_size(loop, vec):
    def kernel(ur, *args):
        return loop(ur, *args) if ur.shape[0] <= NUMBA_MAX_LEN else vec(ur, *args)

    kernel.__name__ = vec.__name__.replace("_vec", "_kernel")
    return kernel


if USE_NUMBA:
    jacobi_kernel = _by_size(_jacobi_loop, _jacobi_vec)
    sc_kernel = _by_size(_sc_loop, _sc_vec)
    expo_kernel = _by_size(_expo_loop, _expo_vec)
else:
    jacobi_kernel = _jacobi_vec
    sc_kernel = _sc_vec
    expo_kernel = _expo_vec

KERNELS = {
    "numba": (_jacobi_loop, _sc_loop, _expo_loop),
    "numpy": (_jacobi_vec, _sc_vec, _expo_vec),
}
