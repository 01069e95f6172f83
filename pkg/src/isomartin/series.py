"""Exact rational power series for the triangular-lattice functions ``s(k)`` and ``t(k)``.

``s`` is the power-series root of ``k^2 s^4 - 2 k^2 s^3 + 2 s - 1 = 0`` with
``s(0) = 1/2`` and ``t`` the root of

    -27 (1 - k^2) t^4 + 18 (1 - k^2) t^2 + 2 (2 - k^2)^2 t + 1 - k^2 + k^4 = 0

with ``t(0) = 1``.  Both are even in ``k``; the algebraic routes run in
``x = k^2`` and are lifted back by composition with ``k^2``.  Every route is
exact (:class:`fractions.Fraction`); only the moment integral and the
substitution identities are checked in floating point.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import mpmath

ZERO = Fraction(0)
ONE = Fraction(1)


class CertificationError(AssertionError):
    """A certified identity failed; the message names the first offending index."""


@dataclass(frozen=True)
class RationalSeries:
    """Truncated power series ``sum_{n <= order} c_n X^n`` with exact coefficients."""

    coeffs: tuple
    order: int

    def __post_init__(self):
        c = tuple(Fraction(v) for v in self.coeffs[:self.order + 1])
        c = c + (ZERO,) * (self.order + 1 - len(c))
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def constant(cls, c, order):
        return cls((c,), order)

    @classmethod
    def variable(cls, order):
        return cls((0, 1), order)

    def __getitem__(self, n):
        return self.coeffs[n] if 0 <= n <= self.order else ZERO

    def __len__(self):
        return self.order + 1

    def _coerce(self, other):
        if isinstance(other, RationalSeries):
            return other
        return RationalSeries.constant(other, self.order)

    def __add__(self, other):
        o = self._coerce(other)
        n = min(self.order, o.order)
        return RationalSeries(tuple(self[i] + o[i] for i in range(n + 1)), n)

    __radd__ = __add__

    def __neg__(self):
        return RationalSeries(tuple(-c for c in self.coeffs), self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, RationalSeries):
            f = Fraction(other)
            return RationalSeries(tuple(c * f for c in self.coeffs), self.order)
        n = min(self.order, other.order)
        a = [i for i in range(n + 1) if self[i]]
        b = [j for j in range(n + 1) if other[j]]
        out = [ZERO] * (n + 1)
        for i in a:
            ci = self[i]
            for j in b:
                if i + j > n:
                    break
                out[i + j] += ci * other[j]
        return RationalSeries(tuple(out), n)

    __rmul__ = __mul__

    def __pow__(self, p):
        out = RationalSeries.constant(1, self.order)
        base = self
        while p:
            if p & 1:
                out = out * base
            base = base * base
            p >>= 1
        return out

    def truncate(self, order):
        return RationalSeries(self.coeffs, min(order, self.order))

    def shift(self, m):
        """Multiply by ``X^m``."""
        return RationalSeries((ZERO,) * m + self.coeffs, self.order + m)

    def derivative(self):
        return RationalSeries(tuple(i * self[i] for i in range(1, self.order + 1)), self.order - 1)

    def inverse(self):
        """``1 / self`` by Newton iteration; needs a non-zero constant term."""
        if self[0] == 0:
            raise ZeroDivisionError("series has no constant term")
        g = RationalSeries.constant(1 / self[0], 0)
        prec = 1
        while prec <= self.order:
            prec = min(2 * prec, self.order + 1)
            f = self.truncate(prec - 1)
            g = RationalSeries(g.coeffs, prec - 1)
            g = g * (2 - f * g)
        return RationalSeries(g.coeffs, self.order)

    def __truediv__(self, other):
        if isinstance(other, RationalSeries):
            return self * other.inverse()
        return self * (ONE / Fraction(other))

    def compose_square(self):
        """``c(X^2)`` as a series of order ``2 * order``."""
        out = [ZERO] * (2 * self.order + 1)
        for i, c in enumerate(self.coeffs):
            out[2 * i] = c
        return RationalSeries(tuple(out), 2 * self.order)

    def evaluate(self, x):
        """Floating evaluation of the truncated polynomial (Horner, mpmath precision)."""
        acc = mpmath.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * x + mpmath.mpf(c.numerator) / c.denominator
        return acc

    def as_strings(self):
        """Coefficients as ``"p/q"`` strings."""
        return [f"{c.numerator}/{c.denominator}" for c in self.coeffs]


def _newton_root(poly_and_derivative, seed, order):
    """Series root of ``F(x, y) = 0`` with ``y(0) = seed`` by order doubling.

    `poly_and_derivative(y)` returns the series ``F(x, y)`` and ``dF/dy``.
    """
    y = RationalSeries.constant(seed, 0)
    prec = 1
    while prec <= order:
        prec = min(2 * prec, order + 1)
        y = RationalSeries(y.coeffs, prec - 1)
        F, dF = poly_and_derivative(y)
        y = y - F / dF
    return RationalSeries(y.coeffs, order)


def _even_order(N):
    if N < 1:
        raise ValueError("order must be at least 1")
    return N // 2


# --------------------------------------------------------------------------
# s routes

def s_by_newton(N):
    """``s`` through ``k^N`` from the quartic by Newton iteration in ``x = k^2``."""
    M = _even_order(N)

    def F(y):
        x = RationalSeries.variable(y.order)
        y3 = y ** 3
        return x * (y3 * y) - 2 * x * y3 + 2 * y - 1, 4 * x * y3 - 6 * x * (y * y) + 2

    return _newton_root(F, Fraction(1, 2), M).compose_square().truncate(N)


def s_by_recurrence(N):
    """``s`` through ``k^N`` from the three-term recurrence seeded with ``1/2, 3/32``."""
    c = [ZERO] * (N + 1)
    c[0] = Fraction(1, 2)
    if N >= 2:
        c[2] = Fraction(3, 32)
    for n in range(0, N - 3, 2):
        lhs = (3 * n + 10) * (3 * n + 14) * (n + 2)
        rhs = 2 * (9 * n ** 3 + 54 * n ** 2 + 106 * n + 70) * c[n + 2] - n * (3 * n + 2) * (3 * n + 4) * c[n]
        c[n + 4] = rhs / lhs
    return RationalSeries(tuple(c), N)


def hypergeometric_2f1(a, b, c, M):
    """``2F1(a, b; c; x)`` through ``x^M`` with exact Pochhammer ratios."""
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    out = [ONE]
    term = ONE
    for n in range(M):
        term = term * (a + n) * (b + n) / ((c + n) * (n + 1))
        out.append(term)
    return RationalSeries(tuple(out), M)


def H_series(N):
    """``H = (k / 4) 2F1(1/2, 5/6; 5/3; k^2)`` through ``k^N``."""
    F = hypergeometric_2f1(Fraction(1, 2), Fraction(5, 6), Fraction(5, 3), _even_order(N))
    return (F * Fraction(1, 4)).compose_square().shift(1).truncate(N)


def _H2_in_x(M):
    """``H^2`` as a series in ``x = k^2`` through ``x^M``."""
    F = hypergeometric_2f1(Fraction(1, 2), Fraction(5, 6), Fraction(5, 3), M)
    return (F * F * Fraction(1, 16)).shift(1).truncate(M)


def s_by_hypergeometric(N):
    """``s = 1/2 + (3/2) H^2`` through ``k^N``."""
    M = _even_order(N)
    return (_H2_in_x(M) * Fraction(3, 2) + Fraction(1, 2)).compose_square().truncate(N)


def s_coeff_lagrange(n):
    """``s_{2n}`` from the alternating binomial sum (``n >= 1``)."""
    if n < 1:
        raise ValueError("the binomial formula holds for n >= 1")
    total = sum(comb(3 * n, i) * comb(n, i + 1) * (-3) ** (i + 1) for i in range(n + 1))
    return Fraction((-1) ** n * total, n * 2 ** (4 * n + 1))


# --------------------------------------------------------------------------
# t routes

def t_by_newton(N):
    """``t`` through ``k^N`` from its quartic by Newton iteration in ``x = k^2``."""
    M = _even_order(N)

    def F(y):
        x = RationalSeries.variable(y.order)
        one_x = 1 - x
        y2 = y * y
        a = (2 - x) ** 2
        val = -27 * one_x * (y2 * y2) + 18 * one_x * y2 + 2 * a * y + (1 - x + x * x)
        der = -108 * one_x * (y2 * y) + 36 * one_x * y + 2 * a
        return val, der

    return _newton_root(F, ONE, M).compose_square().truncate(N)


def t_by_hypergeometric(N):
    """``t = (1 + 3 H^4) / (1 - 9 H^4)`` through ``k^N``."""
    M = _even_order(N)
    H4 = _H2_in_x(M) ** 2
    return ((1 + 3 * H4) / (1 - 9 * H4)).compose_square().truncate(N)


def t_routes(N):
    return t_by_newton(N), t_by_hypergeometric(N)


# --------------------------------------------------------------------------
# closed forms used by the floating checks

def s_closed(k):
    """``s(k)`` from the hypergeometric closed form (mpmath precision)."""
    H = k / 4 * mpmath.hyp2f1(0.5, mpmath.mpf(5) / 6, mpmath.mpf(5) / 3, k * k)
    return mpmath.mpf(0.5) + 1.5 * H * H


def t_closed(k):
    H = k / 4 * mpmath.hyp2f1(0.5, mpmath.mpf(5) / 6, mpmath.mpf(5) / 3, k * k)
    H4 = H ** 4
    return (1 + 3 * H4) / (1 - 9 * H4)


def covering(x):
    """``phi(x) = x (x + 2)^3 / (2x + 1)^3``."""
    return x * (x + 2) ** 3 / (2 * x + 1) ** 3


def moment_integral(n, dps=30):
    """``s_{2n}`` as the ``n``-th moment of the explicit density on ``[0, 1]`` (tanh-sinh)."""
    with mpmath.workdps(dps):
        c2 = mpmath.cbrt(2)
        pref = mpmath.sqrt(3) * c2 / mpmath.pi

        def f(x):
            num = (x - 1) ** 2 * (c2 - mpmath.cbrt(x * x + x)) * mpmath.cbrt(x + 1)
            den = (x + 2) * (2 * x + 1) ** 2 * x ** (mpmath.mpf(2) / 3)
            return num / den * covering(x) ** n

        return pref * mpmath.quad(f, [0, 1], method="tanh-sinh")


def ode_residual(s):
    """``L s - (4 - 2k^2)`` through order ``N - 4`` for the third-order operator ``L``."""
    N = s.order
    k = RationalSeries.variable(N)
    k2 = k * k
    d1 = s.derivative()
    d2 = d1.derivative()
    d3 = d2.derivative()
    t3 = 9 * (k2 * k) * (k2 - 1) ** 2 * d3
    t2 = 9 * k2 * (k2 - 1) * (5 * k2 - 1) * d2
    t1 = k * (35 * k2 * k2 - 14 * k2 - 13) * d1
    t0 = -4 * (k2 - 2) * s
    res = (t3 + t2 + t1 + t0) - (4 - 2 * k2)
    return res.truncate(N - 4)


# --------------------------------------------------------------------------
# certification

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    verified_through: int
    witness: str = ""


@dataclass
class CertificationReport:
    order: int
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, first_bad, through, witness=""):
        self.checks.append(Check(name, first_bad is None, through if first_bad is None else first_bad, witness))

    def text(self):
        lines = [f"# certification through k^{self.order}"]
        for c in self.checks:
            status = "ok" if c.passed else "FAIL"
            label = "through" if c.passed else "first failure at"
            lines.append(f"{c.name}: {status} ({label} {c.verified_through}) {c.witness}".rstrip())
        return "\n".join(lines) + "\n"


def _first(pred, indices):
    for i in indices:
        if not pred(i):
            return i
    return None


DISPLAYED_S = {0: Fraction(1, 2), 2: Fraction(3, 32), 4: Fraction(3, 64), 6: Fraction(123, 4096),
               8: Fraction(177, 8192), 10: Fraction(34887, 2097152)}
DISPLAYED_T = {0: ONE, 2: ZERO, 4: Fraction(3, 64), 6: Fraction(3, 64), 8: Fraction(711, 16384),
               10: Fraction(327, 8192)}


def certify(N=200, lagrange_max=50, moments=10, strict=True):
    """Run every exact and floating check through order `N`.

    Raises :class:`CertificationError` on the first failed check when `strict`.
    """
    if N < 12:
        raise ValueError("certification needs N >= 12")
    rep = CertificationReport(order=N)
    s1, s2, s3 = s_by_newton(N), s_by_recurrence(N), s_by_hypergeometric(N)
    t1, t2 = t_routes(N)
    idx = range(N + 1)
    rep.add("s newton = recurrence", _first(lambda i: s1[i] == s2[i], idx), N)
    rep.add("s newton = hypergeometric", _first(lambda i: s1[i] == s3[i], idx), N)
    nl = min(lagrange_max, N // 2)
    rep.add("s newton = binomial sum", _first(lambda n: s1[2 * n] == s_coeff_lagrange(n), range(1, nl + 1)), nl)
    rep.add("t newton = hypergeometric", _first(lambda i: t1[i] == t2[i], idx), N)
    rep.add("s odd coefficients vanish", _first(lambda i: s1[i] == 0, range(1, N + 1, 2)), N)
    rep.add("s displayed coefficients", _first(lambda i: s1[i] == DISPLAYED_S[i], sorted(DISPLAYED_S)), 10)
    rep.add("t displayed coefficients", _first(lambda i: t1[i] == DISPLAYED_T[i], sorted(DISPLAYED_T)), 10)
    rep.add("s_2n positive", _first(lambda n: s1[2 * n] > 0, range(N // 2 + 1)), N // 2)
    rep.add("t_n non-negative", _first(lambda i: t1[i] >= 0, idx), N)
    c = [s1[2 * n] for n in range(N // 2 + 1)]
    rep.add("log-convexity", _first(lambda n: c[n + 1] * c[n - 1] >= c[n] ** 2, range(1, len(c) - 1)),
            len(c) - 2)
    diffs = c
    bad = None
    for order in range(1, 6):
        diffs = [diffs[i] - diffs[i + 1] for i in range(len(diffs) - 1)]
        j = _first(lambda i: diffs[i] >= 0, range(len(diffs)))
        if j is not None:
            bad = 1000 * order + j
            break
    rep.add("finite differences up to order 5", bad, len(c) - 6, "(index = 1000*order + n)")
    res = ode_residual(s1)
    rep.add("differential equation", _first(lambda i: res[i] == 0, range(res.order + 1)), res.order)
    worst = 0.0
    bad = None
    for n in range(moments + 1):
        err = abs(float(moment_integral(n)) - float(c[n]))
        worst = max(worst, err)
        if err > 1e-9 and bad is None:
            bad = n
    rep.add("moment integral", bad, moments, f"max err {worst:.2e}")
    worst = 0.0
    bad = None
    with mpmath.workdps(30):
        for i, x in enumerate(mpmath.mpf(j) / 10 for j in range(1, 10)):
            k = mpmath.sqrt(covering(x))
            e1 = abs(s_closed(k) - (2 * x + 1) / (x + 2))
            e2 = abs(t_closed(k) - (x * x + x + 1) / (1 + x - 2 * x * x))
            worst = max(worst, float(e1), float(e2))
            if max(e1, e2) > 1e-11 and bad is None:
                bad = i
    rep.add("substitution identities", bad, 9, f"max err {worst:.2e}")
    if strict and not rep.passed:
        failed = [ch for ch in rep.checks if not ch.passed][0]
        raise CertificationError(f"{failed.name} failed at index {failed.verified_through}")
    return rep
