"""Periodic graphs: Fourier symbol, spectral curve, amoeba oval and parameter maps.

For a graph with periods ``T1, T2`` and fundamental domain ``V``, a function
``f(v, n) = c_v z^{n1} w^{n2}`` is mapped by the Laplacian to
``S(z, w) c``; ``P = det S`` is the characteristic polynomial.  The oval is
the bounded component of the complement of the amoeba
``{(log|z|, log|w|) : P(z, w) = 0}`` containing the origin; it is the set
where ``P(e^a, e^b) > 0``.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import elliptic as el
from .exponential import ExponentialEvaluator, expo_lift
from . import laplacian as lap
from .laplacian import assemble

FOURIER_TOL = 1e-11
FOURIER_MAX = 4096


class SpectralError(ArithmeticError):
    """A spectral computation failed to converge or was ill-posed."""


# --------------------------------------------------------------------------
# Fourier symbol

@dataclass(frozen=True, eq=False)
class FourierSymbol:
    """Laurent-polynomial matrix ``S(z, w)`` and its determinant ``P``.

    Attributes
    ----------
    entries : dict
        ``(r, s) -> {(n1, n2): coefficient}``.
    masses : ndarray
        Squared mass at each fundamental-domain vertex.
    """

    size: int
    entries: dict
    masses: np.ndarray
    graph: object
    ctx: object

    def matrix(self, z, w):
        """``S(z, w)`` for broadcastable arrays; shape ``(..., size, size)``."""
        z = np.asarray(z, dtype=np.complex128)
        w = np.asarray(w, dtype=np.complex128)
        shape = np.broadcast(z, w).shape
        out = np.zeros(shape + (self.size, self.size), dtype=np.complex128)
        for (r, s), terms in self.entries.items():
            for (n1, n2), c in terms.items():
                out[..., r, s] += c * z ** n1 * w ** n2
        return out

    def P(self, z, w):
        """Characteristic polynomial ``det S(z, w)``."""
        m = self.matrix(z, w)
        return np.linalg.det(m) if self.size > 1 else m[..., 0, 0]

    @property
    def coefficients(self):
        """Laurent coefficients ``{(i, j): c}`` of ``P``, recovered exactly by FFT."""
        deg = 2 * self.size + 1
        M = 2 * deg + 2
        ang = 2 * math.pi * np.arange(M) / M
        Z, W = np.meshgrid(np.exp(1j * ang), np.exp(1j * ang), indexing="ij")
        vals = self.P(Z, W)
        c = np.fft.fft2(vals) / M ** 2
        scale = np.max(np.abs(c))
        out = {}
        for i in range(M):
            for j in range(M):
                if abs(c[i, j]) > 1e-13 * scale:
                    ii = i if i <= M // 2 else i - M
                    jj = j if j <= M // 2 else j - M
                    out[(ii, jj)] = c[i, j].real if abs(c[i, j].imag) < 1e-13 * scale else c[i, j]
        return out

    def P_real(self, a, b):
        """``P(e^a, e^b)`` and its gradient in ``(a, b)`` from the Laurent coefficients."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        val = np.zeros(np.broadcast(a, b).shape)
        ga = np.zeros_like(val)
        gb = np.zeros_like(val)
        for (i, j), c in self._real_coeffs:
            term = c * np.exp(i * a + j * b)
            val = val + term
            ga = ga + i * term
            gb = gb + j * term
        return val, ga, gb

    @property
    def _real_coeffs(self):
        key = "_rc"
        if key not in self.__dict__:
            self.__dict__[key] = [(k, float(np.real(v))) for k, v in sorted(self.coefficients.items())]
        return self.__dict__[key]


def fourier_symbol(graph, ctx, op=None):
    """Assemble ``S(z, w)`` from the edges of the fundamental-domain vertices.

    The representatives must be interior vertices of the window.
    """
    if not graph.is_periodic:
        raise ValueError("graph has no declared periods")
    op = assemble(graph, ctx) if op is None else op
    reps = [graph.index(rep) for rep in graph.domain]
    entries = {}
    masses = np.empty(len(reps))
    for r, x in enumerate(reps):
        if op.position[x] < 0:
            raise ValueError("fundamental-domain vertex is not interior; enlarge the window")
        masses[r] = op.mass[x]
        nbr, eid = graph.neighbours(x)
        diag = entries.setdefault((r, r), {})
        diag[(0, 0)] = diag.get((0, 0), 0.0) + masses[r] + op.rho[eid].sum()
        for z, e in zip(nbr, eid):
            s, n1, n2 = graph.decompose(graph.lifts[z])
            cell = entries.setdefault((r, s), {})
            cell[(n1, n2)] = cell.get((n1, n2), 0.0) - op.rho[e]
    return FourierSymbol(size=len(reps), entries=entries, masses=masses, graph=graph, ctx=ctx)


def green_dirichlet_lattice(symbol, source, targets, radius):
    """Dirichlet Green function on the lattice disk of `radius`, assembled from the symbol.

    The operator on every cell within `radius` of the source is built from
    the Laurent entries of ``S``, so no graph window is materialized.
    `source` and `targets` are ``(r, n1, n2)`` triples.

    Returns
    -------
    values : ndarray
        ``G_R(source, target)`` per target.
    info : dict
        Number of unknowns and the relative residual of the solve.
    """
    g = symbol.graph
    P1, P2 = g.period_vectors()
    reps = np.array([g.positions[g.index(rep)] for rep in g.domain])
    r0, a0, b0 = source
    centre = reps[r0] + a0 * P1 + b0 * P2
    basis = np.array([[P1.real, P2.real], [P1.imag, P2.imag]])
    smin = np.linalg.svd(basis, compute_uv=False).min()
    B = int(math.ceil((radius + np.abs(reps).max() + abs(a0 * P1 + b0 * P2)) / smin)) + 2
    ii, jj = np.meshgrid(np.arange(-B, B + 1), np.arange(-B, B + 1), indexing="ij")
    n = symbol.size
    idx = np.full((n, 2 * B + 1, 2 * B + 1), -1, dtype=np.int64)
    for r in range(n):
        inside = np.abs(reps[r] + ii * P1 + jj * P2 - centre) <= radius
        idx[r][inside] = np.arange(inside.sum())
    offsets = np.concatenate([[0], np.cumsum([(idx[r] >= 0).sum() for r in range(n)])])
    for r in range(n):
        idx[r][idx[r] >= 0] += offsets[r]
    rows, cols, vals = [], [], []
    for (r, s), terms in symbol.entries.items():
        for (d1, d2), c in terms.items():
            src = idx[r]
            shifted = np.full_like(src, -1)
            lo1, hi1 = max(0, -d1), min(2 * B + 1, 2 * B + 1 - d1)
            lo2, hi2 = max(0, -d2), min(2 * B + 1, 2 * B + 1 - d2)
            shifted[lo1:hi1, lo2:hi2] = idx[s][lo1 + d1:hi1 + d1, lo2 + d2:hi2 + d2]
            ok = (src >= 0) & (shifted >= 0)
            rows.append(src[ok])
            cols.append(shifted[ok])
            vals.append(np.full(int(ok.sum()), float(np.real(c))))
    size = int(offsets[-1])
    mat = lap.sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                            shape=(size, size)).tocsr()

    def where(t):
        r, m1, m2 = t
        if max(abs(m1), abs(m2)) > B or idx[r, m1 + B, m2 + B] < 0:
            raise ValueError(f"vertex {t} lies outside the Dirichlet disk")
        return idx[r, m1 + B, m2 + B]

    rhs = np.zeros(size)
    rhs[where(source)] = 1.0
    sol, res = lap._solve(mat, rhs)
    return np.array([sol[where(t)] for t in targets]), {"unknowns": size, "residual": float(res)}


def _inverse_table(symbol, M):
    """``ifft2`` of ``S^{-1}`` on the ``M x M`` torus grid; shape ``(size, size, M, M)``."""
    ang = 2 * math.pi * np.arange(M) / M
    z = np.exp(1j * ang)
    S = symbol.matrix(z[:, None], z[None, :])
    inv = 1.0 / S if symbol.size == 1 else np.linalg.inv(S)
    if not np.all(np.isfinite(inv)):
        raise SpectralError("symbol singular on the unit torus")
    return np.fft.ifft2(np.moveaxis(inv, (2, 3), (0, 1)), axes=(2, 3))


def green_fourier_many(symbol, pairs, tol=FOURIER_TOL, max_nodes=FOURIER_MAX):
    """``G((r, n), (s, m))`` for several pairs by Fourier inversion on the unit torus.

    Each pair is ``((r, n1, n2), (s, m1, m2))``.  The trapezoid rule in both
    angles is evaluated for all displacements at once with an FFT and the
    grid is doubled until every value is stable to `tol` (relative).
    """
    idx = [(r, s, n1 - m1, n2 - m2) for (r, n1, n2), (s, m1, m2) in pairs]
    prev = None
    M = 16
    while M <= max_nodes:
        tab = _inverse_table(symbol, M)
        vals = np.array([tab[r, s, d1 % M, d2 % M] for r, s, d1, d2 in idx])
        if prev is not None and np.all(np.abs(vals - prev) <= tol * np.abs(vals)):
            return vals.real
        prev = vals
        M *= 2
    raise SpectralError("Fourier quadrature did not converge; a zero may lie near the torus")


def green_fourier(symbol, source, target, **kw):
    """Single-pair version of :func:`green_fourier_many`."""
    return float(green_fourier_many(symbol, [(source, target)], **kw)[0])


def green_fourier_vertices(symbol, x, ys, **kw):
    """Fourier-inversion Green function from vertex `x` to each vertex of `ys`."""
    g = symbol.graph
    src = g.decompose(g.lifts[g._vertex(x)])
    return green_fourier_many(symbol, [(src, g.decompose(g.lifts[g._vertex(y)])) for y in ys], **kw)


# --------------------------------------------------------------------------
# uniformisation and the oval

def uniformize_square(u, ctx, theta):
    """``(z(u), w(u))`` for the square lattice with half-angle `theta` (elliptic units).

    ``z = -k' sc((u - a)/2) sc((u - b)/2)`` and ``w = sc((u - b)/2) / sc((u - a)/2)``
    with ``a = -theta``, ``b = theta``.
    """
    sa = el.sc((np.asarray(u) + theta) / 2.0, ctx)
    sb = el.sc((np.asarray(u) - theta) / 2.0, ctx)
    return -ctx.k_prime * sa * sb, sb / sa


def xi(ev, v):
    """``(log e_{T1}, log e_{T2})`` on ``2iK' + v``: the oval boundary parameterisation."""
    T1, T2 = ev.graph.periods
    return np.array([ev.log_expo_positive(np.asarray(T1), v), ev.log_expo_positive(np.asarray(T2), v)])


@dataclass(frozen=True)
class AmoebaSample:
    """Amoeba points and the oval boundary.

    Attributes
    ----------
    points : ndarray, shape (n, 2)
        ``(log|z|, log|w|)`` on the spectral curve.
    oval : ndarray, shape (m, 2)
        Oval boundary polyline, ordered by polar angle.
    """

    points: np.ndarray
    oval: np.ndarray

    @property
    def convex(self):
        return polygon_convex(self.oval)

    @property
    def diameter(self):
        d = self.oval[:, None, :] - self.oval[None, :, :]
        return float(np.max(np.hypot(d[..., 0], d[..., 1])))


def polygon_convex(poly):
    """Whether a closed polyline turns consistently in one direction."""
    e = np.diff(np.vstack([poly, poly[:1]]), axis=0)
    cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
    return bool(np.all(cross > 0) or np.all(cross < 0))


def point_in_polygon(p, poly):
    """Ray-casting membership test."""
    x, y = p
    inside = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if xc > x:
                inside = not inside
    return inside


def oval_radius(symbol, omega, r_max=60.0):
    """First root of ``r -> P(e^{r cos w}, e^{r sin w})`` along the ray of angle `omega`."""
    ca, sa = math.cos(omega), math.sin(omega)

    def f(r):
        return symbol.P_real(r * ca, r * sa)[0]

    if f(0.0) <= 0:
        raise SpectralError("origin is not inside the oval")
    h = 0.01
    r = 0.0
    while r < r_max:
        if f(r + h) <= 0:
            return optimize.brentq(f, r, r + h, xtol=1e-15, rtol=1e-15)
        r += h
        h = min(h * 1.2, 0.25)
    raise SpectralError("no oval boundary along the ray")


def oval_boundary(symbol, n_angles=360):
    """Oval boundary sampled at equally spaced polar angles."""
    om = 2 * math.pi * np.arange(n_angles) / n_angles
    rad = np.array([oval_radius(symbol, w) for w in om])
    return np.stack([rad * np.cos(om), rad * np.sin(om)], axis=1)


def amoeba_sample(symbol, n_a=60, n_theta=64, a_max=None):
    """Amoeba points by marching over circles ``|z| = e^a`` and solving ``P(z, .) = 0``."""
    coeffs = symbol.coefficients
    js = sorted({j for _, j in coeffs})
    jmin, jmax = js[0], js[-1]
    oval = oval_boundary(symbol)
    if a_max is None:
        a_max = 2.0 * np.max(np.abs(oval[:, 0])) + 1.0
    pts = []
    for a in np.linspace(-a_max, a_max, n_a):
        for th in 2 * math.pi * np.arange(n_theta) / n_theta:
            z = np.exp(a + 1j * th)
            poly = np.zeros(jmax - jmin + 1, dtype=np.complex128)
            for (i, j), c in coeffs.items():
                poly[jmax - j] += c * z ** i
            roots = np.roots(poly)
            for w in roots[np.abs(roots) > 0]:
                pts.append((a, math.log(abs(w))))
    return AmoebaSample(points=np.array(pts), oval=oval)


def oval_hausdorff(symbol, ev, n_xi=1024):
    """Bound on the Hausdorff distance between the oval boundary and ``xi(2iK' + R)``.

    Both curves are star-shaped about the origin, so the largest radial gap
    ``| |xi(v)| - r(angle xi(v)) |`` over the samples bounds the distance at
    the sampled angles without any polyline discretisation error.
    """
    K = ev.ctx.K
    worst = 0.0
    for v in np.linspace(-2 * K, 2 * K, n_xi, endpoint=False):
        p = xi(ev, v)
        worst = max(worst, abs(math.hypot(p[0], p[1]) - oval_radius(symbol, math.atan2(p[1], p[0]))))
    return worst


# --------------------------------------------------------------------------
# argmax map and the boundary point

def _wrap(x):
    return (x + math.pi) % (2 * math.pi) - math.pi


def direction_to_zeta(symbol, rhat):
    """Point of the oval boundary maximising ``rhat . s``.

    The outward normal at ``zeta`` is ``-grad P(e^a, e^b)``; the polar angle
    ``omega`` of ``zeta`` is found so that the normal has the angle of `rhat`.
    """
    target = math.atan2(rhat[1], rhat[0])

    def normal_angle(om):
        r = oval_radius(symbol, om)
        _, ga, gb = symbol.P_real(r * math.cos(om), r * math.sin(om))
        return _wrap(math.atan2(-gb, -ga) - target)

    grid = 2 * math.pi * np.arange(72) / 72 - math.pi
    vals = np.array([normal_angle(w) for w in grid])
    for i in range(grid.size):
        j = (i + 1) % grid.size
        lo, hi = grid[i], grid[i] + 2 * math.pi / grid.size
        if vals[i] == 0:
            om = lo
            break
        if vals[i] < 0 < vals[j] and vals[j] - vals[i] < math.pi:
            om = optimize.brentq(normal_angle, lo, hi, xtol=1e-15, rtol=1e-15)
            break
    else:
        raise SpectralError("normal angle not bracketed; oval may have a flat segment")
    r = oval_radius(symbol, om)
    return np.array([r * math.cos(om), r * math.sin(om)])


def u0_from_direction(symbol, ev, rhat):
    """``v`` with ``xi(2iK' + v) = zeta(rhat)``, reduced to ``[-2K, 2K)``."""
    zeta = direction_to_zeta(symbol, rhat)
    target = math.atan2(zeta[1], zeta[0])
    K = ev.ctx.K

    def f(v):
        p = xi(ev, v)
        return _wrap(math.atan2(p[1], p[0]) - target)

    grid = np.linspace(-2 * K, 2 * K, 129)
    vals = np.array([f(v) for v in grid])
    for i in range(grid.size - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0:
            return float(grid[i]), zeta
        if np.sign(a) != np.sign(b) and abs(b - a) < math.pi:
            v = optimize.brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)
            return float(v), zeta
    raise SpectralError("xi does not reach zeta")


# --------------------------------------------------------------------------
# square lattice and the simple random walk

def square_conductances(theta, ctx):
    """``(c1, c2, m)`` for half-angle `theta` (elliptic units)."""
    c1 = el.sc_real(theta, ctx)
    c2 = el.sc_real(ctx.K - theta, ctx)
    m = 2.0 * (el.A_func(theta, ctx) + el.A_func(ctx.K - theta, ctx)) - 2.0 * (c1 + c2)
    return c1, c2, m


def walk_laplace(q1, zeta):
    """Laplace transform ``phi`` of the simple walk with horizontal weight `q1`."""
    z1, z2 = zeta
    return q1 * 2 * math.cosh(z1) + (0.5 - q1) * 2 * math.cosh(z2)


def walk_gradient(q1, zeta):
    z1, z2 = zeta
    return np.array([2 * q1 * math.sinh(z1), (1 - 2 * q1) * math.sinh(z2)])


def theta_from_q1(q1, ctx):
    """Half-angle (elliptic units) with ``c1 / (2 (c1 + c2)) = q1``."""
    kp = ctx.k_prime
    return el.big_F(math.sqrt(2 * q1 / (kp + 2 * q1 * (1 - kp))), ctx)


@dataclass(frozen=True)
class Bridge:
    """Level ``t`` of the walk matching the massive square lattice.

    ``t_mass`` comes from the masses and conductances, ``t_modulus`` from the
    closed expression in ``k'``; ``spectral_radius`` is ``phi(0)``.
    """

    q1: float
    k: float
    theta: float
    t_mass: float
    t_modulus: float
    spectral_radius: float


def t_from_modulus(q1, k_prime):
    return math.sqrt(1.0 + 2 * q1 * (1 - 2 * q1) * (k_prime - 2.0 + 1.0 / k_prime))


def ney_spitzer_bridge(q1, k):
    """Both expressions of ``t = 1 + m / (2 (c1 + c2))`` at horizontal weight `q1`."""
    if not 0 < q1 < 0.5:
        raise ValueError("q1 must lie in (0, 1/2)")
    ctx = el.make_context(k)
    theta = theta_from_q1(q1, ctx)
    c1, c2, m = square_conductances(theta, ctx)
    return Bridge(q1=q1, k=k, theta=theta, t_mass=1.0 + m / (2 * (c1 + c2)),
                  t_modulus=t_from_modulus(q1, ctx.k_prime),
                  spectral_radius=walk_laplace(q1, (0.0, 0.0)))


def invert_square_params(q1, t):
    """``(k, theta)`` realising the walk weight `q1` at level `t`.

    ``k'`` solves ``1 + 2 q1 (1 - 2 q1) (k' - 2 + 1/k') = t^2`` (decreasing in
    ``k'`` on ``(0, 1]``) by bracketed root finding; ``theta`` then follows
    from ``sc(theta) = sqrt(2 q1 / (1 - 2 q1)) / sqrt(k')``.
    """
    if not 0 < q1 < 0.5:
        raise ValueError("q1 must lie in (0, 1/2)")
    if t < 1:
        raise ValueError("t must be at least 1")
    c = 2 * q1 * (1 - 2 * q1)
    if t == 1:
        kp = 1.0
    else:
        target = (t * t - 1.0) / c

        def g(kp):
            return kp - 2.0 + 1.0 / kp - target

        lo = 1.0 / (target + 2.0 + 1.0)
        while g(lo) < 0:
            lo *= 0.5
        kp = optimize.brentq(g, lo, 1.0, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    k = math.sqrt(max(0.0, (1.0 - kp) * (1.0 + kp)))
    ctx = el.make_context(k)
    return k, theta_from_q1(q1, ctx)


def closed_form_modulus(q1, t):
    """The explicit radical expression in ``(q1, t)`` compared against the inversion.

    It equals ``k'`` rather than ``k``: at ``t = 1`` it returns 1.
    """
    num = t * t - 8 * q1 * q1 + 4 * q1 - 1 - math.sqrt((t - 1) * (t + 1) * (t + 1 - 4 * q1) * (t - 1 + 4 * q1))
    return num / (4 * q1 * (1 - 2 * q1))


def square_params_round_trip(k, theta):
    """``(q1, t)`` of the massive square lattice at ``(k, theta)``."""
    ctx = el.make_context(k)
    c1, c2, m = square_conductances(theta, ctx)
    return c1 / (2 * (c1 + c2)), 1.0 + m / (2 * (c1 + c2))


def ns_zeta(q1, t, rhat):
    """Point of ``{phi = t}`` where ``grad phi`` points along `rhat`.

    Radial root of ``phi = t`` at polar angle ``w`` and a bracketed search on
    the angle of the gradient.
    """
    target = math.atan2(rhat[1], rhat[0])

    def radius(om):
        ca, sa = math.cos(om), math.sin(om)
        f = lambda r: walk_laplace(q1, (r * ca, r * sa)) - t
        hi = 1.0
        while f(hi) < 0:
            hi *= 2.0
        return optimize.brentq(f, 0.0, hi, xtol=1e-15, rtol=1e-15)

    def h(om):
        r = radius(om)
        g = walk_gradient(q1, (r * math.cos(om), r * math.sin(om)))
        return _wrap(math.atan2(g[1], g[0]) - target)

    grid = 2 * math.pi * np.arange(72) / 72 - math.pi
    vals = [h(w) for w in grid]
    for i in range(grid.size):
        j = (i + 1) % grid.size
        if vals[i] < 0 < vals[j] and vals[j] - vals[i] < math.pi:
            om = optimize.brentq(h, grid[i], grid[i] + 2 * math.pi / grid.size, xtol=1e-15, rtol=1e-15)
            r = radius(om)
            return np.array([r * math.cos(om), r * math.sin(om)])
        if vals[i] == 0:
            r = radius(grid[i])
            return np.array([r * math.cos(grid[i]), r * math.sin(grid[i])])
    raise SpectralError("gradient angle not bracketed")


# --------------------------------------------------------------------------
# triangular lattice

def triangular_direct(k):
    """``s = sn(K/3)`` and ``t = A(K/3) / sc(K/3)`` from the elliptic functions."""
    ctx = el.make_context(k)
    u = ctx.K / 3.0
    s, _, _ = el.jacobi_real(u, ctx)
    return s, el.A_func(u, ctx) / el.sc_real(u, ctx)


def s_poly(k):
    """Coefficients (highest first) of ``k^2 s^4 - 2 k^2 s^3 + 2 s - 1``."""
    k2 = k * k
    return np.array([k2, -2 * k2, 0.0, 2.0, -1.0])


def t_poly(k):
    """Coefficients of ``-27(1-k^2) t^4 + 18(1-k^2) t^2 + 2(2-k^2)^2 t + 1 - k^2 + k^4``."""
    k2 = k * k
    return np.array([-27 * (1 - k2), 0.0, 18 * (1 - k2), 2 * (2 - k2) ** 2, 1 - k2 + k2 * k2])


def _track_root(poly, k, start, steps=400):
    """Follow the root through ``start`` at ``k = 0`` up to `k` by continuation."""
    cur = complex(start)
    ks = np.linspace(0.0, k, steps + 1)[1:]
    for kk in ks:
        roots = np.roots(np.trim_zeros(poly(kk), "f"))
        d = np.abs(roots - cur)
        order = np.argsort(d)
        if d.size > 1 and d[order[1]] < 4 * d[order[0]] + 1e-12:
            raise SpectralError(f"root tracking ambiguous at k={kk:.6g}")
        cur = roots[order[0]]
    # Newton polish on the real polynomial
    r = cur.real
    c = poly(k)
    dc = np.polyder(c)
    for _ in range(5):
        r -= np.polyval(c, r) / np.polyval(dc, r)
    return r


def triangular_roots(k, steps=400):
    """``(s, t)`` as the roots continued from ``s(0) = 1/2`` and ``t(0) = 1``."""
    if k == 0:
        return 0.5, 1.0
    return _track_root(s_poly, k, 0.5, steps), _track_root(t_poly, k, 1.0, steps)


def blowup_exponent(eps=(1e-6, 1e-3), n=12):
    """Log-log slope of ``t(k)`` against ``1 - k`` for ``1 - k`` in `eps`."""
    x = np.geomspace(eps[0], eps[1], n)
    ts = np.array([triangular_direct(1.0 - e)[1] for e in x])
    slope, _ = np.polyfit(np.log(x), np.log(ts), 1)
    return float(slope)
