"""Green function by contour integration and saddle asymptotics; Martin kernel audits.

On the torus the Green function is the vertical contour integral

    G(x, y) = k' / (4 pi) * int_0^{4K'} e_{(x,y)}(s + i t) dt,

whose integrand is ``4iK'``-periodic.  Any abscissa ``s`` between the pole
lines gives the same value; we take ``s = v0``, the saddle point, where the
integrand is positive at ``t = 2K'`` and no cancellation occurs.
"""
import math
from dataclasses import dataclass

import numpy as np

from .exponential import RateFunction, expo_lift, relabel, sign_changes
from .graph import Direction, lifted_ray_vertex

CONTOUR_TOL = 1e-12
MAX_NODES = 2 ** 16
MIN_ASYMPTOTIC_DISTANCE = 10
POLE_CLEARANCE = 1e-4


@dataclass(frozen=True)
class GreenEvaluation:
    """A Green function value with its provenance.

    Attributes
    ----------
    value : float
    method : str
        ``"contour"``, ``"asymptotic"`` or ``"oracle"``.
    nodes : int
        Quadrature nodes used (0 when not applicable).
    error : float
        Estimated absolute error.
    imag_residue : float
        Relative size of the discarded imaginary part.
    shifted : bool
        Whether the abscissa was moved off a pole line.
    """

    value: float
    method: str
    nodes: int = 0
    error: float = 0.0
    imag_residue: float = 0.0
    shifted: bool = False


def contour_abscissa(N, alphas, ctx):
    """Saddle abscissa for the lifted difference `N` (0 when ``N = 0``)."""
    N = np.asarray(N)
    if not np.any(N):
        return 0.0, None
    sad = RateFunction(alphas, ctx).saddle(N / np.abs(N).sum())
    return sad.v0, sad


def green_contour_lift(N, alphas, ctx, tol=CONTOUR_TOL, max_nodes=MAX_NODES, abscissa=None):
    """Contour-integral Green function across the lifted difference `N`.

    Periodic trapezoid rule in ``t`` with node doubling until successive
    values agree to `tol` (relative).
    """
    if ctx.massless:
        raise ValueError("the contour formula needs k > 0")
    N = np.asarray(N, dtype=np.int64)
    if N.sum() % 2:
        raise ValueError("the Green function joins primal vertices (even lifted length)")
    shifted = False
    if abscissa is None:
        s, _ = contour_abscissa(N, alphas, ctx)
    else:
        s = float(abscissa)
        if np.any(N):
            a, _ = relabel(N, alphas, ctx)
            poles = np.concatenate([a + 2 * ctx.K, a - 2 * ctx.K])
            gap = np.min(np.abs(np.mod(s - poles + 2 * ctx.K, 4 * ctx.K) - 2 * ctx.K))
            if gap < POLE_CLEARANCE:
                s += POLE_CLEARANCE
                shifted = True
    period = 4.0 * ctx.K_prime
    pref = ctx.k_prime / (4.0 * math.pi)
    M = 16
    t = period * np.arange(M) / M
    total = np.sum(expo_lift(N, alphas, s + 1j * t, ctx))
    prev = pref * total * period / M
    while True:
        if 2 * M > max_nodes:
            raise ArithmeticError(f"contour quadrature did not converge with {M} nodes")
        t_new = period * (np.arange(M) + 0.5) / M
        total = total + np.sum(expo_lift(N, alphas, s + 1j * t_new, ctx))
        M *= 2
        cur = pref * total * period / M
        if not np.isfinite(cur):
            raise ArithmeticError("non-finite integrand on the contour")
        err = abs(cur - prev)
        if err <= tol * abs(cur):
            break
        prev = cur
    return GreenEvaluation(value=float(cur.real), method="contour", nodes=M, error=float(err),
                           imag_residue=float(abs(cur.imag) / abs(cur.real)), shifted=shifted)


def green_contour(ev, x, y, **kw):
    """``G(x, y)`` from the contour formula on the graph of `ev`."""
    return green_contour_lift(ev.graph.lift_difference(x, y), ev.alphas, ev.ctx, **kw)


def green_diagonal(ctx):
    """``G(x, x) = k' K' / pi`` (the integrand is identically 1)."""
    return ctx.k_prime * ctx.K_prime / math.pi


def green_asymptotic(ev, x, y, min_distance=MIN_ASYMPTOTIC_DISTANCE):
    """Leading saddle-point term ``k' e(u0) / (2 sqrt(2 pi N chi''(v0)))``."""
    N = ev.graph.lift_difference(x, y)
    dist = int(np.abs(N).sum())
    if dist < min_distance:
        raise ValueError(f"distance {dist} below the asymptotic minimum {min_distance}")
    sad = ev.saddle(Direction(N))
    log_e = ev.log_expo_positive(N, sad.v0)
    val = ev.ctx.k_prime * math.exp(log_e) / (2.0 * math.sqrt(2.0 * math.pi * dist * sad.chi2))
    return GreenEvaluation(value=val, method="asymptotic", error=val / dist)


# --------------------------------------------------------------------------
# Martin kernel

def martin_kernel(ev, x1, x0, y):
    """Ratio ``G(x1, y) / G(x0, y)`` from the contour formula."""
    if ev.graph._vertex(x1) == ev.graph._vertex(x0):
        return 1.0
    return green_contour(ev, x1, y).value / green_contour(ev, x0, y).value


def martin_target(ev, x0, x1, direction):
    """Limit ``e_{(x0, x1)}(u0)`` of ``G(x1, y) / G(x0, y)`` as ``y`` goes to infinity along `direction`.

    ``u0 = 2iK' + v0 + 2K`` with ``v0`` the saddle point of the direction.
    """
    if ev.graph._vertex(x1) == ev.graph._vertex(x0):
        return 1.0
    sad = ev.saddle(direction)
    return ev.expo_positive(x0, x1, sad.boundary)


@dataclass(frozen=True)
class MartinAudit:
    """Martin kernel ratios along a sequence ``y -> infinity``.

    ``targets`` holds, per radius, the limit predicted by the reduced
    coordinates seen at that radius; ``target`` is the limit for the final
    coordinates.  ``oscillation`` is the spread of the reduced coordinates
    over the second half of the schedule.
    """

    radii: np.ndarray
    ratios: np.ndarray
    targets: np.ndarray
    errors: np.ndarray
    coords: np.ndarray
    target: float
    oscillation: float
    converged: bool

    def monotone_from(self, r0):
        e = self.errors[self.radii >= r0]
        return bool(np.all(np.diff(e) < 0))


DEFAULT_RADII = (10, 14, 20, 28, 40, 56)
OSCILLATION_TOL = 0.05


def _audit(ev, x1, x0, ys, radii, limit_n):
    g = ev.graph
    ratios, targets, coords = [], [], []
    for y in ys:
        n = g.reduced_coords(x0, y).n
        coords.append(n)
        ratios.append(martin_kernel(ev, x1, x0, y))
        targets.append(martin_target(ev, x0, x1, n))
    coords = np.array(coords)
    half = coords[len(coords) // 2:]
    osc = float(np.max(half.max(axis=0) - half.min(axis=0))) if len(half) > 1 else 0.0
    n_lim = coords[-1] if limit_n is None else np.asarray(limit_n, dtype=float)
    target = martin_target(ev, x0, x1, n_lim)
    ratios = np.array(ratios)
    return MartinAudit(radii=np.asarray(radii), ratios=ratios, targets=np.array(targets),
                       errors=np.abs(ratios - target), coords=coords, target=target,
                       oscillation=osc, converged=osc <= OSCILLATION_TOL)


def martin_limit_audit(ev, x1, x0, n, radii=DEFAULT_RADII):
    """Martin ratios with ``y`` at lifted distance ``R`` along reduced coordinates `n`."""
    n = Direction(n).n
    ys = [lifted_ray_vertex(ev.graph, x0, n, R) for R in radii]
    return _audit(ev, x1, x0, ys, radii, n)


def martin_ray_audit(ev, x1, x0, ray_angle, radii=DEFAULT_RADII):
    """Martin ratios with ``y`` along a planar ray; reports oscillation of the coordinates."""
    g = ev.graph
    p0 = g.positions[g._vertex(x0)]
    ys = [g.nearest_vertex(p0 + R * np.exp(1j * ray_angle)) for R in radii]
    return _audit(ev, x1, x0, ys, radii, None)


# --------------------------------------------------------------------------
# boundary map

@dataclass(frozen=True)
class BoundaryMap:
    """Saddle points ``v0`` over a sweep of planar directions, lifted to the real line."""

    angles: np.ndarray
    v0: np.ndarray
    lifted: np.ndarray
    chi: np.ndarray
    chi2: np.ndarray
    winding: float
    slopes: np.ndarray

    @property
    def monotone(self):
        return bool(np.all(np.diff(self.lifted) > 0))


def boundary_map(ev, angles=None, n_samples=360):
    """Sweep ``r -> v0(r)`` over planar directions of a periodic graph.

    The total increase of the lifted map over one turn is returned as
    ``winding`` (``4K`` for one full turn of the circle ``R / 4K Z``).
    """
    g = ev.graph
    if angles is None:
        angles = 2 * math.pi * np.arange(n_samples) / n_samples
    angles = np.asarray(angles, dtype=float)
    P = 4 * ev.ctx.K
    v0, chi, chi2 = [], [], []
    for psi in angles:
        sad = ev.saddle(g.asymptotic_direction(psi))
        v0.append(sad.v0)
        chi.append(sad.chi)
        chi2.append(sad.chi2)
    v0 = np.array(v0)
    steps = np.mod(np.diff(np.concatenate([v0, v0[:1]])) + P / 2, P) - P / 2
    lifted = v0[0] + np.concatenate([[0.0], np.cumsum(steps[:-1])])
    dpsi = np.diff(np.concatenate([angles, angles[:1] + 2 * math.pi]))
    return BoundaryMap(angles=angles, v0=v0, lifted=lifted, chi=np.array(chi), chi2=np.array(chi2),
                       winding=float(np.sum(steps)), slopes=steps / dpsi)


# --------------------------------------------------------------------------
# positive harmonic functions

def harmonic_from_measure(ev, atoms, x0):
    """``f(x) = sum_i w_i e_{(x0, x)}(2iK' + v_i)`` over the window (``nan`` at dual vertices)."""
    g = ev.graph
    f = np.zeros(g.n_vertices)
    for v, w in atoms:
        if w <= 0:
            raise ValueError("atom weights must be positive")
        vals = ev.expo_field(x0, 2j * ev.ctx.K_prime + v)
        f += w * vals.real
    return np.where(g.is_primal, f, np.nan)


def growth_cone(ev, atoms, directions):
    """Signs of the growth rate of a mixture: the largest ``tau`` over its atoms."""
    rates = np.array([[ev.tau(d, v) for v, _ in atoms] for d in directions])
    return np.sign(rates.max(axis=1))


__all__ = [
    "GreenEvaluation", "green_contour", "green_contour_lift", "green_asymptotic", "green_diagonal",
    "martin_kernel", "martin_target", "martin_limit_audit", "martin_ray_audit", "MartinAudit",
    "boundary_map", "BoundaryMap", "harmonic_from_measure", "growth_cone", "sign_changes",
]
