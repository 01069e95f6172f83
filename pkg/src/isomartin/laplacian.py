"""Massive Laplacian with elliptic conductances and masses.

``(Delta f)(x) = sum_{z ~ x} rho_xz (f(x) - f(z)) + m2(x) f(x)`` with
``rho = sc(theta)`` and ``m2(x) = sum_j (A(theta_j) - sc(theta_j))``, where
``theta = theta_bar * 2K / pi`` is the half-angle in elliptic units.

The operator is defined at interior primal vertices only (those whose
rhombi close up); elsewhere :func:`apply` returns ``nan``.
"""
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import elliptic as el

SOLVE_RTOL = 1e-12
# above this size LU fill-in costs gigabytes; preconditioned CG is used instead
DIRECT_MAX = 200_000
CG_RTOL = 1e-14


class SolverError(RuntimeError):
    """The sparse solve failed or returned an inaccurate answer."""


@dataclass(frozen=True, eq=False)
class MassiveOperator:
    """Assembled massive Laplacian on one graph window.

    Attributes
    ----------
    rho : ndarray
        Conductance per primal edge.
    mass : ndarray
        Squared mass per vertex (``nan`` off the interior primal set).
    rows : ndarray
        Vertex indices of the interior primal vertices, in matrix order.
    matrix : scipy.sparse.csr_matrix
        Dirichlet operator restricted to ``rows``.
    position : ndarray
        Matrix row of each vertex, ``-1`` off the interior.
    """

    graph: object
    ctx: object
    rho: np.ndarray
    mass: np.ndarray
    diag: np.ndarray
    rows: np.ndarray
    matrix: sp.csr_matrix
    position: np.ndarray = field(repr=False)
    angle_cache: dict = field(default_factory=dict, repr=False)


def edge_terms(theta_bar, ctx, cache=None):
    """Conductances ``sc(theta)`` and mass contributions ``A(theta) - sc(theta)``.

    Each distinct half-angle is evaluated once.
    """
    theta_bar = np.asarray(theta_bar, dtype=float)
    uniq, inv = np.unique(theta_bar, return_inverse=True)
    cache = {} if cache is None else cache
    rho_u = np.empty(uniq.size)
    mass_u = np.empty(uniq.size)
    for i, tb in enumerate(uniq):
        key = float(tb)
        if key not in cache:
            th = float(ctx.to_elliptic(tb))
            s = el.sc_real(th, ctx)
            cache[key] = (s, el.A_func(th, ctx) - s)
        rho_u[i], mass_u[i] = cache[key]
    return rho_u[inv].reshape(theta_bar.shape), mass_u[inv].reshape(theta_bar.shape)


def assemble(graph, ctx):
    """Build the :class:`MassiveOperator` of `graph` at modulus ``ctx.k``."""
    cache = {}
    rho, dm = edge_terms(graph.theta_bar, ctx, cache)
    if np.any(rho <= 0):
        raise ValueError("non-positive conductance")
    e = graph.edges
    nv = graph.n_vertices
    csum = np.zeros(nv)
    mass = np.zeros(nv)
    for col in (0, 1):
        np.add.at(csum, e[:, col], rho)
        np.add.at(mass, e[:, col], dm)
    interior = np.zeros(nv, dtype=bool)
    interior[graph.interior_primal] = True
    mass = np.where(interior, mass, np.nan)
    # tiny negative masses are rounding at k = 0
    if ctx.massless:
        mass = np.where(interior, 0.0, np.nan)
    rows = graph.interior_primal
    pos = np.full(nv, -1, dtype=np.int64)
    pos[rows] = np.arange(rows.size)
    diag = csum + mass
    i, j = pos[e[:, 0]], pos[e[:, 1]]
    both = (i >= 0) & (j >= 0)
    r = np.concatenate([np.arange(rows.size), i[both], j[both]])
    c = np.concatenate([np.arange(rows.size), j[both], i[both]])
    v = np.concatenate([diag[rows], -rho[both], -rho[both]])
    mat = sp.csr_matrix((v, (r, c)), shape=(rows.size, rows.size))
    return MassiveOperator(graph=graph, ctx=ctx, rho=rho, mass=mass, diag=diag,
                           rows=rows, matrix=mat, position=pos, angle_cache=cache)


def apply(op, f):
    """``Delta f`` at interior primal vertices; ``nan`` elsewhere.

    `f` is indexed by vertex and may be complex.
    """
    g = op.graph
    f = np.asarray(f)
    if f.shape[0] != g.n_vertices:
        raise ValueError(f"function has {f.shape[0]} values, graph has {g.n_vertices} vertices")
    e = g.edges
    dtype = np.result_type(f.dtype, float)
    out = np.zeros(g.n_vertices, dtype=dtype)
    diff = f[e[:, 0]] - f[e[:, 1]]
    np.add.at(out, e[:, 0], op.rho * diff)
    np.add.at(out, e[:, 1], -op.rho * diff)
    out = out + op.mass * f
    keep = np.zeros(g.n_vertices, dtype=bool)
    keep[op.rows] = True
    return np.where(keep, out, np.nan)


def local_scale(op, f):
    """Largest term magnitude entering ``Delta f`` at each vertex (for relative residuals)."""
    g = op.graph
    f = np.asarray(f)
    e = g.edges
    out = np.abs(np.nan_to_num(op.mass) * f)
    t0 = op.rho * np.abs(f[e[:, 0]])
    t1 = op.rho * np.abs(f[e[:, 1]])
    np.maximum.at(out, e[:, 0], np.maximum(t0, t1))
    np.maximum.at(out, e[:, 1], np.maximum(t0, t1))
    return out


@dataclass(frozen=True)
class KilledWalkKernel:
    """One step of the killed random walk ``Delta = D (Id - P)`` with ``D = diag``."""

    p: sp.csr_matrix
    q: np.ndarray
    rows: np.ndarray


def killed_walk(op):
    """Transition probabilities and killing probabilities at interior vertices."""
    g = op.graph
    e = g.edges
    nv = g.n_vertices
    denom = op.diag
    inside = np.zeros(nv, dtype=bool)
    inside[op.rows] = True
    src = np.concatenate([e[:, 0], e[:, 1]])
    dst = np.concatenate([e[:, 1], e[:, 0]])
    w = np.concatenate([op.rho, op.rho])
    keep = inside[src]
    P = sp.csr_matrix((w[keep] / denom[src[keep]], (src[keep], dst[keep])), shape=(nv, nv))
    q = np.where(inside, op.mass / denom, np.nan)
    return KilledWalkKernel(p=P, q=q, rows=op.rows)


# --------------------------------------------------------------------------
# Dirichlet Green function

@dataclass(frozen=True, eq=False)
class TruncatedGreen:
    """``G_R(x, .)`` on the whole window (zero outside the Dirichlet domain)."""

    source: int
    radius: float
    values: np.ndarray
    residual: float
    n_unknowns: int

    def __getitem__(self, y):
        return self.values[y]


def _cg(mat, rhs):
    jacobi = sp.diags(1.0 / mat.diagonal())
    sol, info = spla.cg(mat, rhs, rtol=CG_RTOL, atol=0.0, maxiter=20 * mat.shape[0], M=jacobi)
    if info != 0:
        raise SolverError(f"conjugate gradients did not converge (info={info})")
    return sol


def _solve(mat, rhs):
    """Solve the SPD system; sparse LU for moderate sizes, Jacobi-preconditioned CG beyond."""
    if mat.shape[0] > DIRECT_MAX:
        sol = _cg(mat.tocsr(), rhs)
    else:
        try:
            lu = spla.splu(mat.tocsc(), permc_spec="MMD_AT_PLUS_A")
            sol = lu.solve(rhs)
        except (MemoryError, RuntimeError):
            sol = _cg(mat.tocsr(), rhs)
    res = np.linalg.norm(mat @ sol - rhs) / np.linalg.norm(rhs)
    if not np.isfinite(res) or res > 1e-10:
        raise SolverError(f"sparse solve residual {res:.3e}")
    return sol, res


def truncated_green(op, x, radius=None, tol=1e-12, reach=8.0):
    """Dirichlet Green function on the disk of Euclidean `radius` around `x`.

    When `radius` is omitted it is chosen from the slowest exponential decay
    rate of the Green function so that the truncation error at points within
    `reach` of `x` stays below `tol` (relative).
    """
    g = op.graph
    x = g._vertex(x)
    if op.position[x] < 0:
        raise ValueError("source must be an interior primal vertex")
    if radius is None:
        radius = auto_radius(op, x, tol=tol, reach=reach)
    wall = np.setdiff1d(g.primal, op.rows)
    if wall.size and np.min(np.abs(g.positions[wall] - g.positions[x])) <= radius:
        raise ValueError(f"radius {radius:.4g} reaches the edge of the window")
    dist = np.abs(g.positions[op.rows] - g.positions[x])
    sel = np.flatnonzero(dist <= radius)
    sub = op.matrix[sel][:, sel]
    local = np.full(op.rows.size, -1, dtype=np.int64)
    local[sel] = np.arange(sel.size)
    rhs = np.zeros(sel.size)
    rhs[local[op.position[x]]] = 1.0
    sol, res = _solve(sub, rhs)
    values = np.zeros(g.n_vertices)
    values[op.rows[sel]] = sol
    return TruncatedGreen(source=x, radius=float(radius), values=values,
                          residual=float(res), n_unknowns=int(sel.size))


def decay_rate(op, x, ring=12.0, samples=48):
    """Slowest decay rate of ``G(x, .)`` per unit Euclidean distance.

    Sampled over primal vertices near a circle of radius `ring` around `x`:
    for each the saddle gives ``G ~ exp(N chi(v0))`` with ``N`` the diamond
    distance, i.e. a rate ``-chi(v0) N / |y - x|``.
    """
    from .exponential import ExponentialEvaluator

    g = op.graph
    ev = ExponentialEvaluator(g, op.ctx)
    p0 = g.positions[x]
    rates = []
    for ang in np.linspace(0.0, 2 * math.pi, samples, endpoint=False):
        y = g.nearest_vertex(p0 + ring * np.exp(1j * ang))
        if y == x:
            continue
        N = g.distance(x, y)
        sad = ev.saddle(g.reduced_coords(x, y))
        rates.append(-sad.chi * N / abs(g.positions[y] - p0))
    if not rates:
        raise ValueError("no sample vertices for the decay rate")
    return min(rates)


def auto_radius(op, x, tol=1e-12, reach=8.0, margin=6.0):
    """Dirichlet radius with truncation error below `tol` within `reach` of `x`.

    The reflected contribution decays like ``exp(-gamma (2R - 2 reach))``.
    """
    if op.ctx.massless:
        raise ValueError("truncated Green function needs k > 0")
    gamma = decay_rate(op, x)
    return (math.log(1.0 / tol) + 2.0 * gamma * reach) / (2.0 * gamma) + margin


# --------------------------------------------------------------------------
# star-triangle harmonic extension

def harmonic_extension(op, f, x0):
    """Value at `x0` making ``Delta f (x0) = 0`` given `f` on its neighbours."""
    g = op.graph
    x0 = g._vertex(x0)
    nbr, eid = g.neighbours(x0)
    if nbr.size == 0:
        raise ValueError("isolated vertex")
    m2 = op.mass[x0]
    if not np.isfinite(m2):
        raise ValueError("x0 is not an interior vertex")
    f = np.asarray(f)
    rho = op.rho[eid]
    denom = rho.sum() + m2
    if denom <= 0:
        raise ValueError("degenerate denominator")
    return np.sum(rho * f[nbr]) / denom


# --------------------------------------------------------------------------
# export

def export_triplets(op):
    """Operator as ``row col value`` lines (vertex indices, 17 significant digits)."""
    coo = op.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = ["# row col value"]
    for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
        lines.append(f"{op.rows[r]} {op.rows[c]} {format(float(v), '.17g')}")
    return "\n".join(lines) + "\n"
