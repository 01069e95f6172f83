"""Isoradial graphs stored as rhombic tilings lifted to a monotone surface in Z^d.

A graph is a finite window of a diamond graph.  Every diamond vertex carries an
integer lift ``L`` in ``Z^d`` and sits at ``sum_j L_j exp(i alpha_j)`` in the
plane, where ``alpha_1 < ... < alpha_d`` are the rhombus edge directions
(geometric radians).  Primal vertices have even coordinate sum, dual vertices
(face circumcentres) odd.

A rhombus is stored as ``(base, a, b)``: its corners are ``base``,
``base + e_a``, ``base + e_a + e_b`` and ``base + e_b`` with
``alpha_b - alpha_a`` in ``(0, pi)`` modulo ``2 pi``.  Its two primal corners
are joined by a primal edge whose half-angle is half the rhombus angle there.

Conventions for the shipped lattices:

* square lattice, ``alphas = (-tb, tb)``: the primal point ``(a, b)`` has lift
  ``(a - b, a + b)``, so a primal diagonal step has reduced coordinates
  ``(0, 1)`` and an axis step ``(1/2, 1/2)``.
* triangular lattice, ``alphas = (-pi/3, 0, pi/3)``: the surface is
  ``L_1 - L_2 + L_3 in {-1, 0, 1}`` with primal vertices at height 0.
"""
import math
from dataclasses import dataclass, field
from collections import deque
from functools import cached_property

import numpy as np

DEFAULT_EPSILON = 0.05
SPEC_VERSION = 1
_UNIT_TOL = 1e-9


class GraphError(ValueError):
    """Invalid construction or a query outside the built window."""


# --------------------------------------------------------------------------
# lift hashing

class _LiftIndex:
    """Map integer lifts to row indices through sorted int64 keys."""

    def __init__(self, lifts):
        lifts = np.asarray(lifts, dtype=np.int64)
        self.lo = lifts.min(axis=0) - 2
        span = lifts.max(axis=0) + 2 - self.lo + 1
        if np.sum(np.log2(span.astype(float))) > 62:
            raise GraphError("window too large for int64 lift keys")
        self.span = span
        self.stride = np.concatenate(([1], np.cumprod(span[:-1]))).astype(np.int64)
        keys = self.keys(lifts)
        self.order = np.argsort(keys, kind="stable")
        self.sorted = keys[self.order]
        if np.any(np.diff(self.sorted) == 0):
            raise GraphError("duplicate lifts")

    def keys(self, lifts):
        return (np.asarray(lifts, dtype=np.int64) - self.lo) @ self.stride

    def lookup(self, lifts):
        """Row indices of `lifts` (shape ``(..., d)``); ``-1`` where absent."""
        lifts = np.asarray(lifts, dtype=np.int64)
        shape = lifts.shape[:-1]
        flat = lifts.reshape(-1, lifts.shape[-1])
        ok = np.all((flat >= self.lo) & (flat < self.lo + self.span), axis=1)
        out = np.full(flat.shape[0], -1, dtype=np.int64)
        if np.any(ok):
            k = self.keys(flat[ok])
            pos = np.searchsorted(self.sorted, k)
            pos = np.minimum(pos, self.sorted.size - 1)
            hit = self.sorted[pos] == k
            res = np.where(hit, self.order[pos], -1)
            out[ok] = res
        return out.reshape(shape)


# --------------------------------------------------------------------------
# the graph

@dataclass(frozen=True, eq=False)
class IsoradialGraph:
    """A finite window of an isoradial graph with its diamond graph and lift.

    Parameters
    ----------
    alphas : ndarray, shape (d,)
        Rhombus edge directions in geometric radians, strictly increasing and
        spanning less than ``pi``.
    lifts : ndarray, shape (nv, d)
        Integer lifts of the diamond vertices.
    rhombi : ndarray, shape (nr, 3)
        ``(base vertex index, class a, class b)`` per rhombus.
    epsilon : float
        Half-angles must lie in ``(epsilon, pi/2 - epsilon)``.
    spec : dict, optional
        Builder description, serialised by :func:`dumps_spec`.
    periods : tuple, optional
        Two lift vectors generating the translation symmetries.
    domain : ndarray, optional
        Lifts of one representative per primal orbit of ``periods``.
    """

    alphas: np.ndarray
    lifts: np.ndarray
    rhombi: np.ndarray
    epsilon: float = DEFAULT_EPSILON
    spec: dict = field(default_factory=dict)
    periods: tuple = None
    domain: np.ndarray = None

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=float)
        if alphas.ndim != 1 or alphas.size < 2:
            raise GraphError("need at least two rhombus directions")
        if np.any(np.diff(alphas) <= 0) or alphas[-1] >= alphas[0] + math.pi:
            raise GraphError("directions must satisfy alpha_1 < ... < alpha_d < alpha_1 + pi")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "lifts", np.asarray(self.lifts, dtype=np.int64))
        object.__setattr__(self, "rhombi", np.asarray(self.rhombi, dtype=np.int64).reshape(-1, 3))
        self._validate()

    # -- basic geometry -----------------------------------------------------

    @property
    def d(self):
        return self.alphas.size

    @property
    def n_vertices(self):
        return self.lifts.shape[0]

    @cached_property
    def steps(self):
        """Unit vectors ``exp(i alpha_j)``."""
        return np.exp(1j * self.alphas)

    @cached_property
    def positions(self):
        return self.lifts @ self.steps

    @cached_property
    def is_primal(self):
        return self.lifts.sum(axis=1) % 2 == 0

    @cached_property
    def primal(self):
        """Indices of primal vertices."""
        return np.flatnonzero(self.is_primal)

    @cached_property
    def _index(self):
        return _LiftIndex(self.lifts)

    def lookup(self, lifts):
        """Vertex indices of `lifts`, ``-1`` where the lift is not in the window."""
        return self._index.lookup(lifts)

    def index(self, lift):
        """Vertex index of a single lift; raises :class:`GraphError` if absent."""
        i = int(self.lookup(np.asarray(lift, dtype=np.int64)))
        if i < 0:
            raise GraphError(f"lift {tuple(int(v) for v in lift)} is outside the window")
        return i

    def nearest_vertex(self, point, primal=True):
        """Index of the (primal) vertex closest to a planar point."""
        cand = self.primal if primal else np.arange(self.n_vertices)
        return int(cand[np.argmin(np.abs(self.positions[cand] - complex(point)))])

    # -- rhombi and edges -----------------------------------------------------

    @cached_property
    def rhombus_angles(self):
        """Rhombus angle at the ``base`` corner, in ``(0, pi)``."""
        a, b = self.rhombi[:, 1], self.rhombi[:, 2]
        return np.mod(self.alphas[b] - self.alphas[a], 2 * math.pi)

    @cached_property
    def _corners(self):
        base = self.rhombi[:, 0]
        L = self.lifts[base]
        ea = np.eye(self.d, dtype=np.int64)[self.rhombi[:, 1]]
        eb = np.eye(self.d, dtype=np.int64)[self.rhombi[:, 2]]
        idx = self.lookup(np.stack([L, L + ea, L + ea + eb, L + eb], axis=1))
        if np.any(idx < 0):
            raise GraphError("rhombus corner missing from the vertex set")
        return idx

    @cached_property
    def edges(self):
        """Primal edges as an ``(ne, 2)`` array of vertex indices."""
        c = self._corners
        base_primal = self.is_primal[c[:, 0]]
        return np.where(base_primal[:, None], c[:, [0, 2]], c[:, [1, 3]])

    @cached_property
    def theta_bar(self):
        """Half-angle of each primal edge (geometric radians)."""
        base_primal = self.is_primal[self._corners[:, 0]]
        phi = self.rhombus_angles
        return np.where(base_primal, 0.5 * phi, 0.5 * (math.pi - phi))

    @cached_property
    def edge_steps(self):
        """The two diamond step angles ``(alpha_e, beta_e)`` from the first endpoint."""
        a, b = self.rhombi[:, 1], self.rhombi[:, 2]
        base_primal = self.is_primal[self._corners[:, 0]]
        # first endpoint is base (steps +e_a, +e_b) or base + e_a (steps -e_a, +e_b)
        first = np.where(base_primal, self.alphas[a], self.alphas[a] + math.pi)
        return np.stack([first, self.alphas[b]], axis=1)

    @cached_property
    def dual_edges(self):
        c = self._corners
        base_primal = self.is_primal[c[:, 0]]
        return np.where(base_primal[:, None], c[:, [1, 3]], c[:, [0, 2]])

    @cached_property
    def angle_sums(self):
        """Total rhombus angle at each vertex (``2 pi`` at interior vertices)."""
        c = self._corners
        phi = self.rhombus_angles
        out = np.zeros(self.n_vertices)
        np.add.at(out, c[:, 0], phi)
        np.add.at(out, c[:, 2], phi)
        np.add.at(out, c[:, 1], math.pi - phi)
        np.add.at(out, c[:, 3], math.pi - phi)
        return out

    @cached_property
    def interior(self):
        """Mask of vertices whose incident rhombi close up."""
        return np.abs(self.angle_sums - 2 * math.pi) < 1e-9

    @cached_property
    def interior_primal(self):
        return np.flatnonzero(self.interior & self.is_primal)

    @cached_property
    def degree(self):
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        np.add.at(deg, self.edges.ravel(), 1)
        return deg

    @cached_property
    def _diamond_edge_keys(self):
        # edge from vertex i along +e_j is keyed i * d + j
        c = self._corners
        a, b = self.rhombi[:, 1], self.rhombi[:, 2]
        d = self.d
        keys = np.concatenate([c[:, 0] * d + a, c[:, 3] * d + a, c[:, 0] * d + b, c[:, 1] * d + b])
        return np.unique(keys)

    def has_diamond_edge(self, i, j):
        """Whether the diamond edge from vertex `i` along ``+e_j`` exists."""
        key = int(i) * self.d + int(j)
        pos = np.searchsorted(self._diamond_edge_keys, key)
        return pos < self._diamond_edge_keys.size and self._diamond_edge_keys[pos] == key

    @cached_property
    def primal_neighbours(self):
        """CSR-style adjacency ``(indptr, nbr, edge_id)`` over all vertices."""
        e = self.edges
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        eid = np.concatenate([np.arange(e.shape[0])] * 2)
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        return np.cumsum(indptr), dst[order], eid[order]

    def neighbours(self, i):
        """Primal neighbours of vertex `i` and the connecting edge ids."""
        indptr, nbr, eid = self.primal_neighbours
        return nbr[indptr[i]:indptr[i + 1]], eid[indptr[i]:indptr[i + 1]]

    # -- validation -----------------------------------------------------------

    def _validate(self):
        if self.lifts.ndim != 2 or self.lifts.shape[1] != self.d:
            raise GraphError("lifts must have shape (nv, d)")
        r = self.rhombi
        if r.size and (r[:, 1].min() < 0 or r[:, 2].max() >= self.d or np.any(r[:, 1] == r[:, 2])):
            raise GraphError("invalid rhombus classes")
        phi = self.rhombus_angles
        if np.any((phi <= 0) | (phi >= math.pi)):
            raise GraphError("rhombus with non-positive orientation")
        tb = self.theta_bar
        eps = self.epsilon
        if np.any((tb <= eps) | (tb >= 0.5 * math.pi - eps)):
            bad = tb[(tb <= eps) | (tb >= 0.5 * math.pi - eps)][0]
            raise GraphError(f"half-angle {bad:.6g} outside ({eps}, pi/2 - {eps})")
        # parallel sides are unit vectors by construction; check closure anyway
        c = self._corners
        z = self.positions[c]
        sides = np.abs(np.diff(np.concatenate([z, z[:, :1]], axis=1), axis=1))
        if sides.size and np.max(np.abs(sides - 1.0)) > _UNIT_TOL:
            raise GraphError("diamond edge of non-unit length")

    # -- lifted coordinates -----------------------------------------------------

    def _vertex(self, x):
        if isinstance(x, (int, np.integer)):
            if not 0 <= x < self.n_vertices:
                raise GraphError(f"vertex index {x} outside the window")
            return int(x)
        return self.index(x)

    def lift_difference(self, x, y):
        """``N = L(y) - L(x)`` for vertex indices or lifts."""
        return self.lifts[self._vertex(y)] - self.lifts[self._vertex(x)]

    def distance(self, x, y):
        """Diamond-graph distance ``sum_j |N_j|``."""
        return int(np.abs(self.lift_difference(x, y)).sum())

    def minimal_path(self, x, y, rng=None):
        """A shortest diamond path from `x` to `y` inside the window.

        Returns the list of steps ``(class j, sign)``; the step angle is
        ``alpha_j`` for sign ``+1`` and ``alpha_j + pi`` for ``-1``.  With an
        ``rng`` the exploration order is shuffled, giving a random minimal path.
        """
        xi, yi = self._vertex(x), self._vertex(y)
        N = self.lifts[yi] - self.lifts[xi]
        moves = [(j, int(np.sign(N[j]))) for j in range(self.d) if N[j] != 0]
        if not moves:
            return []
        # breadth-first search over monotone steps only
        parent = {xi: None}
        queue = deque([xi])
        eye = np.eye(self.d, dtype=np.int64)
        target = self.lifts[yi]
        while queue:
            v = queue.popleft()
            if v == yi:
                break
            order = list(moves)
            if rng is not None:
                rng.shuffle(order)
            for j, s in order:
                if (target[j] - self.lifts[v][j]) * s <= 0:
                    continue
                w = int(self.lookup(self.lifts[v] + s * eye[j]))
                if w < 0 or w in parent:
                    continue
                if not self.has_diamond_edge(v if s > 0 else w, j):
                    continue
                parent[w] = (v, j, s)
                queue.append(w)
        if yi not in parent:
            raise GraphError("no minimal path inside the window")
        path = []
        v = yi
        while parent[v] is not None:
            v, j, s = parent[v]
            path.append((j, s))
        return path[::-1]

    def path_angles(self, path):
        """Geometric step angles of a path returned by :meth:`minimal_path`."""
        return np.array([self.alphas[j] + (0.0 if s > 0 else math.pi) for j, s in path])

    def reduced_coords(self, x, y):
        """:class:`Direction` of ``y - x``."""
        N = self.lift_difference(x, y)
        if not np.any(N):
            raise GraphError("reduced coordinates need x != y")
        return Direction(N / np.abs(N).sum())

    def embedded_direction(self, n):
        """Planar vector ``sum_j n_j exp(i alpha_j)`` of a reduced-coordinate vector."""
        return complex(np.asarray(n, dtype=float) @ self.steps)

    # -- periodic structure ---------------------------------------------------

    @property
    def is_periodic(self):
        return self.periods is not None

    def decompose(self, lift):
        """Write a primal lift as ``domain[r] + n1 T1 + n2 T2``; returns ``(r, n1, n2)``."""
        if not self.is_periodic:
            raise GraphError("graph has no declared periods")
        T = np.array(self.periods, dtype=float).T
        lift = np.asarray(lift, dtype=np.int64)
        for r, rep in enumerate(self.domain):
            diff = lift - rep
            sol, *_ = np.linalg.lstsq(T, diff.astype(float), rcond=None)
            n = np.rint(sol).astype(np.int64)
            if np.array_equal(n[0] * np.asarray(self.periods[0]) + n[1] * np.asarray(self.periods[1]), diff):
                return r, int(n[0]), int(n[1])
        raise GraphError(f"lift {tuple(lift)} is not a translate of the fundamental domain")

    def asymptotic_direction(self, psi):
        """Reduced coordinates of far vertices in the planar direction `psi`.

        Writes ``exp(i psi) = l1 P1 + l2 P2`` in the period basis and returns
        the direction of ``l1 T1 + l2 T2``.
        """
        P1, P2 = self.period_vectors()
        M = np.array([[P1.real, P2.real], [P1.imag, P2.imag]])
        lam = np.linalg.solve(M, [math.cos(psi), math.sin(psi)])
        return Direction(lam[0] * np.asarray(self.periods[0], dtype=float)
                         + lam[1] * np.asarray(self.periods[1], dtype=float))

    def period_vectors(self):
        """Planar translation vectors of the two periods."""
        return tuple(complex(np.asarray(T) @ self.steps) for T in self.periods)


# --------------------------------------------------------------------------
# directions

@dataclass(frozen=True, eq=False)
class Direction:
    """Reduced coordinates ``n_j`` with ``sum |n_j| = 1``."""

    n: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float)
        s = np.abs(n).sum()
        if s == 0:
            raise GraphError("zero direction")
        object.__setattr__(self, "n", n / s)

    @property
    def n_plus(self):
        return np.maximum(self.n, 0.0)

    @property
    def n_minus(self):
        return np.maximum(-self.n, 0.0)

    def __neg__(self):
        return Direction(-self.n)


# --------------------------------------------------------------------------
# builders

def _check_angle(theta_bar, eps):
    if not eps < theta_bar < 0.5 * math.pi - eps:
        raise GraphError(f"half-angle {theta_bar!r} outside ({eps}, pi/2 - {eps})")


def _unique_rows(rows):
    lo = rows.min(axis=0)
    span = rows.max(axis=0) - lo + 1
    stride = np.concatenate(([1], np.cumprod(span[:-1]))).astype(np.int64)
    keys = np.unique((rows - lo) @ stride)
    out = np.empty((keys.size, rows.shape[1]), dtype=np.int64)
    for j in range(rows.shape[1] - 1, -1, -1):
        out[:, j], keys = keys // stride[j], keys % stride[j]
    return out + lo


def from_rhombi(alphas, bases, ca, cb, **kwargs):
    """Assemble a graph from rhombus base lifts and class pairs.

    Class pairs are reordered so the rhombus is positively oriented; the
    vertex set is the union of the rhombus corners.
    """
    alphas = np.asarray(alphas, dtype=float)
    bases = np.asarray(bases, dtype=np.int64).reshape(-1, alphas.size)
    ca = np.asarray(ca, dtype=np.int64)
    cb = np.asarray(cb, dtype=np.int64)
    phi = np.mod(alphas[cb] - alphas[ca], 2 * math.pi)
    swap = phi > math.pi
    ca, cb = np.where(swap, cb, ca), np.where(swap, ca, cb)
    eye = np.eye(alphas.size, dtype=np.int64)
    corners = np.concatenate([bases, bases + eye[ca], bases + eye[cb], bases + eye[ca] + eye[cb]])
    lifts = _unique_rows(corners)
    index = _LiftIndex(lifts)
    base_idx = index.lookup(bases)
    rhombi = np.stack([base_idx, ca, cb], axis=1)
    return IsoradialGraph(alphas=alphas, lifts=lifts, rhombi=rhombi, **kwargs)


def build_square(theta_bar, extent, epsilon=DEFAULT_EPSILON):
    """Square lattice with horizontal half-angle `theta_bar`.

    The window holds the primal points ``(a, b)`` with ``max(|a|, |b|) <= extent``.
    """
    theta_bar = float(theta_bar)
    _check_angle(theta_bar, epsilon)
    extent = int(extent)
    if extent < 1:
        raise GraphError("extent must be at least 1")
    r = np.arange(-extent, extent + 1)
    A, B = np.meshgrid(r, r, indexing="ij")
    A, B = A.ravel(), B.ravel()
    lift = np.stack([A - B, A + B], axis=1)
    horiz = A < extent
    vert = B < extent
    e1 = np.array([1, 0])
    bases = np.concatenate([lift[horiz], lift[vert] - e1])
    n_h, n_v = int(horiz.sum()), int(vert.sum())
    ca = np.zeros(n_h + n_v, dtype=np.int64)
    cb = np.ones(n_h + n_v, dtype=np.int64)
    spec = {"builder": "square", "theta_bar": theta_bar, "extent": extent, "epsilon": epsilon}
    return from_rhombi([-theta_bar, theta_bar], bases, ca, cb, epsilon=epsilon, spec=spec,
                       periods=((1, 1), (-1, 1)), domain=np.zeros((1, 2), dtype=np.int64))


TRIANGULAR_ALPHAS = (-math.pi / 3, 0.0, math.pi / 3)


def build_triangular(extent, epsilon=DEFAULT_EPSILON):
    """Triangular lattice on the hexagon ``max(|a|, |b|, |a + b|) <= extent``.

    The primal point ``(a, b)`` has lift ``a T1 + b T2`` with ``T1 = (1, 1, 0)``
    and ``T2 = (0, -1, -1)``.
    """
    extent = int(extent)
    if extent < 1:
        raise GraphError("extent must be at least 1")
    T1 = np.array([1, 1, 0])
    T2 = np.array([0, -1, -1])
    r = np.arange(-extent, extent + 1)
    A, B = np.meshgrid(r, r, indexing="ij")
    A, B = A.ravel(), B.ravel()
    keep = np.abs(A + B) <= extent
    A, B = A[keep], B[keep]

    def inside(a, b):
        return (np.abs(a) <= extent) & (np.abs(b) <= extent) & (np.abs(a + b) <= extent)

    lift = A[:, None] * T1 + B[:, None] * T2
    e1 = np.array([1, 0, 0])
    bases, ca, cb = [], [], []
    # (e1, e2) rhombus joins x and x + T1; (e2, e3) joins x and x - T2;
    # (e1, e3) based at x - e1 joins x and x - T1 - T2
    for mask, base, pair in (
        (inside(A + 1, B), lift, (0, 1)),
        (inside(A, B - 1), lift, (1, 2)),
        (inside(A - 1, B - 1), lift - e1, (0, 2)),
    ):
        bases.append(base[mask])
        ca.append(np.full(mask.sum(), pair[0]))
        cb.append(np.full(mask.sum(), pair[1]))
    spec = {"builder": "triangular", "extent": extent, "epsilon": epsilon}
    return from_rhombi(TRIANGULAR_ALPHAS, np.concatenate(bases), np.concatenate(ca),
                       np.concatenate(cb), epsilon=epsilon, spec=spec,
                       periods=((1, 1, 0), (0, -1, -1)), domain=np.zeros((1, 3), dtype=np.int64))


# -- de Bruijn multigrid ---------------------------------------------------

@dataclass(frozen=True)
class TrackFamily:
    """A pencil of parallel train-tracks.

    Track ``k`` is the line ``Re(z exp(-i normal)) = k + offset`` and its
    rhombi have edge direction ``angles[k - first]``.
    """

    normal: float
    offset: float
    first: int
    angles: tuple

    def angle(self, k):
        i = k - self.first
        if not 0 <= i < len(self.angles):
            raise GraphError(f"track {k} not covered by the angle list")
        return self.angles[i]


def build_from_tracks(families, window, epsilon=DEFAULT_EPSILON, periods=None, domain_grid=None):
    """Dual tiling of a multigrid of straight tracks inside a disk.

    Parameters
    ----------
    families : sequence of TrackFamily
        At least two pencils with distinct normals.
    window : float
        Radius of the disk (in multigrid units) in which crossings are kept.
    periods : tuple of lift vectors, optional
        Declared translation symmetries, for periodic track sequences.
    domain_grid : sequence of int tuples, optional
        Region index vectors (one entry per family) of the fundamental-domain
        representatives; converted to lifts.
    """
    fams = [f if isinstance(f, TrackFamily) else TrackFamily(**f) for f in families]
    if len(fams) < 2:
        raise GraphError("need at least two track families")
    window = float(window)
    normals = np.array([f.normal for f in fams])
    # tracks intersecting the disk
    ranges = []
    for f in fams:
        lo = math.floor(-window - f.offset) - 1
        hi = math.ceil(window - f.offset) + 1
        ranges.append((lo, hi))
    angle_set = sorted({f.angle(k) for f, (lo, hi) in zip(fams, ranges) for k in range(lo, hi + 1)})
    classes = {a: i for i, a in enumerate(angle_set)}
    alphas = np.array(angle_set)
    d = alphas.size
    # cumulative per-class counts: lift contribution of region index K_f
    cum = []
    for f, (lo, hi) in zip(fams, ranges):
        ks = np.arange(lo, hi + 2)
        table = np.zeros((ks.size, d), dtype=np.int64)
        zero = -lo
        for i, k in enumerate(range(lo, hi + 1)):
            table[i + 1] = table[i]
            table[i + 1, classes[f.angle(k)]] += 1
        cum.append((lo, table - table[zero]))

    def region_lift(K):
        # K has shape (n, n_families): region indices
        out = np.zeros((K.shape[0], d), dtype=np.int64)
        for fi, (lo, table) in enumerate(cum):
            out += table[K[:, fi] - lo]
        return out

    def region_index(z):
        re = np.real(z[:, None] * np.exp(-1j * normals[None, :]))
        offs = np.array([f.offset for f in fams])
        return np.ceil(re - offs).astype(np.int64)

    bases, ca, cb = [], [], []
    for p in range(len(fams)):
        for q in range(p + 1, len(fams)):
            fp, fq = fams[p], fams[q]
            s = math.sin(fq.normal - fp.normal)
            if abs(s) < 1e-12:
                raise GraphError("parallel track families")
            kp = np.arange(ranges[p][0], ranges[p][1] + 1)
            kq = np.arange(ranges[q][0], ranges[q][1] + 1)
            KP, KQ = np.meshgrid(kp, kq, indexing="ij")
            KP, KQ = KP.ravel(), KQ.ravel()
            # solve Re(z e^{-i np}) = kp + op, Re(z e^{-i nq}) = kq + oq
            M = np.array([[math.cos(fp.normal), math.sin(fp.normal)],
                          [math.cos(fq.normal), math.sin(fq.normal)]])
            rhs = np.stack([KP + fp.offset, KQ + fq.offset])
            xy = np.linalg.solve(M, rhs)
            z = xy[0] + 1j * xy[1]
            keep = np.abs(z) < window
            if not np.any(keep):
                continue
            z, KP, KQ = z[keep], KP[keep], KQ[keep]
            K = region_index(z)
            K[:, p] = KP
            K[:, q] = KQ
            bases.append(region_lift(K))
            a_cls = np.array([classes[fp.angle(k)] for k in KP])
            b_cls = np.array([classes[fq.angle(k)] for k in KQ])
            # orientation of the crossing must match the geometric rhombus
            geo = np.sin(alphas[b_cls] - alphas[a_cls])
            if np.any(np.sign(geo) != np.sign(s)) or np.any(np.abs(geo) < 1e-12):
                raise GraphError("track angles inconsistent with the multigrid order")
            ca.append(a_cls)
            cb.append(b_cls)
    if not bases:
        raise GraphError("no crossings inside the window")
    spec = {
        "builder": "tracks",
        "window": window,
        "epsilon": epsilon,
        "families": [{"normal": f.normal, "offset": f.offset, "first": f.first,
                      "angles": list(f.angles)} for f in fams],
    }
    domain = None
    if domain_grid is not None:
        domain = region_lift(np.asarray(domain_grid, dtype=np.int64).reshape(-1, len(fams)))
        spec["periods"] = [list(map(int, T)) for T in periods]
        spec["domain_grid"] = [list(map(int, g)) for g in domain_grid]
    return from_rhombi(alphas, np.concatenate(bases), np.concatenate(ca), np.concatenate(cb),
                       epsilon=epsilon, spec=spec, periods=periods, domain=domain)


def waves_families(n_blocks=6, a1=-0.3, a2=0.3, b=0.5 * math.pi, offsets=(0.31, 0.17)):
    """Track families whose first pencil alternates angle in blocks 1, 2, 4, ...

    Block ``j`` (for tracks ``k >= 0``) has length ``2^j`` and angle ``a1`` or
    ``a2`` by parity of ``j``; negative tracks mirror the pattern.
    """
    seq = []
    for j in range(n_blocks):
        seq += [a1 if j % 2 == 0 else a2] * (2 ** j)
    n = len(seq)
    angles = tuple(seq[::-1] + seq)
    fa = TrackFamily(normal=0.0, offset=offsets[0], first=-n, angles=angles)
    fb = TrackFamily(normal=0.5 * math.pi, offset=offsets[1], first=-n, angles=(b,) * (2 * n))
    return [fa, fb], n


def build_waves(n_blocks=6, window=None, epsilon=DEFAULT_EPSILON):
    """A non-asymptotically-flat graph: one pencil alternates angle in doubling blocks."""
    fams, n = waves_families(n_blocks)
    if window is None:
        window = n - 2
    return build_from_tracks(fams, window, epsilon=epsilon)


def build_periodic_demo(extent=8, a1=-0.3, a2=0.3, b=0.5 * math.pi, epsilon=DEFAULT_EPSILON):
    """Periodic graph with two primal vertices per fundamental domain.

    The first pencil alternates between angles `a1` and `a2`, the second is
    constant at `b`; the periods are two consecutive tracks of each pencil.
    """
    n = int(extent) + 4
    fa = TrackFamily(normal=0.0, offset=0.25, first=-2 * n,
                     angles=tuple(a1 if k % 2 == 0 else a2 for k in range(-2 * n, 2 * n)))
    fb = TrackFamily(normal=0.5 * math.pi, offset=0.25, first=-2 * n, angles=(b,) * (4 * n))
    classes = sorted({a1, a2, b})
    T1 = [0] * 3
    T1[classes.index(a1)] += 1
    T1[classes.index(a2)] += 1
    T2 = [0] * 3
    T2[classes.index(b)] = 2
    g = build_from_tracks([fa, fb], float(extent), epsilon=epsilon,
                          periods=(tuple(T1), tuple(T2)), domain_grid=[(0, 0), (1, 1)])
    g.spec.update({"builder": "periodic_demo", "extent": int(extent), "a1": a1, "a2": a2, "b": b})
    return g


# -- star-triangle move ---------------------------------------------------

def flippable_sites(graph):
    """Interior diamond vertices of degree 3 whose three steps use distinct classes."""
    out = []
    eye = np.eye(graph.d, dtype=np.int64)
    c = graph._corners
    count = np.zeros(graph.n_vertices, dtype=np.int64)
    np.add.at(count, c.ravel(), 1)
    for v in np.flatnonzero((count == 3) & graph.interior):
        if _site_steps(graph, v, eye) is not None:
            out.append(int(v))
    return out


def _site_steps(graph, v, eye):
    steps = []
    for j in range(graph.d):
        for s in (1, -1):
            w = graph.lookup(graph.lifts[v] + s * eye[j])
            if w >= 0 and graph.has_diamond_edge(v if s > 0 else w, j):
                steps.append((j, s))
    classes = {j for j, _ in steps}
    if len(steps) != 3 or len(classes) != 3:
        return None
    return steps


def star_triangle_flip(graph, site):
    """Push the surface across the unit cube at a degree-3 diamond vertex.

    The vertex ``c`` with steps ``s_j e_j`` (three distinct classes) is
    replaced by ``c + sum_j s_j e_j`` and its three rhombi by the three rhombi
    on the other side of the cube.  The move is an involution.
    """
    v = graph._vertex(site)
    eye = np.eye(graph.d, dtype=np.int64)
    if not graph.interior[v]:
        raise GraphError("site is not an interior vertex")
    steps = _site_steps(graph, v, eye)
    if steps is None:
        raise GraphError("site is not a flippable degree-3 vertex")
    c = graph._corners
    touching = np.flatnonzero(np.any(c == v, axis=1))
    if touching.size != 3:
        raise GraphError("site is not a flippable degree-3 vertex")
    L = graph.lifts[v]
    shift = sum(s * eye[j] for j, s in steps)
    new_c = L + shift
    if graph.lookup(new_c) >= 0:
        raise GraphError("flipped vertex already present")
    new_bases, ca, cb = [], [], []
    for (j1, s1), (j2, s2) in ((steps[0], steps[1]), (steps[1], steps[2]), (steps[0], steps[2])):
        # rhombus at new_c with steps -s1 e_j1 and -s2 e_j2
        base = new_c - max(s1, 0) * eye[j1] - max(s2, 0) * eye[j2]
        new_bases.append(base)
        ca.append(j1)
        cb.append(j2)
    keep = np.setdiff1d(np.arange(graph.rhombi.shape[0]), touching)
    bases = np.concatenate([graph.lifts[graph.rhombi[keep, 0]], np.array(new_bases)])
    all_ca = np.concatenate([graph.rhombi[keep, 1], ca])
    all_cb = np.concatenate([graph.rhombi[keep, 2], cb])
    spec = dict(graph.spec)
    spec["flips"] = list(spec.get("flips", [])) + [[int(t) for t in L]]
    return from_rhombi(graph.alphas, bases, all_ca, all_cb, epsilon=graph.epsilon, spec=spec)


# -- flatness -------------------------------------------------------------

def flatness_diagnostic(graph, ray_angle, radii, origin=None):
    """Reduced coordinates from `origin` to the primal vertex nearest each ray point.

    Returns an array of shape ``(len(radii), d)``.
    """
    x0 = graph.nearest_vertex(0.0) if origin is None else graph._vertex(origin)
    p0 = graph.positions[x0]
    rows = []
    for R in radii:
        target = p0 + R * np.exp(1j * ray_angle)
        y = graph.nearest_vertex(target)
        if abs(graph.positions[y] - target) > 2.0:
            raise GraphError(f"ray point at radius {R} is outside the window")
        rows.append(graph.reduced_coords(x0, y).n)
    if not rows:
        raise GraphError("empty radius list")
    return np.array(rows)


def lifted_ray_vertex(graph, x0, n, N):
    """Primal vertex at lift ``L(x0) + round(N n)`` (rounded to the primal parity).

    Used to send ``y`` to infinity along fixed reduced coordinates.
    """
    L = graph.lifts[graph._vertex(x0)]
    step = np.rint(np.asarray(n, dtype=float) * N).astype(np.int64)
    if step.sum() % 2:
        frac = np.asarray(n, dtype=float) * N - step
        j = int(np.argmax(np.abs(frac)))
        step[j] += 1 if frac[j] > 0 else -1
    return graph.index(L + step)


# --------------------------------------------------------------------------
# graph-spec text format

def _fmt(obj, indent=0):
    pad = "  " * indent
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g")
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_fmt(v) for v in obj) + "]"
        inner = ",\n".join(pad + "  " + _fmt(v, indent + 1) for v in obj)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        inner = ",\n".join(f'{pad}  "{k}": {_fmt(obj[k], indent + 1)}' for k in sorted(obj))
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_spec(graph):
    """Canonical graph-spec text (sorted keys, 17 significant digits)."""
    spec = {"version": SPEC_VERSION}
    spec.update(graph.spec)
    return _fmt(spec) + "\n"


def loads_spec(text):
    """Rebuild a graph from :func:`dumps_spec` output."""
    import json

    spec = json.loads(text)
    if spec.get("version") != SPEC_VERSION:
        raise GraphError(f"unsupported graph-spec version {spec.get('version')!r}")
    eps = spec.get("epsilon", DEFAULT_EPSILON)
    kind = spec.get("builder")
    if kind == "square":
        g = build_square(spec["theta_bar"], spec["extent"], epsilon=eps)
    elif kind == "triangular":
        g = build_triangular(spec["extent"], epsilon=eps)
    elif kind == "periodic_demo":
        g = build_periodic_demo(spec["extent"], spec["a1"], spec["a2"], spec["b"], epsilon=eps)
    elif kind == "tracks":
        fams = [TrackFamily(normal=f["normal"], offset=f["offset"], first=f["first"],
                            angles=tuple(f["angles"])) for f in spec["families"]]
        periods = tuple(tuple(T) for T in spec["periods"]) if "periods" in spec else None
        g = build_from_tracks(fams, spec["window"], epsilon=eps, periods=periods,
                              domain_grid=spec.get("domain_grid"))
    else:
        raise GraphError(f"unknown builder {kind!r}")
    for lift in spec.get("flips", []):
        g = star_triangle_flip(g, g.index(lift))
    return g
