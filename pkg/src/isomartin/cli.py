"""Batch command-line front end.

Every subcommand writes a CSV (header row, ``.17g`` floats, trailing
``#`` metadata block with the config hash and library versions) and exits
with 0 on success, 2 when a checked property fails, 3 on bad input and 4
when a Martin audit finds no limit because the reduced coordinates oscillate.
"""
import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import platform
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import elliptic as el
from . import graph as gr
from . import green as gn
from . import laplacian as lap
from . import periodic as pr
from . import series as ser
from .exponential import ExponentialEvaluator

EXIT_OK = 0
EXIT_FAIL = 2
EXIT_INPUT = 3
EXIT_NO_LIMIT = 4

BUILDERS = ("square", "triangular", "periodic_demo", "waves")


class InputError(ValueError):
    """Invalid configuration."""


@dataclass
class RunConfig:
    """Serializable run configuration; flags and ``--config`` files map onto these fields."""

    command: str = ""
    builder: str = "square"
    theta_bar: float = math.pi / 4
    extent: int = 12
    n_blocks: int = 7
    k: float = 0.5
    k_list: list = field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9])
    epsilon: float = gr.DEFAULT_EPSILON
    tol: float = 1e-8
    max_distance: float = 8.0
    radii: list = field(default_factory=lambda: list(gn.DEFAULT_RADII))
    directions: int = 8
    samples: int = 360
    q1: float = 0.25
    t: float = 0.0
    order: int = 200
    seed: int = 12345
    out: str = "-"

    def canonical(self):
        d = dataclasses.asdict(self)
        d.pop("out")
        return json.dumps(d, sort_keys=True, separators=(",", ":"), default=float)

    @property
    def digest(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def _versions():
    import mpmath
    import scipy

    out = {"isomartin": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
           "mpmath": mpmath.__version__, "python": platform.python_version()}
    try:
        import numba

        out["numba"] = numba.__version__
    except ImportError:
        out["numba"] = "absent"
    return out


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(_cell(x) for x in v)
    return str(v)


def write_csv(cfg, header, rows, summary):
    """CSV text with a trailing metadata block; written to ``cfg.out`` (``-`` is stdout)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    buf.write(f"# config_hash: {cfg.digest}\n")
    buf.write(f"# config: {cfg.canonical()}\n")
    for k, v in _versions().items():
        buf.write(f"# {k}: {v}\n")
    for k in sorted(summary):
        buf.write(f"# {k}: {_cell(summary[k])}\n")
    text = buf.getvalue()
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


# --------------------------------------------------------------------------
# validation and builders

def _check_k(k):
    if not isinstance(k, (int, float)) or not math.isfinite(k):
        raise InputError("k must be a finite number")
    if k == 0:
        raise InputError("k = 0 is the massless case, which these computations exclude")
    if not 0 < k < 1:
        raise InputError("k must lie in (0, 1)")


def build_graph(cfg, extent=None):
    ext = cfg.extent if extent is None else extent
    if cfg.builder == "square":
        return gr.build_square(cfg.theta_bar, ext, epsilon=cfg.epsilon)
    if cfg.builder == "triangular":
        return gr.build_triangular(ext, epsilon=cfg.epsilon)
    if cfg.builder == "periodic_demo":
        return gr.build_periodic_demo(ext, epsilon=cfg.epsilon)
    if cfg.builder == "waves":
        return gr.build_waves(cfg.n_blocks, epsilon=cfg.epsilon)
    raise InputError(f"unknown builder {cfg.builder!r}; choose from {', '.join(BUILDERS)}")


def _require_periodic(cfg):
    if cfg.builder not in ("square", "triangular", "periodic_demo"):
        raise InputError(f"builder {cfg.builder!r} is not periodic")


def _origin(g):
    if g.is_periodic:
        return g.index(g.domain[0])
    return g.nearest_vertex(0.0)


def oracle_operator(cfg, ctx, radius):
    """Operator on a window large enough for a Dirichlet disk of `radius` at the origin."""
    g = build_graph(cfg)
    spacing = float(np.min(np.abs(np.diff(g.positions[g.edges], axis=1))))
    ext = max(cfg.extent, int(math.ceil(radius / spacing)) + 3)
    while True:
        g = build_graph(cfg, ext)
        op = lap.assemble(g, ctx)
        x0 = _origin(g)
        wall = np.setdiff1d(g.primal, op.rows)
        if not wall.size or np.min(np.abs(g.positions[wall] - g.positions[x0])) > radius:
            return op, x0
        ext = int(ext * 1.25) + 2


def green_three_way(cfg, k, reach=None):
    """Rows ``(y lift, diamond distance, oracle, contour, fourier, asymptotic, gaps)`` from the origin.

    The oracle is the Dirichlet Green function on a disk whose radius makes
    the truncation error negligible against `cfg.tol`.  On periodic graphs
    the disk operator is assembled cell by cell from the symbol; otherwise a
    graph window covering the disk is built.
    """
    _check_k(k)
    ctx = el.make_context(k)
    reach = cfg.max_distance if reach is None else reach
    small = build_graph(cfg)
    op_s = lap.assemble(small, ctx)
    radius = lap.auto_radius(op_s, _origin(small), tol=min(cfg.tol, 1e-10) * 1e-2, reach=reach)
    if small.is_periodic:
        op, x0 = oracle_operator(cfg, ctx, reach + 1.0)
        g = op.graph
    else:
        op, x0 = oracle_operator(cfg, ctx, radius)
        g = op.graph
    ev = ExponentialEvaluator(g, ctx)
    d = np.abs(g.positions[g.primal] - g.positions[x0])
    ys = g.primal[d <= reach + 1e-9]
    ys = ys[np.lexsort(g.lifts[ys].T[::-1])]
    fourier = None
    if g.is_periodic:
        sym = pr.fourier_symbol(g, ctx, op)
        fourier = pr.green_fourier_vertices(sym, x0, ys)
        oracle, solve = pr.green_dirichlet_lattice(sym, g.decompose(g.lifts[x0]),
                                                   [g.decompose(g.lifts[y]) for y in ys], radius)
    else:
        tg = lap.truncated_green(op, x0, radius=radius)
        oracle = tg.values[ys]
        solve = {"unknowns": tg.n_unknowns, "residual": tg.residual}
    rows = []
    for i, y in enumerate(ys):
        dist = g.distance(x0, y)
        c = gn.green_contour(ev, x0, y).value
        o = float(oracle[i])
        f = float(fourier[i]) if fourier is not None else math.nan
        a = gn.green_asymptotic(ev, x0, y).value if dist >= gn.MIN_ASYMPTOTIC_DISTANCE else math.nan
        rows.append([tuple(int(v) for v in g.lift_difference(x0, y)), dist, o, c, f, a,
                     abs(c - o) / o, abs(f - c) / c if fourier is not None else math.nan,
                     abs(a - c) / c if math.isfinite(a) else math.nan])
    info = {"oracle_radius": radius, "oracle_unknowns": solve["unknowns"], "oracle_residual": solve["residual"]}
    return rows, info


GREEN_HEADER = ["lift", "distance", "oracle", "contour", "fourier", "asymptotic",
                "gap_contour_oracle", "gap_fourier_contour", "gap_asymptotic_contour"]


# --------------------------------------------------------------------------
# commands

def cmd_graph(cfg):
    g = build_graph(cfg)
    text = gr.dumps_spec(g)
    rows = [[int(i), g.lifts[i].tolist(), g.positions[i].real, g.positions[i].imag, bool(g.is_primal[i]),
             bool(g.interior[i])] for i in range(g.n_vertices)]
    summary = {"vertices": g.n_vertices, "primal": int(g.primal.size), "edges": int(g.edges.shape[0]),
               "spec_sha256": hashlib.sha256(text.encode()).hexdigest()[:16]}
    write_csv(cfg, ["vertex", "lift", "x", "y", "primal", "interior"], rows, summary)
    return EXIT_OK


def cmd_green(cfg):
    rows, info = green_three_way(cfg, cfg.k)
    worst = max(r[6] for r in rows)
    wf = [r[7] for r in rows if math.isfinite(r[7])]
    worst_f = max(wf) if wf else math.nan
    ok = worst <= cfg.tol and (not wf or worst_f <= cfg.tol)
    info.update({"pairs": len(rows), "worst_gap_contour_oracle": worst, "worst_gap_fourier_contour": worst_f,
                 "status": "pass" if ok else "fail"})
    write_csv(cfg, GREEN_HEADER, rows, info)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_martin(cfg):
    _check_k(cfg.k)
    ctx = el.make_context(cfg.k)
    radii = tuple(int(r) for r in cfg.radii)
    if cfg.builder == "waves":
        g = build_graph(cfg)
        ev = ExponentialEvaluator(g, ctx)
        x0 = _origin(g)
        x1 = int(g.neighbours(x0)[0][0])
        rows, osc = [], 0.0
        for i in range(cfg.directions):
            psi = 2 * math.pi * (i + 0.5) / cfg.directions
            a = gn.martin_ray_audit(ev, x1, x0, psi, radii)
            osc = max(osc, a.oscillation)
            for R, ratio, target, c in zip(a.radii, a.ratios, a.targets, a.coords):
                rows.append([i, psi, int(R), ratio, target, abs(ratio - target), c])
        limit = osc <= gn.OSCILLATION_TOL
        write_csv(cfg, ["direction", "psi", "radius", "ratio", "local_target", "local_error", "coords"], rows,
                  {"max_oscillation": osc, "status": "limit" if limit else "no-limit"})
        return EXIT_OK if limit else EXIT_NO_LIMIT
    _require_periodic(cfg)
    g = build_graph(cfg, max(cfg.extent, int(max(radii)) + 8))
    ev = ExponentialEvaluator(g, ctx)
    x0 = _origin(g)
    x1 = int(g.neighbours(x0)[0][0])
    rows, worst, mono = [], 0.0, True
    for i in range(cfg.directions):
        psi = 2 * math.pi * i / cfg.directions
        a = gn.martin_limit_audit(ev, x1, x0, g.asymptotic_direction(psi).n, radii)
        worst = max(worst, float(a.errors[-1]))
        mono = mono and a.monotone_from(20)
        for R, ratio, e in zip(a.radii, a.ratios, a.errors):
            rows.append([i, psi, int(R), ratio, a.target, e])
    ok = worst <= cfg.tol and mono
    write_csv(cfg, ["direction", "psi", "radius", "ratio", "target", "error"], rows,
              {"worst_final_error": worst, "monotone_from_20": mono, "status": "pass" if ok else "fail"})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_boundary(cfg):
    _check_k(cfg.k)
    _require_periodic(cfg)
    ctx = el.make_context(cfg.k)
    ev = ExponentialEvaluator(build_graph(cfg, min(cfg.extent, 6)), ctx)
    b = gn.boundary_map(ev, n_samples=cfg.samples)
    rows = [[a, v, lv, c, c2, s] for a, v, lv, c, c2, s in zip(b.angles, b.v0, b.lifted, b.chi, b.chi2, b.slopes)]
    gap = abs(b.winding - 4 * ctx.K)
    ok = b.monotone and gap <= 1e-6 and bool(np.all(b.slopes > 0))
    write_csv(cfg, ["psi", "v0", "v0_lifted", "chi", "chi2", "slope"], rows,
              {"winding": b.winding, "winding_gap": gap, "monotone": b.monotone,
               "status": "pass" if ok else "fail"})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_amoeba(cfg):
    _require_periodic(cfg)
    ks = sorted(float(k) for k in cfg.k_list)
    for k in ks:
        _check_k(k)
    g = build_graph(cfg, min(cfg.extent, 6))
    rows = []
    for k in ks:
        ctx = el.make_context(k)
        sym = pr.fourier_symbol(g, ctx)
        oval = pr.oval_boundary(sym, cfg.samples)
        ev = ExponentialEvaluator(g, ctx)
        diam = pr.AmoebaSample(points=None, oval=oval).diameter
        rows.append([k, diam, pr.polygon_convex(oval), pr.oval_hausdorff(sym, ev, cfg.samples),
                     float(np.real(sym.P(1.0, 1.0)))])
    diam = [r[1] for r in rows]
    ok = all(r[2] for r in rows) and all(np.diff(diam) > 0)
    write_csv(cfg, ["k", "oval_diameter", "convex", "hausdorff_xi", "P_at_1"], rows,
              {"diameter_monotone": bool(np.all(np.diff(diam) > 0)), "status": "pass" if ok else "fail"})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_params(cfg):
    rows = []
    worst = 0.0
    if cfg.builder == "square":
        rng = np.random.default_rng(cfg.seed)
        cases = [(cfg.q1, cfg.t)] if cfg.t >= 1 else [(rng.uniform(0.02, 0.48), 1 + rng.exponential(0.5))
                                                       for _ in range(cfg.samples)]
        for q1, t in cases:
            if not 0 < q1 < 0.5 or t < 1:
                raise InputError("need 0 < q1 < 1/2 and t >= 1")
            k, th = pr.invert_square_params(q1, t)
            q, tt = pr.square_params_round_trip(k, th)
            err = max(abs(q - q1), abs(tt - t) / t)
            worst = max(worst, err)
            rows.append([q1, t, k, th, math.sqrt(1 - k * k), pr.closed_form_modulus(q1, t), err])
        header = ["q1", "t", "k", "theta", "k_prime", "closed_form", "round_trip_error"]
        ok = worst <= 1e-10
    elif cfg.builder == "triangular":
        for k in sorted(float(x) for x in cfg.k_list):
            _check_k(k)
            sd, td = pr.triangular_direct(k)
            sr, tr = pr.triangular_roots(k)
            res = max(abs(np.polyval(pr.s_poly(k), sd)), abs(np.polyval(pr.t_poly(k), td)))
            err = max(abs(sd - sr), abs(td - tr), res)
            worst = max(worst, err)
            rows.append([k, sd, td, sr, tr, res])
        header = ["k", "s", "t", "s_root", "t_root", "quartic_residual"]
        ok = worst <= 1e-10
    else:
        raise InputError("params supports the square and triangular builders")
    write_csv(cfg, header, rows, {"worst": worst, "status": "pass" if ok else "fail"})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_series(cfg):
    if cfg.order < 12:
        raise InputError("order must be at least 12")
    rep = ser.certify(cfg.order, strict=False)
    s = ser.s_by_newton(cfg.order)
    t = ser.t_by_newton(cfg.order)
    rows = [[n, s.as_strings()[n], t.as_strings()[n]] for n in range(0, cfg.order + 1, 2)]
    summary = {c.name: f"{'ok' if c.passed else 'FAIL'} {c.verified_through} {c.witness}".strip()
               for c in rep.checks}
    summary["status"] = "ALL CHECKS PASS" if rep.passed else "FAILED"
    write_csv(cfg, ["n", "s_n", "t_n"], rows, summary)
    if cfg.out != "-":
        sys.stdout.write(rep.text())
        sys.stdout.write(("ALL CHECKS PASS" if rep.passed else "CHECKS FAILED") + "\n")
    return EXIT_OK if rep.passed else EXIT_FAIL


COMMANDS = {"graph": cmd_graph, "green": cmd_green, "martin": cmd_martin, "boundary": cmd_boundary,
            "amoeba": cmd_amoeba, "params": cmd_params, "series": cmd_series}


# --------------------------------------------------------------------------
# argument parsing

def _parser():
    p = argparse.ArgumentParser(prog="isomartin", description="Massive Laplacian Green functions and Martin boundary")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON file with RunConfig fields")
        s.add_argument("--builder", choices=BUILDERS)
        s.add_argument("--theta-bar", type=float)
        s.add_argument("--extent", type=int)
        s.add_argument("--n-blocks", type=int)
        s.add_argument("--k", type=float)
        s.add_argument("--k-list", type=float, nargs="+")
        s.add_argument("--epsilon", type=float)
        s.add_argument("--tol", type=float)
        s.add_argument("--max-distance", type=float)
        s.add_argument("--radii", type=int, nargs="+")
        s.add_argument("--directions", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--q1", type=float)
        s.add_argument("--t", type=float)
        s.add_argument("--order", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--out", help="output CSV path ('-' for stdout)")
    return p


def make_config(argv):
    args = _parser().parse_args(argv)
    cfg = RunConfig(command=args.command)
    if args.command == "martin":
        cfg.tol = 5e-3
    known = {f.name for f in dataclasses.fields(RunConfig)}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config: {exc}") from exc
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for k, v in data.items():
            setattr(cfg, k, v)
    for k, v in vars(args).items():
        if k not in ("config", "command") and v is not None:
            setattr(cfg, k, v)
    cfg.command = args.command
    return cfg


def main(argv=None):
    try:
        cfg = make_config(argv)
        return COMMANDS[cfg.command](cfg)
    except (InputError, gr.GraphError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, lap.SolverError, ser.CertificationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
