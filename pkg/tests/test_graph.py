import math

import numpy as np
import pytest

from isomartin import graph as gr


def _lift_set(g):
    return set(map(tuple, g.lifts.tolist()))


def test_square_builder_geometry(square):
    g = square
    assert g.d == 2
    pe = g.positions[g.edges]
    np.testing.assert_allclose(np.abs(pe[:, 0] - pe[:, 1]), 2 * math.cos(math.pi / 4), rtol=1e-12)
    assert np.all(g.degree[g.interior_primal] == 4)
    np.testing.assert_allclose(g.theta_bar, math.pi / 4)


def test_triangular_builder_degrees(triangular):
    g = triangular
    assert np.all(g.degree[g.interior_primal] == 6)
    np.testing.assert_allclose(g.theta_bar, math.pi / 6)


def test_interior_angle_sums(square_skew, triangular, demo):
    for g in (square_skew, triangular, demo):
        np.testing.assert_allclose(g.angle_sums[g.interior], 2 * math.pi, atol=1e-12)


def test_rejects_flat_rhombi():
    with pytest.raises(ValueError):
        gr.build_square(0.01, 3)
    with pytest.raises(ValueError):
        gr.build_square(math.pi / 2 - 0.01, 3)


def test_minimal_path_is_monotone(triangular):
    g = triangular
    x = g.index([0, 0, 0])
    rng = np.random.default_rng(3)
    for y in rng.choice(g.primal, 20):
        if y == x:
            continue
        path = g.minimal_path(x, y, rng=rng)
        assert len(path) == g.distance(x, y)
        N = g.lift_difference(x, y)
        for j, s in path:
            assert np.sign(N[j]) == s
        counts = np.zeros(g.d, dtype=int)
        for j, s in path:
            counts[j] += s
        np.testing.assert_array_equal(counts, N)


def test_reduced_coords_normalised(square):
    g = square
    x = g.index([0, 0])
    y = g.primal[-1]
    n = g.reduced_coords(x, y).n
    assert np.abs(n).sum() == pytest.approx(1.0)
    with pytest.raises(gr.GraphError):
        g.reduced_coords(x, x)


def test_direction_negation():
    d = gr.Direction(np.array([2.0, -1.0, 1.0]))
    np.testing.assert_allclose((-d).n, -d.n)
    np.testing.assert_allclose(d.n_plus - d.n_minus, d.n)
    with pytest.raises(gr.GraphError):
        gr.Direction(np.zeros(3))


def test_periodic_decomposition(demo):
    g = demo
    T1, T2 = (np.asarray(t) for t in g.periods)
    for r, rep in enumerate(g.domain):
        for n1, n2 in [(0, 0), (1, -2), (-3, 1)]:
            lift = rep + n1 * T1 + n2 * T2
            if g.lookup(lift[None])[0] >= 0:
                assert g.decompose(lift) == (r, n1, n2)


def test_asymptotic_direction_points_along_psi(demo):
    g = demo
    for psi in np.linspace(0, 2 * math.pi, 7, endpoint=False):
        d = g.asymptotic_direction(psi)
        v = g.embedded_direction(d.n)
        assert math.atan2(v.imag, v.real) == pytest.approx(math.atan2(math.sin(psi), math.cos(psi)), abs=1e-9)


def test_spec_round_trip(square_skew, demo):
    for g in (square_skew, demo):
        text = gr.dumps_spec(g)
        h = gr.loads_spec(text)
        np.testing.assert_array_equal(h.lifts, g.lifts)
        assert gr.dumps_spec(h) == text


def test_spec_version_checked():
    with pytest.raises(gr.GraphError):
        gr.loads_spec('{"version": 99, "builder": "square"}')


def test_star_triangle_flip_is_involution(triangular):
    g = triangular
    sites = gr.flippable_sites(g)
    assert sites
    v = sites[len(sites) // 2]
    h = gr.star_triangle_flip(g, v)
    new = [i for i in range(h.n_vertices) if g.lookup(h.lifts[i][None])[0] < 0]
    assert len(new) == 1
    # the moved vertex differs from the old one in three coordinates
    assert np.count_nonzero(h.lifts[new[0]] - g.lifts[v]) == 3
    back = gr.star_triangle_flip(h, new[0])
    assert _lift_set(back) == _lift_set(g)


def test_flip_rejects_non_sites(square):
    with pytest.raises(gr.GraphError):
        gr.star_triangle_flip(square, square.index([0, 0]))


def test_waves_reduced_coordinates_oscillate():
    g = gr.build_waves(6)
    rows = gr.flatness_diagnostic(g, 0.7, [10, 20, 30, 40])
    assert np.ptp(rows[:, 0]) > 0.1


def test_flat_lattice_coordinates_settle(triangular):
    rows = gr.flatness_diagnostic(triangular, 0.7, [4, 8, 11])
    assert np.ptp(rows, axis=0).max() < 0.2


def test_lifted_ray_vertex_parity(square):
    g = square
    x0 = g.index([0, 0])
    for N in (5, 6, 9):
        y = gr.lifted_ray_vertex(g, x0, np.array([0.3, 0.7]), N)
        assert g.is_primal[y]
