import random

import numpy as np
import pytest

from laaksograph.laakso import LaaksoGraph, build_ball_system
from laaksograph.params import BranchingFunction, GluingFunction
from laaksograph.walk import (RandomStream, exact_mean_exit_time, green_partial,
                              green_series, heat_kernel, propagate,
                              simulate_exit_time, step_distribution)


def make_graph(bv, gv, cap=3_000_000):
    b = BranchingFunction.constant(bv, 14) if isinstance(bv, int) else BranchingFunction(bv, k_lo=1)
    g = GluingFunction.constant(gv, 14) if isinstance(gv, int) else GluingFunction(gv, k_lo=1)
    return LaaksoGraph(g, b, bfs_cap=cap)


# -- step distribution ---------------------------------------------------------


def test_step_examples():
    G = make_graph(2, 1)
    root = G.root
    d1 = step_distribution(G, {root: 1.0})
    assert d1 == {G.neighbors(root)[0]: 1.0}
    pos1 = G.neighbors(root)[0]
    d2 = step_distribution(G, d1)
    assert d2[root] == 0.5
    assert len(d2) == 2 and abs(sum(d2.values()) - 1.0) < 1e-15


def test_mass_conservation():
    G = make_graph([3, 2, 4, 2, 2, 2], [2, 1, 3, 1, 1, 1])
    d = {G.root: 1.0}
    for _ in range(24):
        d = step_distribution(G, d)
        assert abs(sum(d.values()) - 1.0) <= 1e-12


def test_stationarity_of_degree_measure_on_induced_ball():
    # reflecting walk on the induced ball fixes the degree-proportional law
    G = make_graph(2, 2)
    ib = G.induced_ball_graph(3)
    n = len(ib.vertices)
    P = np.zeros((n, n))
    for i, nbrs in enumerate(ib.adjacency):
        for j in nbrs:
            P[i, j] = 1.0 / len(nbrs)
    pi = np.array([len(a) for a in ib.adjacency], dtype=float)
    pi /= pi.sum()
    assert np.allclose(pi @ P, pi, atol=1e-14)


# -- heat kernel ----------------------------------------------------------------


def test_heat_kernel_point_values():
    G = make_graph(3, 2)
    root = G.root
    y = G.neighbors(root)[0]
    recs = {(r.n, r.y): r for r in heat_kernel(G, root, 2, [root, y])}
    assert recs[(0, root)].p_n == 1.0 / G.degree(root)
    assert recs[(1, y)].p_n == 1.0 / (G.degree(root) * G.degree(y))
    # half-line: p_2(0,0) = 1/2
    H = make_graph(2, 1)
    r2 = {(r.n, r.y): r for r in heat_kernel(H, H.root, 2, [H.root])}
    assert r2[(2, H.root)].p_n == 0.5


def test_heat_kernel_symmetry():
    G = make_graph([3, 2, 2, 2], [2, 2, 1, 1])
    ball = sorted(G.bfs_ball(G.root, 3))
    rng = random.Random(5)
    xs = rng.sample(ball, 3)
    for x in xs:
        for y in rng.sample(ball, 3):
            px = {(r.n): r.p_n for r in heat_kernel(G, x, 6, [y])}
            py = {(r.n): r.p_n for r in heat_kernel(G, y, 6, [x])}
            for n in range(7):
                assert abs(px[n] - py[n]) <= 1e-10


def test_parity_vanishing_exact():
    G = make_graph([2, 3, 2, 2], [1, 2, 1, 1])
    system = build_ball_system(G, G.root, 9)
    snaps, _ = propagate(system, 8, snapshot_ns=[8])
    v8, v9 = snaps[8]
    for j in range(system.n):
        if (system.dist[j] % 2) != (8 % 2):
            assert v8[j] == 0.0
        if (system.dist[j] % 2) != (9 % 2):
            assert v9[j] == 0.0


def test_on_diagonal_monotone():
    G = make_graph(3, 1)
    recs = heat_kernel(G, G.root, 32, [G.root])
    evens = [r.p_n for r in recs if r.n % 2 == 0]
    for a, b in zip(evens, evens[1:]):
        assert b <= a + 1e-15


# -- exit times -------------------------------------------------------------------


def test_exit_time_half_line_exact():
    G = make_graph(2, 1)
    for r in (2, 4, 8, 16):
        rec = exact_mean_exit_time(G, G.root, r)
        assert rec.mean == float(r * r)
        assert rec.half_width == 0.0


def test_exit_time_radius_one():
    G = make_graph([3, 2, 2], [2, 1, 1])
    for v in list(G.bfs_ball(G.root, 3)):
        assert exact_mean_exit_time(G, v, 1).mean == 1.0


def test_exit_time_dense_solve_oracle():
    # independent dense solve of (D - A) h = deg on the open ball
    G = make_graph([3, 2, 3, 2], [2, 2, 1, 1])
    radius = 8
    system = build_ball_system(G, G.root, radius)
    interior = system.dist < radius
    idx = np.nonzero(interior)[0]
    n = len(idx)
    A = np.zeros((n, n))
    pos = {int(j): i for i, j in enumerate(idx)}
    for i, j in enumerate(idx):
        row = system.adj.indices[system.adj.indptr[j]:system.adj.indptr[j + 1]]
        for k in row:
            if int(k) in pos:
                A[i, pos[int(k)]] = 1.0
    D = np.diag(system.deg[idx])
    h = np.linalg.solve(D - A, system.deg[idx])
    rec = exact_mean_exit_time(G, G.root, radius)
    assert rec.mean == pytest.approx(h[pos[0]], rel=1e-10)


def test_exit_time_doubling_square_law():
    G = make_graph(2, 1)
    means = {r: exact_mean_exit_time(G, G.root, r).mean for r in (4, 8, 16, 32)}
    for r in (4, 8, 16):
        assert means[2 * r] / means[r] == pytest.approx(4.0, rel=1e-12)


def test_monte_carlo_agrees_with_exact():
    rng = random.Random(13)
    configs = [(2, 1), (2, 2), (3, 2), ([2, 3, 2, 2, 2, 2], [2, 1, 2, 1, 1, 1])]
    pairs = 0
    for bv, gv in configs:
        G = make_graph(bv, gv)
        centers = [G.root] + sorted(G.bfs_ball(G.root, 3))[-2:]
        for center in centers:
            for radius in (4, 8):
                exact = exact_mean_exit_time(G, center, radius)
                mc = simulate_exit_time(G, center, radius, 600,
                                        RandomStream(99, pairs))
                assert abs(mc.mean - exact.mean) <= 3 * mc.half_width + 1e-9, \
                    (bv, gv, radius, exact.mean, mc.mean, mc.half_width)
                pairs += 1
    assert pairs >= 20


def test_monte_carlo_radius_one_zero_variance():
    G = make_graph(2, 2)
    mc = simulate_exit_time(G, G.root, 1, 200, RandomStream(1, 0))
    assert mc.mean == 1.0 and mc.half_width == 0.0


def test_monte_carlo_deterministic_and_worker_independent():
    G = make_graph(2, 2)
    a = simulate_exit_time(G, G.root, 6, 700, RandomStream(42, 7), workers=1)
    b = simulate_exit_time(G, G.root, 6, 700, RandomStream(42, 7), workers=4)
    assert a == b
    c = simulate_exit_time(G, G.root, 6, 700, RandomStream(43, 7), workers=1)
    assert c.mean != a.mean  # different seed, different sample


# -- green function ----------------------------------------------------------------


def test_green_partial_examples():
    G = make_graph(3, 2)
    assert green_partial(G, G.root, G.root, 0) == 1.0 / G.degree(G.root)
    H = make_graph(2, 1)
    series = green_series(H, H.root, H.root, [64, 256, 1024])
    s = series.partial_sums
    # recurrent sqrt growth: G(4n)/G(n) -> 2
    assert s[1] / s[0] == pytest.approx(2.0, rel=0.25)
    assert s[2] / s[1] == pytest.approx(2.0, rel=0.25)
    assert series.absorbed_mass == 0.0


def test_green_partial_monotone():
    G = make_graph(2, 2)
    values = [green_partial(G, G.root, G.root, n) for n in (4, 8, 16, 32)]
    for a, b in zip(values, values[1:]):
        assert b >= a


def test_green_truncation_reports_absorbed_mass():
    G = make_graph(2, 2)
    full = green_series(G, G.root, G.root, [64])
    trunc = green_series(G, G.root, G.root, [64], support_radius=16)
    assert trunc.absorbed_mass > 0
    # absorbed mass times the shell Green bound certifies the truncation error
    assert abs(full.partial_sums[0] - trunc.partial_sums[0]) <= \
        trunc.absorbed_mass * max(trunc.shell_green_max, full.shell_green_max) * 10 + 1e-12
