import math
import random

import pytest

from laaksograph.profiles import DoublingProfile, check_admissible, phi


def test_eval_power_law():
    p = DoublingProfile.power(2)
    assert p.eval(4) == 16
    assert DoublingProfile.power(1).eval(7) == 7


def test_eval_table_midpoint():
    p = DoublingProfile.table(1, [2.0, 8.0])
    assert p.eval(3) == 5.0  # linear midpoint of the anchors at 2 and 4
    assert p.eval(2) == 2.0
    assert p.eval(4) == 8.0


def test_eval_table_extension_uses_boundary_ratio():
    p = DoublingProfile.table(0, [1.0, 2.0, 4.0])
    assert p.eval(16) == 16.0  # ratio 2 continues above the window
    assert p.eval(0.5) == 0.5


def test_doubling_constant():
    assert DoublingProfile.power(2).doubling_constant(-4, 10) == 4.0
    assert DoublingProfile.power(1).doubling_constant(0, 8) == 2.0
    p = DoublingProfile.table(0, [1.0, 3.0, 6.0])
    assert p.doubling_constant(0, 2) == 3.0


def test_eval_strictly_increasing_random_pairs():
    rng = random.Random(7)
    profiles = [
        DoublingProfile.power(1.3),
        DoublingProfile.power(2.0),
        DoublingProfile.table(0, [1.0, 2.0, 5.0, 11.0, 30.0]),
        DoublingProfile.table(-3, [0.25, 0.5, 1.5, 4.0, 9.0, 27.0]),
    ]
    for p in profiles:
        for _ in range(1000):
            a = math.exp(rng.uniform(-8, 8))
            b = math.exp(rng.uniform(-8, 8))
            if a == b:
                continue
            lo, hi = min(a, b), max(a, b)
            assert p.eval(lo) < p.eval(hi)


def test_inverse_round_trip():
    rng = random.Random(11)
    p = DoublingProfile.table(0, [1.0, 2.0, 5.0, 11.0, 30.0])
    for _ in range(200):
        r = math.exp(rng.uniform(-4, 6))
        y = p.eval(r)
        assert p.eval(p.inverse(y)) == pytest.approx(y, rel=1e-12)


# -- admissibility -------------------------------------------------------------


def test_admissible_boundary_cases():
    V1 = DoublingProfile.power(1)
    psi2 = DoublingProfile.power(2)
    rep = check_admissible(V1, psi2, 1.0, 0, 20)
    assert rep.admissible and rep.best_constant == pytest.approx(1.0)
    assert rep.witness is None

    V2 = DoublingProfile.power(2)
    rep = check_admissible(V2, psi2, 1.0, 0, 20)
    assert rep.admissible  # beta = 2 <= alpha + 1 = 3


def test_not_admissible_beta_too_large():
    rep = check_admissible(DoublingProfile.power(1), DoublingProfile.power(3), 8.0, 0, 20)
    assert not rep.admissible
    assert rep.witness is not None
    assert rep.best_constant > 8.0


def test_admissible_monotone_in_C0():
    V = DoublingProfile.power(1.5)
    psi = DoublingProfile.power(2.2)
    for k_hi in (8, 16):
        rep1 = check_admissible(V, psi, 1.0, 0, k_hi)
        best = rep1.best_constant
        assert check_admissible(V, psi, best, 0, k_hi).admissible
        assert check_admissible(V, psi, best * 4, 0, k_hi).admissible
        if not rep1.admissible:
            assert not check_admissible(V, psi, best / 2, 0, k_hi).admissible


def test_power_law_iff_exponent_window():
    # best constant ~1 exactly when 2 <= beta <= alpha + 1 on dyadic grids
    for alpha in (1.0, 1.5, 2.0, 2.5, 3.0):
        for beta in (1.5, 2.0, 2.5, 3.0, 3.5):
            rep = check_admissible(DoublingProfile.power(alpha),
                                   DoublingProfile.power(beta), 2.0, 0, 20)
            expected = 2.0 <= beta <= alpha + 1.0
            assert rep.admissible == expected, (alpha, beta, rep.best_constant)
            if expected:
                assert rep.best_constant == pytest.approx(1.0)


# -- the envelope transform ----------------------------------------------------


def analytic_phi_power(beta, s):
    # maximize s/r - r^-beta: optimum at r = (beta/s)^(1/(beta-1))
    r = (beta / s) ** (1.0 / (beta - 1.0))
    return s / r - r ** (-beta)


def test_phi_examples():
    psi2 = DoublingProfile.power(2)
    assert phi(psi2, 0.0) == 0.0
    assert phi(psi2, 2.0) == pytest.approx(1.0, abs=1e-9)
    assert phi(psi2, 1.0) == pytest.approx(0.25, abs=1e-9)


def test_phi_against_analytic_oracle():
    for beta in (1.5, 2.0, 2.5, 3.0):
        psi = DoublingProfile.power(beta)
        for s in (0.1, 0.5, 1.0, 2.5, 7.0):
            assert phi(psi, s) == pytest.approx(analytic_phi_power(beta, s), rel=1e-8)


def test_phi_discrete_floor():
    # with r >= 1 the interior optimum below 1 is clamped to the boundary
    psi = DoublingProfile.power(2)
    s = 4.0  # unconstrained optimum at r = 1/2
    expected = max(analytic_phi_power(2.0, s), s / 1.0 - 1.0)  # r = 1 value
    assert phi(psi, s, 1.0) == pytest.approx(max(0.0, s - 1.0), rel=1e-9)
    assert phi(psi, s, 1.0) <= expected + 1e-12


def test_phi_monotone_convex_grid():
    for psi in (DoublingProfile.power(2.0), DoublingProfile.power(2.6),
                DoublingProfile.table(0, [2.0 ** (1.9 * k) for k in range(12)])):
        svals = [0.02 * (i + 1) for i in range(100)]
        pvals = [phi(psi, s) for s in svals]
        for a, b in zip(pvals, pvals[1:]):
            assert b >= a - 1e-6 * max(1.0, abs(a))
        for a, b, c in zip(pvals, pvals[1:], pvals[2:]):
            assert a + c - 2 * b >= -1e-6 * max(1.0, abs(b))


def test_admissibility_report_witness_invariant():
    rep = check_admissible(DoublingProfile.power(1), DoublingProfile.power(3), 4.0, 0, 16)
    assert (rep.witness is not None) == (not rep.admissible)
    rep2 = check_admissible(DoublingProfile.power(2), DoublingProfile.power(2), 2.0, 0, 16)
    assert rep2.witness is None
