import math

import numpy as np
import pytest

from coherent_keyrate import errors
from coherent_keyrate.coherence import binary_entropy, rel_entropy_coherence
from coherent_keyrate.finegrained import (
    FineGrainedStats,
    bb84_opt_keyrate,
    coherence_of_ab,
    feasible_interval,
    lemma2_closed_form,
    real_part_state,
    rho_of_ab,
    sixstate_opt_keyrate,
    solve_problem1,
    swap_matrix,
    symmetrize,
    tau_matrix,
)
from coherent_keyrate.keyrate import bb84_keyrate, sixstate_keyrate
from coherent_keyrate.qstate import BELL_VECTORS, partial_dephase, random_state
from oracle_values import BB84_003, BB84_OPT_A062_E003, LEMMA2_A06_E003, ONE_MINUS_H_003, SIX_003
from problem1_oracle import brute_force_cmin, random_feasible_stats

PHI_PLUS = np.outer(BELL_VECTORS[0], BELL_VECTORS[0].conj())


def balanced(e_b, e_p, e_y=None):
    return FineGrainedStats((1 - e_b) / 2, e_b / 2, e_b / 2, (1 - e_b) / 2, e_p=e_p, e_y=e_y)


def test_stats_validation():
    with pytest.raises(errors.OutOfRange):
        FineGrainedStats(0.5, 0.5, 0.5, 0.0, e_p=0.1)
    with pytest.raises(errors.OutOfRange):
        FineGrainedStats(0.5, 0.0, 0.0, 0.5, e_p=1.5)
    s = FineGrainedStats.from_alpha(0.6, e_b=0.03, e_p=0.03)
    assert s.m00 / s.m33 == pytest.approx(1.5)
    assert s.m22 / s.m11 == pytest.approx(1.5)
    assert s.e_b == pytest.approx(0.03)


def test_rho_of_ab_examples():
    s = FineGrainedStats(0.4, 0.1, 0.2, 0.3, e_p=0.2)
    assert np.allclose(rho_of_ab(s, 0, 0).matrix, np.diag([0.4, 0.1, 0.2, 0.3]))
    bell = FineGrainedStats(0.5, 0, 0, 0.5, e_p=0)
    assert np.allclose(rho_of_ab(bell, 0.5, 0).matrix, PHI_PLUS)
    s = FineGrainedStats(0.3, 0.2, 0.2, 0.3, e_p=0.0)
    rho = rho_of_ab(s, 0.3, 0.2)
    assert rel_entropy_coherence(rho, "Z") == pytest.approx(float(coherence_of_ab(s, 0.3, 0.2)), abs=1e-12)
    with pytest.raises(errors.NotPositive):
        rho_of_ab(s, 0.31, 0.0)


def test_coherence_of_ab_matches_matrix_route(rng):
    for _ in range(200):
        m, e_p = random_feasible_stats(rng)
        s = FineGrainedStats(*m, e_p=e_p)
        lo, hi = feasible_interval(s)
        a = rng.uniform(lo, hi)
        b = 0.5 - e_p - a
        direct = rel_entropy_coherence(rho_of_ab(s, a, b), "Z")
        assert float(coherence_of_ab(s, a, b)) == pytest.approx(direct, abs=1e-10)


def test_solve_problem1_examples():
    sol = solve_problem1(balanced(0.03, 0.03))
    assert sol.c_min == pytest.approx(ONE_MINUS_H_003, abs=1e-12)
    sol = solve_problem1(balanced(0.03, 0.03), method="numeric")
    assert sol.c_min == pytest.approx(ONE_MINUS_H_003, abs=1e-9)

    half = solve_problem1(balanced(0.1, 0.5))
    assert half.c_min == pytest.approx(0, abs=1e-12)
    assert half.a_bar == pytest.approx(0, abs=1e-12) and half.b_bar == pytest.approx(0, abs=1e-12)

    s = FineGrainedStats.from_alpha(0.6, e_b=0.03, e_p=0.03)
    closed = solve_problem1(s)
    numeric = solve_problem1(s, method="numeric")
    assert closed.method == "closed_form" and numeric.method == "numeric"
    assert closed.c_min == pytest.approx(LEMMA2_A06_E003, abs=1e-12)
    assert numeric.c_min == pytest.approx(LEMMA2_A06_E003, abs=1e-8)
    assert brute_force_cmin(s.diagonal, 0.03) == pytest.approx(LEMMA2_A06_E003, abs=1e-8)


def test_solve_problem1_infeasible():
    with pytest.raises(errors.Infeasible, match="exceeds"):
        solve_problem1(FineGrainedStats(0.7, 0.0, 0.0, 0.3, e_p=0.0))


def test_solve_problem1_rejects_unknown_method():
    with pytest.raises(ValueError):
        solve_problem1(balanced(0.03, 0.03), method="newton")


def test_closed_form_examples():
    sol = lemma2_closed_form(0.5, 0.03, 0.03)
    assert sol.c_min == pytest.approx(1 - binary_entropy(0.97), abs=1e-12)
    assert sol.a_bar == pytest.approx(0.97 * 0.47) and sol.b_bar == pytest.approx(0.03 * 0.47)
    for alpha in (0.1, 0.35, 0.5, 0.8):
        assert lemma2_closed_form(alpha, 0.2, 0.5).c_min == pytest.approx(0, abs=1e-12)
    assert lemma2_closed_form(0.6, 0.03, 0.03).c_min == pytest.approx(LEMMA2_A06_E003, abs=1e-12)
    with pytest.raises(errors.OutOfRange):
        lemma2_closed_form(1.2, 0.03, 0.03)


def test_lemma2_rejects_statistics_no_state_has():
    # alpha = 0.6 with e_p = 0 needs |a| = 1/2 > sqrt(0.24)
    with pytest.raises(errors.Infeasible):
        lemma2_closed_form(0.6, 0.03, 0.0)


def test_bb84_opt_examples():
    assert bb84_opt_keyrate(balanced(0.03, 0.03)).rate == pytest.approx(BB84_003, abs=1e-12)
    s = FineGrainedStats.from_alpha(0.62, e_b=0.03, e_p=0.03)
    r = bb84_opt_keyrate(s)
    assert r.rate == pytest.approx(BB84_OPT_A062_E003, abs=1e-12)
    assert r.rate > BB84_003
    for e_b in (0.0, 0.1, 0.3):
        assert bb84_opt_keyrate(balanced(e_b, 0.5)).rate == pytest.approx(-binary_entropy(e_b), abs=1e-12)


def test_bb84_opt_witness_attains_rate():
    s = FineGrainedStats.from_alpha(0.58, e_b=0.04, e_p=0.05)
    r = bb84_opt_keyrate(s, method="numeric")
    c = rel_entropy_coherence(r.witness, "Z")
    assert c - binary_entropy(0.04) == pytest.approx(r.rate, abs=1e-10)


def test_sixstate_opt_examples():
    assert sixstate_opt_keyrate(balanced(0.03, 0.03, 0.03)).rate == pytest.approx(SIX_003, abs=1e-12)
    bell = FineGrainedStats(0.5, 0, 0, 0.5, e_p=0, e_y=0)
    assert sixstate_opt_keyrate(bell).rate == pytest.approx(1, abs=1e-12)
    assert np.allclose(tau_matrix(bell), PHI_PLUS)
    s = FineGrainedStats.from_alpha(0.62, e_b=0.03, e_p=0.03, e_y=0.03)
    assert sixstate_opt_keyrate(s).rate > sixstate_keyrate(0.03, 0.03, 0.03).rate + 1e-4
    with pytest.raises(errors.NotPositive, match="inconsistent"):
        sixstate_opt_keyrate(FineGrainedStats.from_alpha(0.2, e_b=0.03, e_p=0.03, e_y=0.03))


def test_symmetrize_examples():
    s = FineGrainedStats.from_alpha(0.6, e_b=0.05, e_p=0.04)
    sol = solve_problem1(s)
    rho = rho_of_ab(s, sol.a_bar, sol.b_bar)
    out = symmetrize(symmetrize(rho, 0, 3), 1, 2).matrix
    assert np.allclose(np.diag(out).real, [0.475, 0.025, 0.025, 0.475])
    assert out[0, 3] == pytest.approx(sol.a_bar)
    assert out[1, 2] == pytest.approx(sol.b_bar)

    bal = rho_of_ab(balanced(0.1, 0.1), 0.3, 0.05)
    assert np.allclose(symmetrize(symmetrize(bal, 0, 3), 1, 2).matrix, bal.matrix)
    with pytest.raises(errors.BadIndex):
        symmetrize(bal, 2, 2)
    with pytest.raises(errors.BadIndex):
        swap_matrix(0, 4)


def test_symmetrize_does_not_increase_coherence(rng):
    pairs = [(0, 3), (1, 2), (0, 1), (2, 3)]
    for k in range(1000):
        rho = random_state(rng)
        i, j = pairs[k % 4]
        assert rel_entropy_coherence(rho, "Z") >= rel_entropy_coherence(symmetrize(rho, i, j), "Z") - 1e-12


def test_real_part_does_not_increase_coherence(rng):
    for _ in range(300):
        phi = partial_dephase(random_state(rng))
        real = real_part_state(phi)
        assert np.all(np.abs(real.matrix.imag) <= 1e-15)
        assert rel_entropy_coherence(phi, "Z") >= rel_entropy_coherence(real, "Z") - 1e-12


def test_numeric_matches_brute_force(rng):
    for _ in range(40):
        m, e_p = random_feasible_stats(rng)
        s = FineGrainedStats(*m, e_p=e_p)
        sol = solve_problem1(s, method="numeric")
        assert abs(sol.c_min - brute_force_cmin(s.diagonal, e_p)) <= 1e-7
        assert sol.a_bar + sol.b_bar == pytest.approx(0.5 - e_p, abs=1e-10)
        assert abs(sol.a_bar) <= math.sqrt(s.m00 * s.m33) + 1e-12
        assert abs(sol.b_bar) <= math.sqrt(s.m11 * s.m22) + 1e-12


def _ratio_stats(rng):
    alpha = rng.uniform(0.05, 0.95)
    e_b = rng.uniform(0.0, 0.3)
    lo = 0.5 - math.sqrt(alpha * (1 - alpha))
    e_p = rng.uniform(lo, 0.5)
    if rng.random() < 0.5:
        return FineGrainedStats.from_alpha(alpha, e_b=e_b, e_p=e_p)
    # complementary ratio m00/m33 = m11/m22
    return FineGrainedStats(alpha * (1 - e_b), alpha * e_b, (1 - alpha) * e_b, (1 - alpha) * (1 - e_b), e_p=e_p)


def test_closed_form_matches_numeric(rng):
    for _ in range(100):
        s = _ratio_stats(rng)
        closed = solve_problem1(s)
        assert closed.method == "closed_form"
        numeric = solve_problem1(s, method="numeric")
        assert abs(closed.c_min - numeric.c_min) <= 1e-8


def test_closed_form_solution_structure(rng):
    for _ in range(100):
        s = _ratio_stats(rng)
        sol = solve_problem1(s)
        sign = np.sign(0.5 - s.e_p)
        assert np.sign(sol.a_bar) in (0, sign) and np.sign(sol.b_bar) in (0, sign)
        if s.e_b > 0:
            assert abs(abs(sol.a_bar) / (1 - s.e_b) - abs(sol.b_bar) / s.e_b) <= 1e-8


def test_bb84_opt_never_below_bb84():
    for m00 in np.linspace(0.3, 0.6, 7):
        for m11 in np.linspace(0.005, 0.06, 6):
            for e_p in (0.0, 0.02, 0.05, 0.1):
                m22 = 0.06 - m11
                s = FineGrainedStats(m00, m11, m22, 1 - m00 - 0.06, e_p=e_p)
                try:
                    opt = bb84_opt_keyrate(s).rate
                except errors.Infeasible:
                    continue
                assert opt >= bb84_keyrate(0.06, e_p).rate - 1e-9
    for e_b in (0.0, 0.03, 0.1):
        for e_p in (0.0, 0.03, 0.1):
            assert abs(bb84_opt_keyrate(balanced(e_b, e_p)).rate - bb84_keyrate(e_b, e_p).rate) <= 1e-9


def test_sixstate_opt_never_below_sixstate(rng):
    for _ in range(300):
        s = FineGrainedStats.from_state(random_state(rng))
        opt = sixstate_opt_keyrate(s).rate
        assert opt >= sixstate_keyrate(s.e_x, s.e_y, s.e_b).rate - 1e-9
    for e in (0.0, 0.03, 0.08):
        b = balanced(e, e, e)
        assert abs(sixstate_opt_keyrate(b).rate - sixstate_keyrate(e, e, e).rate) <= 1e-9
