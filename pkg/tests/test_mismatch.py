import math

import numpy as np
import pytest

from coherent_keyrate import errors
from coherent_keyrate.coherence import binary_entropy
from coherent_keyrate.finegrained import FineGrainedStats, bb84_opt_keyrate, lemma2_closed_form
from coherent_keyrate.keyrate import bb84_keyrate, bb84_worstcase_state
from coherent_keyrate.mismatch import (
    DetectorModel,
    ObservedDiag,
    corrected_phase_error,
    discard_keyrate_k1,
    filter_norm,
    filter_op,
    filtered_state,
    gamma_from_observed,
    koashi_keyrate_k2,
    mismatch_f,
    mismatch_keyrate,
    mismatch_pipeline,
    observe,
    phase_error_double_prime,
)
from coherent_keyrate.qstate import BELL_VECTORS, bell_diagonal, parity_projectors, random_state
from oracle_values import K1_001, K1_002, K1_025, K2_025, K_001, K_002, K_025, ZERO_MISMATCH_005

PHI_PLUS = np.outer(BELL_VECTORS[0], BELL_VECTORS[0].conj())
PI_MINUS_X = parity_projectors("X").minus


def test_detector_model():
    d = DetectorModel(0.25, 0.75)
    assert d.x == pytest.approx(0.25)
    for bad in ((0.0, 1.0), (0.5, 1.2)):
        with pytest.raises(errors.OutOfRange):
            DetectorModel(*bad)


def test_filter_examples():
    assert np.allclose(filter_op("Z", DetectorModel(1, 1)), np.eye(2))
    assert np.allclose(filter_op("Z", DetectorModel(0.25, 1)), np.diag([0.5, 1]))
    e0, e1 = 0.3, 0.8
    r0, r1 = math.sqrt(e0), math.sqrt(e1)
    expected = 0.5 * np.array([[r0 + r1, r0 - r1], [r0 - r1, r0 + r1]])
    assert np.allclose(filter_op("X", DetectorModel(e0, e1)), expected)
    with pytest.raises(ValueError):
        filter_op("Y", DetectorModel(e0, e1))


def test_filtered_state_examples(rng):
    rho = random_state(rng)
    assert np.allclose(filtered_state(rho, "Z", DetectorModel(0.6, 0.6)).matrix, rho.matrix)

    e0, e1 = 0.4, 0.9
    out = filtered_state(PHI_PLUS, "Z", DetectorModel(e0, e1)).matrix
    assert np.allclose(np.diag(out).real, np.array([e0, 0, 0, e1]) / (e0 + e1))
    assert out[0, 3] == pytest.approx(math.sqrt(e0 * e1) / (e0 + e1))

    out = filtered_state(np.eye(4) / 4, "Z", DetectorModel(0.5, 1)).matrix
    assert np.allclose(out, np.diag([1, 2, 1, 2]) / 6)


def test_vanishing_norm():
    # Bob's qubit sits entirely in |1> and that detector barely fires
    rho = np.diag([0.0, 1.0, 0.0, 0.0]).astype(complex)
    assert filter_norm(rho, "Z", DetectorModel(1.0, 1e-14)) < 1e-12
    with pytest.raises(errors.VanishingNorm):
        filtered_state(rho, "Z", DetectorModel(1.0, 1e-14))


def test_gamma_examples():
    obs = ObservedDiag("Z", (0.3, 0.2, 0.1, 0.4))
    assert gamma_from_observed(obs, DetectorModel(0.7, 0.7)) == pytest.approx(0.7)
    obs = ObservedDiag("Z", (0.5, 0, 0, 0.5))
    assert gamma_from_observed(obs, DetectorModel(0.5, 1)) == pytest.approx(2 / 3)
    det = DetectorModel(0.3, 0.9)
    sym = observe(bell_diagonal((0.8, 0.1, 0.06, 0.04)), "Z", det)
    assert gamma_from_observed(sym, det) == pytest.approx((0.3 + 0.9) / 2, abs=1e-12)


def test_observed_diag_validation():
    with pytest.raises(errors.OutOfRange):
        ObservedDiag("Z", (0.5, 0.5, 0.5, 0.0))


def test_phase_error_double_prime_examples():
    det = DetectorModel(0.4, 0.9)
    assert phase_error_double_prime(ObservedDiag("X", (0.5, 0, 0, 0.5)), det) == pytest.approx(0)
    obs = ObservedDiag("X", (0.4, 0.15, 0.05, 0.4))
    assert phase_error_double_prime(obs, DetectorModel(0.6, 0.6)) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        phase_error_double_prime(ObservedDiag("Z", (0.5, 0, 0, 0.5)), det)


def test_corrected_phase_error_examples():
    assert corrected_phase_error(0.8, 0.1, DetectorModel(0.8, 0.8)) == pytest.approx(0.1)
    e0, e1, e_p = 0.3, 0.9, 0.05
    expected = 0.5 - 2 * math.sqrt(e0 * e1) / (e0 + e1) * (0.5 - e_p)
    assert corrected_phase_error((e0 + e1) / 2, e_p, DetectorModel(e0, e1)) == pytest.approx(expected)
    with pytest.raises(errors.OutOfRange):
        corrected_phase_error(0.0, 0.1, DetectorModel(e0, e1))


def test_estimation_chain_round_trip(rng):
    for _ in range(100):
        rho = random_state(rng)
        det = DetectorModel(*rng.uniform(0.05, 1.0, size=2))
        obs_x = observe(rho, "X", det)
        e_pp = phase_error_double_prime(obs_x, det)
        assert e_pp == pytest.approx(np.trace(PI_MINUS_X @ rho.matrix).real, abs=1e-10)
        rep = mismatch_pipeline(rho, det)
        rho_z = filtered_state(rho, "Z", det).matrix
        assert abs(rep.details["e_p_prime"] - np.trace(PI_MINUS_X @ rho_z).real) <= 1e-10
        assert abs(rep.details["gamma"] - filter_norm(rho, "Z", det)) <= 1e-10


def test_pipeline_equal_efficiencies_reduces_to_bb84_opt():
    rho = bell_diagonal((0.85, 0.05, 0.07, 0.03))
    rep = mismatch_pipeline(rho, DetectorModel(0.7, 0.7))
    direct = bb84_opt_keyrate(FineGrainedStats.from_state(rho))
    assert rep.rate == pytest.approx(direct.rate, abs=1e-12)


def test_pipeline_symmetric_attack_matches_closed_form(rng):
    for _ in range(50):
        e_b, e_p = rng.uniform(0, 0.15, size=2)
        det = DetectorModel(*rng.uniform(0.1, 1.0, size=2))
        rep = mismatch_pipeline(bb84_worstcase_state(e_b, e_p), det)
        closed = mismatch_keyrate(det.x, e_p, e_b)
        assert abs(rep.rate - closed.rate) <= 1e-9


def test_mismatch_keyrate_examples():
    assert mismatch_f(0.5, 0.05) == pytest.approx(0.95, abs=1e-15)
    assert mismatch_keyrate(0.5, 0.05, 0.05).rate == pytest.approx(ZERO_MISMATCH_005, abs=1e-12)
    for x in (0.1, 0.3, 0.7):
        assert mismatch_keyrate(x, 0, 0).rate == pytest.approx(binary_entropy(x), abs=1e-12)
    assert mismatch_keyrate(0.25, 0.05, 0.05).rate == pytest.approx(K_025, abs=1e-12)
    with pytest.raises(errors.OutOfRange):
        mismatch_keyrate(0.0, 0.05, 0.05)
    with pytest.raises(errors.OutOfRange):
        mismatch_keyrate(0.3, 0.6, 0.05)


def test_mismatch_keyrate_is_closed_form_with_corrected_phase_error(rng):
    for _ in range(100):
        x = rng.uniform(0.02, 0.98)
        e_p, e_b = rng.uniform(0, 0.2, size=2)
        e_p_prime = 0.5 - 2 * math.sqrt(x * (1 - x)) * (0.5 - e_p)
        c = lemma2_closed_form(x, e_b, e_p_prime).c_min
        assert mismatch_keyrate(x, e_p, e_b).rate == pytest.approx(c - binary_entropy(e_b), abs=1e-12)


def test_k1_k2_examples():
    assert discard_keyrate_k1(0.5, 0.05, 0.05) == pytest.approx(ZERO_MISMATCH_005, abs=1e-12)
    assert koashi_keyrate_k2(0.5, 0.05, 0.05) == pytest.approx(ZERO_MISMATCH_005, abs=1e-12)
    assert discard_keyrate_k1(0.25, 0.05, 0.05) == pytest.approx(K1_025, abs=1e-12)
    assert koashi_keyrate_k2(0.25, 0.05, 0.05) == pytest.approx(K2_025, abs=1e-12)
    for x in (0.2, 0.5, 0.9):
        assert discard_keyrate_k1(x, 0, 0) == pytest.approx(2 * min(x, 1 - x))
        assert koashi_keyrate_k2(x, 0, 0) == pytest.approx(2 * min(x, 1 - x))


def test_low_x_behaviour():
    for x, k, k1 in ((0.01, K_001, K1_001), (0.02, K_002, K1_002)):
        assert mismatch_keyrate(x, 0.05, 0.05).rate == pytest.approx(k, abs=1e-12)
        assert discard_keyrate_k1(x, 0.05, 0.05) == pytest.approx(k1, abs=1e-12)
    assert mismatch_keyrate(1e-9, 0.05, 0.05).rate == pytest.approx(-binary_entropy(0.05), abs=1e-6)


def test_noiseless_comparison():
    for x in np.linspace(0.01, 0.99, 99):
        assert binary_entropy(x) >= 2 * min(x, 1 - x) - 1e-15


def test_noisy_comparison_at_five_percent():
    xs = np.linspace(0.01, 0.5, 50)
    k = np.array([mismatch_keyrate(x, 0.05, 0.05).rate for x in xs])
    k1 = np.array([discard_keyrate_k1(x, 0.05, 0.05) for x in xs])
    k2 = np.array([koashi_keyrate_k2(x, 0.05, 0.05) for x in xs])
    assert np.all(k[:-1] > k2[:-1])
    assert k[-1] == pytest.approx(k2[-1], abs=1e-12)
    # K overtakes K1 once and stays above it
    above = k > k1 + 1e-12
    first = int(np.argmax(above))
    assert not above[:first].any() and above[first:-1].all()


def test_f_at_half_is_one_minus_e(rng):
    for e in rng.uniform(0, 0.5, size=50):
        assert mismatch_f(0.5, e) == pytest.approx(1 - e, abs=1e-15)
        assert mismatch_keyrate(0.5, e, 0.1).rate == pytest.approx(bb84_keyrate(0.1, e).rate, abs=1e-12)
