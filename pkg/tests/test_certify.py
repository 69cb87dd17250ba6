import math

import numpy as np
import pytest

from phdelay import (
    CERTIFIED,
    REFUTED,
    DelayPHSystem,
    GeneralDelaySystem,
    SystemValidationError,
    certify_delay_ph,
    check_necessary,
    classical_passivity_check,
    construct_theta,
    crosscheck_classical,
    delay_ph_to_general,
    exists_certifying_theta_grid,
    is_psd,
    kyp_delay_check,
    ph_condition_matrix,
    scalar_theta_interval,
)
from helpers import rand_certified_delay_ph, rand_spd

SQ3 = math.sqrt(3.0)


def scalar_system(alpha0=2.0, alpha1=1.0, theta=None):
    return DelayPHSystem(H=[[1.0]], J=[[0.0]], R=[[alpha0]], Z=[[alpha1]],
                         G=[[1.0]], tau=1.0, theta=theta)


def counterexample_rz():
    """R = I, Z = [[0, 1/sqrt 3], [2/sqrt 3, 0]]: whitened coupling 2/sqrt 3."""
    return np.eye(2), np.array([[0.0, 1.0 / SQ3], [2.0 / SQ3, 0.0]])


# ---------------------------------------------------------------------------
# condition matrix and scalar certification


def test_condition_matrix_hand_value():
    cond = ph_condition_matrix([[2.0]], [[1.0]], [[1.0]])
    np.testing.assert_array_equal(cond, [[1.0, 0.5], [0.5, 1.0]])


def test_condition_matrix_shape_mismatch():
    with pytest.raises(ValueError, match="shape"):
        ph_condition_matrix(np.eye(2), np.eye(2), np.eye(3))


def test_scalar_certify_eigenvalues():
    cert = certify_delay_ph(scalar_system(), [[1.0]])
    assert cert.verdict == CERTIFIED
    evals = np.linalg.eigvalsh(cert.condition_matrix)
    np.testing.assert_allclose(evals, [0.5, 1.5], atol=1e-14)
    assert cert.min_eigenvalue == pytest.approx(0.5)


def test_scalar_eigenvalue_law():
    """lambda = a0/2 +- sqrt(a0^2/4 + th^2 - a0 th + a1^2/4)."""
    rng = np.random.default_rng(31)
    for _ in range(50):
        a0 = rng.uniform(0.1, 3.0)
        a1 = rng.uniform(-2.0, 2.0)
        th = rng.uniform(0.01, 3.0)
        root = math.sqrt(a0 * a0 / 4 + th * th - a0 * th + a1 * a1 / 4)
        expected = np.sort([a0 / 2 - root, a0 / 2 + root])
        got = np.linalg.eigvalsh(ph_condition_matrix([[a0]], [[a1]], [[th]]))
        np.testing.assert_allclose(got, expected, atol=1e-12)


def test_scalar_certify_tracks_interval():
    interval = scalar_theta_interval(2.0, 1.0)
    for th, expect in [
        (interval.lo - 1e-3, REFUTED),
        (interval.lo + 1e-3, CERTIFIED),
        (1.0, CERTIFIED),
        (interval.hi - 1e-3, CERTIFIED),
        (interval.hi + 1e-3, REFUTED),
    ]:
        cert = certify_delay_ph(scalar_system(), [[th]])
        assert cert.verdict == expect, th


def test_scalar_interval_worked_example():
    interval = scalar_theta_interval(2.0, 1.0)
    assert interval.feasible
    assert interval.lo == pytest.approx(1.0 - SQ3 / 2.0, abs=1e-15)
    assert interval.hi == pytest.approx(1.0 + SQ3 / 2.0, abs=1e-15)


def test_scalar_interval_infeasible_and_degenerate():
    assert not scalar_theta_interval(1.0, 2.0).feasible
    assert not scalar_theta_interval(-1.0, 0.0).feasible
    tight = scalar_theta_interval(1.5, 1.5)
    assert tight.feasible
    assert tight.lo == tight.hi == pytest.approx(0.75)


def test_certify_theta_priority_argument_wins():
    sys1 = scalar_system(theta=[[0.05]])  # stored theta refutes
    assert certify_delay_ph(sys1).verdict == REFUTED
    assert certify_delay_ph(sys1, [[1.0]]).verdict == CERTIFIED


def test_certify_requires_some_theta():
    with pytest.raises(ValueError, match="no Theta available"):
        certify_delay_ph(scalar_system())


def test_certify_rejects_bad_theta():
    cert = certify_delay_ph(scalar_system(), [[-0.5]])
    assert cert.verdict == REFUTED
    assert cert.reason == "theta_not_psd"
    with pytest.raises(ValueError, match="shape"):
        certify_delay_ph(scalar_system(), np.eye(2))


def test_certify_validates_system_first():
    bad = DelayPHSystem(H=[[-1.0]], J=[[0.0]], R=[[1.0]], Z=[[0.0]],
                        G=[[1.0]], tau=1.0)
    with pytest.raises(SystemValidationError):
        certify_delay_ph(bad, [[0.5]])


def test_refuted_witness_exhibits_negativity():
    cert = certify_delay_ph(scalar_system(), [[0.05]])
    assert cert.verdict == REFUTED
    w = cert.witness
    assert float(w @ cert.condition_matrix @ w) == pytest.approx(
        cert.min_eigenvalue, abs=1e-12
    )
    assert cert.min_eigenvalue < 0


def test_certify_random_certified_instances():
    rng = np.random.default_rng(33)
    for n in (1, 2, 3, 5):
        for _ in range(10):
            sys1 = rand_certified_delay_ph(rng, n)
            cert = certify_delay_ph(sys1)
            assert cert.verdict == CERTIFIED
            assert cert.min_eigenvalue >= 0.02  # generator guarantees margin


# ---------------------------------------------------------------------------
# necessary conditions


def test_necessary_all_hold_on_certified():
    rng = np.random.default_rng(35)
    for _ in range(25):
        sys1 = rand_certified_delay_ph(rng, 4)
        conditions = check_necessary(sys1.R, sys1.theta, sys1.Z)
        assert conditions.all_hold


def test_necessary_detects_kernel_chain_break():
    # ker(R) = span(e2) but Theta e2 != 0
    conditions = check_necessary(np.diag([1.0, 0.0]), np.diag([0.5, 0.5]),
                                 np.zeros((2, 2)))
    assert not conditions.kernel_chain
    assert not conditions.theta_image_disjoint
    assert not conditions.all_hold


def test_necessary_detects_z_image_meeting_kernel():
    # image(Z) = span(e2) = ker(R)
    z = np.array([[0.0, 0.0], [1.0, 0.0]])
    conditions = check_necessary(np.diag([1.0, 0.0]), np.diag([0.5, 0.0]), z)
    assert not conditions.z_image_disjoint


def test_necessary_holds_on_degenerate_but_consistent_triple():
    conditions = check_necessary(np.diag([1.0, 0.0]), np.diag([0.5, 0.0]),
                                 np.diag([0.4, 0.0]))
    assert conditions.all_hold


# ---------------------------------------------------------------------------
# theta construction


def test_construct_scalar_worked_example():
    out = construct_theta([[2.0]], [[1.0]])
    assert out.success
    np.testing.assert_allclose(out.theta, [[1.0]])
    assert out.interval.sigma == pytest.approx(0.5)
    assert out.interval.lo == pytest.approx(0.5 - SQ3 / 4.0)
    assert out.interval.hi == pytest.approx(0.5 + SQ3 / 4.0)


def test_alpha_interval_matches_scalar_interval():
    """Theta(alpha) = alpha * a0 must reproduce the closed-form interval."""
    rng = np.random.default_rng(37)
    for _ in range(100):
        a0 = rng.uniform(0.1, 3.0)
        a1 = a0 * rng.uniform(1e-3, 1.0) * rng.choice([-1.0, 1.0])
        out = construct_theta([[a0]], [[a1]])
        ref = scalar_theta_interval(a0, a1)
        assert out.success and ref.feasible
        assert out.interval.lo * a0 == pytest.approx(ref.lo, abs=1e-10)
        assert out.interval.hi * a0 == pytest.approx(ref.hi, abs=1e-10)


def test_construct_endpoints_are_tight():
    rng = np.random.default_rng(39)
    for n in (1, 2, 4):
        for _ in range(10):
            r = rand_spd(rng, n, (0.4, 2.0))
            z = rng.standard_normal((n, n))
            # ||Z|| <= lam_min(R) keeps the whitened coupling below one
            z *= rng.uniform(0.1, 0.95) * np.linalg.eigvalsh(r)[0] / np.linalg.norm(z, 2)
            out = construct_theta(r, z)
            assert out.success
            norm_r = np.linalg.norm(r, 2)
            for alpha in (out.interval.lo, out.interval.hi):
                cond = ph_condition_matrix(r, z, alpha * r)
                lam = np.linalg.eigvalsh(cond)[0]
                assert -1e-9 * (1 + norm_r) <= lam <= 1e-5 * norm_r


def test_construct_interior_certifies_with_margin():
    rng = np.random.default_rng(41)
    for _ in range(20):
        r = rand_spd(rng, 3, (0.4, 2.0))
        z = rng.standard_normal((3, 3))
        z *= 0.8 * np.linalg.eigvalsh(r)[0] / np.linalg.norm(z, 2)
        out = construct_theta(r, z)
        assert out.success
        report = is_psd(ph_condition_matrix(r, z, out.theta))
        assert report.is_psd


def test_construct_kernel_guard_z_kernel():
    out = construct_theta(np.diag([1.0, 0.0]),
                          np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert not out.success
    assert "ker(R) is not contained in ker(Z)" in out.reason


def test_construct_kernel_guard_image_meets_kernel():
    out = construct_theta(np.diag([1.0, 0.0]),
                          np.array([[0.0, 0.0], [1.0, 0.0]]))
    assert not out.success
    assert "ker(R) meets image(Z)" in out.reason


def test_construct_kernel_guard_image_escape():
    """Z pushing outside image(R) breaks the whitened reduction.

    For R = diag(1, 0), Z = [[1/2, 0], [1/2, 0]] the first two kernel
    checks pass, yet Theta = R/2 does NOT certify: the construction must
    refuse rather than return an unsound Theta.
    """
    r = np.diag([1.0, 0.0])
    z = np.array([[0.5, 0.0], [0.5, 0.0]])
    naive = is_psd(ph_condition_matrix(r, z, 0.5 * r))
    assert not naive.is_psd  # the would-be certificate is genuinely wrong
    out = construct_theta(r, z)
    assert not out.success
    assert "image(Z) is not contained in image(R)" in out.reason


def test_construct_counterexample_is_inconclusive_not_refuted():
    r, z = counterexample_rz()
    out = construct_theta(r, z)
    assert not out.success
    assert out.reason.startswith("sufficient_condition")
    assert out.interval is not None and not out.interval.feasible
    assert out.interval.sigma == pytest.approx(2.0 / SQ3, abs=1e-12)
    # ... and yet an explicit certificate exists: sufficiency is not necessity
    explicit = np.diag([0.5, 0.25])
    report = is_psd(ph_condition_matrix(r, z, explicit))
    assert report.is_psd
    assert report.min_eigenvalue >= -1e-9


def test_construct_requires_psd_r():
    with pytest.raises(ValueError, match="not positive semidefinite"):
        construct_theta(np.diag([1.0, -1.0]), np.zeros((2, 2)))
    with pytest.raises(ValueError, match="shape"):
        construct_theta(np.eye(2), np.eye(3))


def test_construct_zero_matrices():
    out = construct_theta(np.zeros((2, 2)), np.zeros((2, 2)))
    assert out.success
    np.testing.assert_array_equal(out.theta, np.zeros((2, 2)))
    cert = certify_delay_ph(
        DelayPHSystem(H=np.eye(2), J=np.zeros((2, 2)), R=np.zeros((2, 2)),
                      Z=np.zeros((2, 2)), G=np.zeros((2, 1)), tau=1.0),
        out.theta,
    )
    assert cert.verdict == CERTIFIED


# ---------------------------------------------------------------------------
# classical Riccati-type route


def test_classical_check_hand_example():
    gen = GeneralDelaySystem(A0=[[-2.0]], A1=[[-1.0]], B=[[1.0]], C=[[1.0]],
                             tau=1.0)
    cert = classical_passivity_check(gen, Q=[[0.5]], theta=[[0.5]])
    assert cert.verdict == REFUTED  # C = 1 but B^T Q = 1/2
    assert cert.reason.startswith("output_mismatch")
    assert cert.min_eigenvalue == pytest.approx(1.0)  # inequality itself holds

    gen_fixed = GeneralDelaySystem(A0=[[-2.0]], A1=[[-1.0]], B=[[1.0]],
                                   C=[[0.5]], tau=1.0)
    cert = classical_passivity_check(gen_fixed, Q=[[0.5]], theta=[[0.5]])
    assert cert.verdict == CERTIFIED


def test_classical_check_no_delay_term():
    gen = GeneralDelaySystem(A0=[[-1.0]], A1=[[0.0]], B=[[1.0]], C=[[0.5]],
                             tau=1.0)
    cert = classical_passivity_check(gen, Q=[[0.5]], theta=[[0.25]])
    assert cert.verdict == CERTIFIED
    assert cert.min_eigenvalue == pytest.approx(0.75)


def test_classical_check_requires_spd_inputs():
    gen = GeneralDelaySystem(A0=[[-1.0]], A1=[[0.0]], B=[[1.0]], C=[[0.5]],
                             tau=1.0)
    with pytest.raises(ValueError, match="Q must be"):
        classical_passivity_check(gen, Q=[[0.0]], theta=[[0.5]])
    with pytest.raises(ValueError, match="Theta must be"):
        classical_passivity_check(gen, Q=[[0.5]], theta=[[-0.5]])


def test_crosscheck_scalar_identity():
    """Both sides of the algebraic identity equal -3/4 on the worked scalar."""
    out = crosscheck_classical(scalar_system(), [[1.0]])
    assert out.inequality_certified
    assert out.identity_error <= 1e-15
    assert out.min_eigenvalue == pytest.approx(0.75)
    assert out.output_residual == pytest.approx(0.5)  # G^T vs G^T/2
    assert out.certificate.verdict == CERTIFIED


def test_crosscheck_random_certified():
    rng = np.random.default_rng(43)
    for _ in range(20):
        sys1 = rand_certified_delay_ph(rng, 3)
        out = crosscheck_classical(sys1, sys1.theta)
        assert out.inequality_certified
        assert out.identity_error <= 1e-10
        assert out.min_eigenvalue >= -1e-9


def test_crosscheck_requires_certified_pair():
    with pytest.raises(ValueError, match="certified"):
        crosscheck_classical(scalar_system(), [[0.05]])


# ---------------------------------------------------------------------------
# block KYP route in general coordinates


def test_kyp_hand_example():
    gen = GeneralDelaySystem(A0=[[-1.0]], A1=[[0.0]], B=[[1.0]], C=[[0.5]],
                             tau=1.0)
    cert = kyp_delay_check(gen, Q11=[[0.5]], Q22=[[0.25]])
    assert cert.verdict == CERTIFIED
    np.testing.assert_allclose(cert.condition_matrix,
                               [[0.75, 0.0], [0.0, 0.25]], atol=1e-15)


def test_kyp_zero_q22_with_coupling_refutes():
    gen = GeneralDelaySystem(A0=[[-1.0]], A1=[[1.0]], B=[[1.0]], C=[[0.5]],
                             tau=1.0)
    cert = kyp_delay_check(gen, Q11=[[0.5]], Q22=[[0.0]])
    assert cert.verdict == REFUTED
    assert cert.reason == "block_indefinite"


def test_kyp_block_equals_condition_matrix_at_half_h():
    """With Q11 = H/2, Q22 = Theta the KYP block IS the condition matrix.

    The inequality verdicts therefore coincide; the classical output
    condition C = B^T Q11, however, sees G^T/2 against G^T, so the full
    verdict only matches when G = 0 (next test) or when the doubled
    storage (H, 2 Theta) is used instead.
    """
    rng = np.random.default_rng(45)
    for _ in range(15):
        sys1 = rand_certified_delay_ph(rng, 3)
        gen = delay_ph_to_general(sys1)
        cert = kyp_delay_check(gen, 0.5 * sys1.H, sys1.theta)
        cond = ph_condition_matrix(sys1.R, sys1.Z, sys1.theta)
        np.testing.assert_allclose(cert.condition_matrix, cond, atol=1e-10)
        assert is_psd(cert.condition_matrix).is_psd == is_psd(cond).is_psd
        assert cert.verdict == REFUTED  # output residual ||G^T/2||
        assert cert.reason.startswith("output_mismatch")


def test_kyp_full_verdict_matches_for_zero_port():
    rng = np.random.default_rng(47)
    for _ in range(10):
        sys1 = rand_certified_delay_ph(rng, 3)
        sys0 = DelayPHSystem(sys1.H, sys1.J, sys1.R, sys1.Z,
                             np.zeros((3, 1)), sys1.tau, sys1.theta)
        cert = kyp_delay_check(delay_ph_to_general(sys0), 0.5 * sys0.H,
                               sys0.theta)
        assert cert.verdict == certify_delay_ph(sys0).verdict == CERTIFIED


def test_kyp_doubled_storage_matches_verdict_with_output():
    """(Q11, Q22) = (H, 2 Theta) doubles the block and fixes the output."""
    rng = np.random.default_rng(49)
    for _ in range(15):
        sys1 = rand_certified_delay_ph(rng, 3)
        gen = delay_ph_to_general(sys1)
        cert = kyp_delay_check(gen, sys1.H, 2.0 * sys1.theta)
        assert cert.verdict == certify_delay_ph(sys1).verdict == CERTIFIED
        cond = ph_condition_matrix(sys1.R, sys1.Z, sys1.theta)
        np.testing.assert_allclose(cert.condition_matrix, 2.0 * cond,
                                   atol=1e-10)


# ---------------------------------------------------------------------------
# brute-force grid oracle


def test_grid_oracle_scalar():
    found, theta = exists_certifying_theta_grid([[2.0]], [[1.0]])
    assert found
    assert is_psd(ph_condition_matrix([[2.0]], [[1.0]], theta)).is_psd
    found, theta = exists_certifying_theta_grid([[1.0]], [[2.0]])
    assert not found and theta is None


def test_grid_oracle_finds_counterexample_theta():
    r, z = counterexample_rz()
    found, theta = exists_certifying_theta_grid(r, z)
    assert found
    report = is_psd(ph_condition_matrix(r, z, theta))
    assert report.is_psd


def test_grid_oracle_zero_edge_cases():
    found, theta = exists_certifying_theta_grid(np.zeros((2, 2)),
                                                np.zeros((2, 2)))
    assert found
    np.testing.assert_array_equal(theta, np.zeros((2, 2)))
    found, _ = exists_certifying_theta_grid(np.zeros((2, 2)), np.eye(2))
    assert not found


def test_grid_oracle_rejects_large_systems():
    with pytest.raises(ValueError, match="n = 1 and n = 2"):
        exists_certifying_theta_grid(np.eye(3), np.zeros((3, 3)))


def test_grid_oracle_agrees_with_construction():
    rng = np.random.default_rng(51)
    for _ in range(10):
        r = rand_spd(rng, 2, (0.5, 1.5))
        z = rng.standard_normal((2, 2))
        z *= rng.uniform(0.1, 0.85) * np.linalg.eigvalsh(r)[0] / np.linalg.norm(z, 2)
        out = construct_theta(r, z)
        assert out.success and out.interval.sigma <= 1.0
        found, theta = exists_certifying_theta_grid(r, z)
        assert found
        assert is_psd(ph_condition_matrix(r, z, theta)).is_psd
