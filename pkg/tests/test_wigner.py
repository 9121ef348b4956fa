from __future__ import annotations

import warnings

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.spatial.transform import Rotation

from curved_wigner.errors import NotALorentzTransform, OrthogonalityViolation, StepTooCoarse
from curved_wigner.geometry import ETA
from curved_wigner.scenarios import accumulate_circular_spin, circular_generator
from curved_wigner.wigner import (FRAME_PAULI, InfinitesimalLLT, LocalMomentum, accumulate_wigner,
                                  first_order_expansion_check, axial_vector, exact_wigner, infinitesimal_llt,
                                  infinitesimal_wigner, inverse_boost, is_lorentz, rotation_from_spin,
                                  spin_half_step, standard_boost)


def random_lambda(rng, scale=1.0) -> InfinitesimalLLT:
    A = rng.normal(size=(4, 4)) * scale
    return InfinitesimalLLT(ETA @ (A - A.T))


def boost_along(n, rapidity):
    n = np.asarray(n, float) / np.linalg.norm(n)
    K = np.zeros((4, 4))
    K[0, 1:] = n
    K[1:, 0] = n
    return expm(rapidity * K)


def spatial(R3):
    L = np.eye(4)
    L[1:, 1:] = R3
    return L


def test_rest_boost_is_identity():
    assert np.allclose(standard_boost(LocalMomentum.at_rest(2.0)), np.eye(4))


def test_boost_for_unit_momentum():
    p = LocalMomentum([1.0, 0.0, 0.0], 1.0)
    L = standard_boost(p)
    assert (L[0, 0], L[1, 0], L[1, 1]) == pytest.approx((np.sqrt(2), 1.0, np.sqrt(2)), abs=1e-14)
    assert is_lorentz(L)
    assert np.allclose(L @ [1, 0, 0, 0], p.p)
    assert np.allclose(inverse_boost(p) @ L, np.eye(4), atol=1e-14)


def test_boost_rotation_covariance():
    rng = np.random.default_rng(1)
    for _ in range(10):
        q = rng.normal(size=3)
        R = Rotation.random(random_state=rng).as_matrix()
        lhs = standard_boost(LocalMomentum(R @ q, 1.3))
        rhs = spatial(R) @ standard_boost(LocalMomentum(q, 1.3)) @ spatial(R).T
        assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_off_shell_momentum_rejected():
    with pytest.raises(ValueError):
        LocalMomentum([2.0, 0.0, 0.0, 0.0], 1.0)


def test_exact_wigner_special_cases():
    p = LocalMomentum([0.3, -0.2, 0.5], 1.0)
    W = exact_wigner(boost_along(p.spatial, 0.7), p).W
    assert np.max(np.abs(W - np.eye(4))) < 1e-10
    R = spatial(Rotation.from_rotvec([0.1, 0.4, -0.2]).as_matrix())
    assert np.max(np.abs(exact_wigner(R, p).W - R)) < 1e-10
    assert np.max(np.abs(exact_wigner(np.eye(4), p).W - np.eye(4))) < 1e-12
    with pytest.raises(NotALorentzTransform):
        exact_wigner(2 * np.eye(4), p)


def test_exact_wigner_is_rotation_for_generic_boost():
    p = LocalMomentum([0.3, -0.2, 0.5], 1.0)
    w = exact_wigner(boost_along([0, 1, 0.2], 0.9), p)
    assert w.orthogonality_residual() < 1e-10
    assert np.allclose(w.W[0], [1, 0, 0, 0], atol=1e-10)
    assert np.linalg.norm(w.W - np.eye(4)) > 1e-3


def test_infinitesimal_llt_cases():
    p = LocalMomentum([0.3, -0.2, 0.5], 1.0)
    assert np.all(infinitesimal_llt(np.zeros(4), p, np.zeros((4, 4))).lam == 0)
    chi = np.zeros((4, 4))
    chi[1, 3], chi[3, 1] = 0.2, -0.2
    assert np.allclose(infinitesimal_llt(np.zeros(4), LocalMomentum.at_rest(), chi).lam, chi)
    rng = np.random.default_rng(2)
    for _ in range(20):
        q = LocalMomentum(rng.normal(size=3), 1.0)
        a = rng.normal(size=4)
        a[0] = a[1:] @ q.spatial / q.p[0]       # a . p = 0
        lam = infinitesimal_llt(a, q, random_lambda(rng).lam)
        assert lam.antisymmetry_residual() < 1e-12
    with pytest.raises(OrthogonalityViolation):
        infinitesimal_llt([1.0, 0, 0, 0], LocalMomentum.at_rest(), np.zeros((4, 4)))


def test_infinitesimal_wigner_cases():
    rest = LocalMomentum.at_rest()
    chi = np.zeros((4, 4))
    chi[1, 2], chi[2, 1] = 0.3, -0.3
    th = infinitesimal_wigner(InfinitesimalLLT(chi), rest).generator
    assert np.allclose(th, chi)
    boost = np.zeros((4, 4))
    boost[0, 2] = boost[2, 0] = 0.4
    assert np.all(infinitesimal_wigner(InfinitesimalLLT(boost), rest).generator == 0)


def test_first_order_generator_matches_exact_map():
    rng = np.random.default_rng(5)
    for _ in range(50):
        p = LocalMomentum(rng.normal(size=3), 1.0)
        rep = first_order_expansion_check(random_lambda(rng, 0.3), p, [1e-2, 1e-3, 1e-4, 1e-5])
        assert 0.9 <= rep.slope <= 1.1
        assert np.all(rep.time_errors < 1e-2 * np.asarray(rep.dtau) + 1e-12)


def test_expansion_with_zero_lambda():
    rep = first_order_expansion_check(InfinitesimalLLT(np.zeros((4, 4))), LocalMomentum([0.3, -0.2, 0.5], 1.0),
                                   [1e-2, 1e-3])
    assert np.all(rep.errors < 1e-12)


def test_spin_half_step_basics():
    assert np.allclose(spin_half_step(np.zeros((4, 4)), 0.1).D, np.eye(2))
    rng = np.random.default_rng(4)
    for _ in range(10):
        th = random_lambda(rng).lam
        th[0, :] = th[:, 0] = 0
        th /= np.linalg.norm(axial_vector(th))       # unit rotation rate
        D = spin_half_step(th, 1e-3)
        assert D.unitarity_residual() < 1e-6
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        spin_half_step(th * 1e3, 1.0, exact=True)
    with pytest.warns(UserWarning):
        spin_half_step(th * 1e3, 1.0)


def test_constant_rotation_about_frame_z():
    # lowered theta_31 = c about the frame axis 2 = -z
    c, tau = 0.3, 2.0
    th = np.zeros((4, 4))
    th[3, 1], th[1, 3] = -c, c
    D = spin_half_step(th, tau, exact=True).D
    assert np.allclose(D, np.diag([np.exp(-0.5j * c * tau), np.exp(0.5j * c * tau)]), atol=1e-14)


def test_double_cover_matches_vector_rotation():
    rng = np.random.default_rng(8)
    for _ in range(10):
        th = random_lambda(rng).lam
        th[0, :] = th[:, 0] = 0
        D = spin_half_step(th, 0.7, exact=True).D
        assert np.max(np.abs(rotation_from_spin(D) - expm(th[1:, 1:] * 0.7))) < 1e-12
        for j in range(3):
            assert np.allclose(D.conj().T @ FRAME_PAULI[j] @ D,
                               sum(rotation_from_spin(D)[i, j] * FRAME_PAULI[i] for i in range(3)))


def test_axial_vector_ordering():
    th = np.zeros((4, 4))
    th[2, 3], th[3, 1], th[1, 2] = 1.0, 2.0, 3.0
    assert np.allclose(axial_vector(th), [1, 2, 3])


def test_accumulate_zero_span_and_step_budget():
    acc = accumulate_wigner(lambda s: np.ones((4, 4)), (1.0, 1.0))
    assert np.allclose(acc.W, np.eye(4)) and np.allclose(acc.D, np.eye(2))
    th = np.zeros((4, 4))
    th[1, 2], th[2, 1] = 1.0, -1.0
    with pytest.raises(StepTooCoarse):
        accumulate_wigner(lambda s: th, (0.0, 10.0), steps=10)


def test_accumulate_constant_generator_is_exponential():
    th = np.zeros((4, 4))
    th[1, 2], th[2, 1] = 0.2, -0.2
    th[2, 3], th[3, 2] = -0.1, 0.1
    acc = accumulate_wigner(lambda s: th, (0.0, 5.0))
    assert np.max(np.abs(acc.W[1:, 1:] - expm(th[1:, 1:] * 5.0))) < 1e-10
    assert acc.double_cover_residual() < 1e-10


def test_circular_generator_is_spin_up_rate():
    th = circular_generator(1.0, 6.0, 0.0)
    assert (ETA @ th)[3, 1] == pytest.approx(1 / 108, abs=1e-9)
    assert np.max(np.abs(th + th.T)) < 1e-12


def test_orbit_accumulation_invariants():
    res = accumulate_circular_spin(1.0, 6.0)
    rot = res.rotation
    assert rot.double_cover_residual() < 1e-8
    assert rot.orthogonality_residual() < 1e-8
    finer = accumulate_circular_spin(1.0, 6.0, steps=2 * rot.steps).rotation
    assert np.max(np.abs(finer.D - rot.D)) < 1e-6
    # |phase| = chi tau / 2 with the proper-time argument
    assert abs(np.angle(rot.D[0, 0])) == pytest.approx(res.chi_up * res.tau / 2, abs=1e-6)
    assert np.max(np.abs(rot.D - res.closed_form)) < 1e-6
