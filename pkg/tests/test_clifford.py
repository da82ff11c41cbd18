"""Gamma-matrix representations and the boundary chirality algebra."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfmass import clifford
from halfmass.errors import DomainError, EigenconditionError

THETA_GRID = np.linspace(0.0, np.pi / 2, 25)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_defining_relations_are_exact(n):
    rep = clifford.build_rep(n)
    res = clifford.verify_defining_relations(rep)
    assert max(res.values()) == 0.0
    assert rep.dim % 2 == 0


@pytest.mark.parametrize("n", [3, 4, 5])
def test_q_identities_on_angle_grid(n):
    rep = clifford.build_rep(n)
    rows = clifford.verify_q_identities(rep, THETA_GRID)
    assert len(rows) == 13
    assert max(row["residual"] for row in rows) < 1e-12


@pytest.mark.parametrize("theta", [0.0, 0.37, np.pi / 2])
def test_chirality_operator_is_hermitian_involution(rep3, theta):
    q = clifford.chirality_operator(rep3, theta)
    assert np.max(np.abs(q @ q - rep3.eye)) < 1e-14
    assert np.max(np.abs(q - q.conj().T)) < 1e-14
    assert abs(np.trace(q)) < 1e-13
    proj = clifford.eigenspace_projector(rep3, theta, 1)
    rank = int(round(np.trace(proj).real))
    assert rank == rep3.dim // 2


def test_eigenspinor_eigencondition(rep3):
    for theta in (0.0, 0.5, 1.2):
        for sign in (1, -1):
            phi = clifford.eigenspinor(rep3, theta, sign)
            q = clifford.chirality_operator(rep3, theta)
            assert np.linalg.norm(q @ phi - sign * phi) < 1e-13
            assert abs(np.linalg.norm(phi) - 1.0) < 1e-14


def test_eigenspinor_rejects_orthogonal_seed(rep3):
    minus = clifford.eigenspinor(rep3, 0.4, -1)
    with pytest.raises(EigenconditionError):
        clifford.eigenspinor(rep3, 0.4, 1, seed=minus)


@settings(max_examples=40, deadline=None)
@given(theta=st.floats(0.0, np.pi / 2),
       sign=st.sampled_from([1, -1]),
       parts=st.lists(st.floats(-1.0, 1.0), min_size=8, max_size=8))
def test_boundary_identities_hold_for_random_eigenspinors(theta, sign, parts):
    rep = clifford.build_rep(3)
    raw = np.array(parts[:4]) + 1.0j * np.array(parts[4:])
    proj = clifford.eigenspace_projector(rep, theta, sign)
    if np.linalg.norm(proj @ raw) < 1e-6:
        raw = clifford.eigenspinor(rep, theta, sign)
    res = clifford.boundary_identity_residuals(rep, theta, sign, raw)
    assert max(res.values()) < 1e-12


def test_momentum_operator_algebra(rep3):
    pt = np.array([0.7, -0.4])
    a = clifford.momentum_operator(rep3, pt)
    norm2 = float(pt @ pt)
    assert np.max(np.abs(a - a.conj().T)) < 1e-14
    assert np.max(np.abs(a @ a - norm2 * rep3.eye)) < 1e-13
    for theta in (0.0, 0.9):
        q = clifford.chirality_operator(rep3, theta)
        assert np.max(np.abs(a @ q - q @ a)) < 1e-13
    with pytest.raises(DomainError):
        clifford.momentum_operator(rep3, np.array([1.0, 2.0, 3.0]))


def test_choose_phi0_joint_eigenvector(rep3):
    pt = np.array([0.7, -0.4])
    for theta in (0.0, 0.5, np.pi / 2):
        for qs in (1, -1):
            phi0, ts = clifford.choose_phi0(rep3, theta, pt, qs)
            assert abs(ts + qs * abs(theta)) < 1e-15
            assert abs(np.linalg.norm(phi0) - 1.0) < 1e-13
            q = clifford.chirality_operator(rep3, ts)
            assert np.linalg.norm(q @ phi0 - qs * phi0) < 1e-12
            a = clifford.momentum_operator(rep3, pt)
            assert np.linalg.norm(a @ phi0 - np.hypot(*pt) * phi0) < 1e-12


def test_pairings(rep3):
    rng = np.random.default_rng(5)
    phi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert clifford.hermitian_inner(phi, psi) == np.conj(
        clifford.hermitian_inner(psi, phi))
    # the Lorentz pairing weighs by the timelike gamma
    direct = np.vdot(phi, rep3.gammas[0] @ psi)
    assert abs(clifford.lorentz_pairing(rep3, phi, psi) - direct) < 1e-14
