"""Dilation continuity: gap computation and the two-sided sandwich."""
import numpy as np
import pytest

from chancalc.channels import (
    StinespringDilation,
    depolarizing,
    identity_channel,
    pad_dilation,
    random_channel,
    to_stinespring,
    unitary_channel,
)
from chancalc.continuity import isometry_gap, verify_continuity
from chancalc.errors import DimensionMismatch
from chancalc.linalg import haar_unitary, operator_norm
from chancalc.rng import RngStream


def phase_channel(theta):
    return unitary_channel(np.diag([1.0, np.exp(1j * theta)]))


def common_pad(d1, d2):
    m = max(d1.d_E, d2.d_E)
    return pad_dilation(d1, m), pad_dilation(d2, m)


def test_gap_same_dilation_zero():
    d = to_stinespring(random_channel(2, 2, 2, RngStream(50)))
    gap, U = isometry_gap(d, d, seed=0)
    assert gap < 1e-7
    assert np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() < 1e-10


def test_gap_phase_pair():
    # oracle: with d_E = 1 the unitary is a scalar phase z, and
    # ||z V1 - V2||_op over |z| = 1 minimizes at 2(1 - cos(pi/4)) squared norm
    thetas = np.linspace(0, 2 * np.pi, 4001)
    V1 = np.eye(2)
    V2 = np.diag([1.0, np.exp(1j * np.pi / 2)])
    vals = [operator_norm(np.exp(1j * t) * V1 - V2) for t in thetas]
    oracle = min(vals)
    assert abs(oracle**2 - 2 * (1 - np.cos(np.pi / 4))) < 1e-5

    d1 = to_stinespring(identity_channel(2))
    d2 = to_stinespring(phase_channel(np.pi / 2))
    gap, U = isometry_gap(d1, d2, seed=1)
    assert abs(gap - 0.76537) < 1e-5
    assert abs(gap - oracle) < 1e-5
    # the returned U actually achieves it
    V1r = np.kron(np.eye(2), U) @ d1.v
    assert operator_norm(V1r - d2.v) <= gap + 1e-8


def test_gap_identity_vs_depolarizing():
    d1, d2 = common_pad(to_stinespring(identity_channel(2)),
                        to_stinespring(depolarizing(2)))
    gap, U = isometry_gap(d1, d2, seed=2)
    assert abs(gap * gap - 1.0) < 1e-6  # 2(1 - F) with F = 1/2


def test_gap_dimension_mismatch():
    d1 = to_stinespring(identity_channel(2))
    d2 = to_stinespring(identity_channel(3))
    with pytest.raises(DimensionMismatch):
        isometry_gap(d1, d2)


def test_verify_continuity_same_channel():
    T = random_channel(2, 2, 2, RngStream(51))
    rep = verify_continuity(T, T, seed=3)
    assert rep.gap < 1e-6
    assert rep.cb < 1e-6
    assert abs(rep.fidelity - 1.0) < 1e-6


def test_verify_continuity_phase_pair():
    rep = verify_continuity(identity_channel(2), phase_channel(np.pi / 2), seed=4)
    assert abs(rep.gap**2 - 0.58579) < 1e-4
    assert abs(rep.cb - 1.41421) < 1e-4
    assert abs(2 * rep.gap - 1.53073) < 1e-4
    assert rep.inequalities["left"] >= -1e-6
    assert rep.inequalities["right"] >= -1e-6
    assert abs(rep.inequalities["identity"]) < 1e-6
    assert abs(rep.fidelity - np.cos(np.pi / 4)) < 1e-6


def test_verify_continuity_random_pairs():
    rng = RngStream(52)
    for k in range(12):
        T1 = random_channel(2, 2, 2 + (k % 3), rng.derive(2 * k))
        T2 = random_channel(2, 2, 2 + ((k + 1) % 3), rng.derive(2 * k + 1))
        rep = verify_continuity(T1, T2, seed=100 + k)
        assert rep.inequalities["left"] >= -1e-6
        assert rep.inequalities["right"] >= -1e-6
        assert abs(rep.inequalities["identity"]) < 1e-6


def test_gap_unitary_freedom():
    rng = RngStream(53)
    T1 = random_channel(2, 2, 2, rng)
    T2 = random_channel(2, 2, 2, rng.derive(1))
    d1, d2 = common_pad(to_stinespring(T1), to_stinespring(T2))
    gap0, _ = isometry_gap(d1, d2, seed=5)
    W = haar_unitary(d1.d_E, rng.derive(2))
    V3 = np.einsum("fe,bea->bfa", W, d1.v_tensor())
    d1r = StinespringDilation(V3.reshape(d1.v.shape), d1.d_A, d1.d_B, d1.d_E)
    gap1, _ = isometry_gap(d1r, d2, seed=5)
    assert abs(gap0 - gap1) < 1e-8


def test_right_half_with_returned_unitary():
    # cb <= 2 ||(1 (x) U) V1 - V2||_op for the returned U specifically
    from chancalc.metrics import diamond_norm
    rng = RngStream(54)
    for k in range(5):
        T1 = random_channel(2, 2, 2, rng.derive(2 * k))
        T2 = random_channel(2, 2, 3, rng.derive(2 * k + 1))
        d1, d2 = common_pad(to_stinespring(T1), to_stinespring(T2))
        gap, U = isometry_gap(d1, d2, seed=6 + k)
        direct = operator_norm(np.kron(np.eye(2), U) @ d1.v - d2.v)
        cb = diamond_norm(T1.base - T2.base).value
        assert cb <= 2 * direct + 1e-6
