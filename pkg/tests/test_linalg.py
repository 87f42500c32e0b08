"""Dense linear algebra kernel: decompositions, partial trace, fidelity."""
import numpy as np
import pytest

from chancalc.errors import DimensionMismatch, NotHermitian
from chancalc.linalg import (
    DensityMatrix,
    PureState,
    eig_hermitian,
    haar_state,
    haar_unitary,
    operator_norm,
    partial_trace,
    polar,
    purify,
    schatten_norm,
    state_fidelity,
    svd,
    tensor,
    trace_norm,
)
from chancalc.rng import RngStream


def random_herm(d, rng):
    G = rng.complex_normal((d, d))
    return G + G.conj().T


def random_density(d, rng):
    G = rng.complex_normal((d, d))
    M = G @ G.conj().T
    return M / np.trace(M).real


def test_svd_examples():
    U, s, W = svd(np.diag([3.0, -4.0]))
    assert np.allclose(s, [4.0, 3.0])
    assert np.allclose(U @ np.diag(s) @ W.conj().T, np.diag([3.0, -4.0]))

    _, s, _ = svd(np.zeros((3, 2)))
    assert np.allclose(s, 0.0)

    rng = RngStream(0)
    psi = haar_state(4, rng)
    phi = haar_state(4, rng.derive(1))
    _, s, _ = svd(np.outer(psi, phi.conj()))
    assert abs(s[0] - 1.0) < 1e-12 and np.all(s[1:] < 1e-12)


def test_svd_reconstruction_random():
    rng = RngStream(1)
    for k in range(5):
        M = rng.derive(k).complex_normal((4, 6))
        U, s, W = svd(M)
        assert np.abs(U @ np.diag(s) @ W.conj().T - M).max() < 1e-10 * max(s[0], 1)
        assert np.abs(U.conj().T @ U - np.eye(U.shape[1])).max() < 1e-12
        assert np.abs(W.conj().T @ W - np.eye(W.shape[1])).max() < 1e-12


def test_polar_examples():
    U, P = polar(2.0 * np.eye(3))
    assert np.allclose(U, np.eye(3)) and np.allclose(P, 2.0 * np.eye(3))

    V = haar_unitary(3, RngStream(2))
    U, P = polar(V)
    assert np.abs(U - V).max() < 1e-10
    assert np.abs(P - np.eye(3)).max() < 1e-10

    # singular input: completion pairs null directions in index order
    U, P = polar(np.diag([1.0, 0.0]))
    assert np.allclose(U, np.eye(2))
    assert np.allclose(P, np.diag([1.0, 0.0]))


def test_polar_reconstructs():
    rng = RngStream(3)
    for k in range(5):
        M = rng.derive(k).complex_normal((4, 4))
        U, P = polar(M)
        assert np.abs(U @ P - M).max() < 1e-10
        assert np.abs(U.conj().T @ U - np.eye(4)).max() < 1e-10
        assert np.linalg.eigvalsh(P).min() > -1e-10


def test_tensor_convention():
    assert np.allclose(tensor(np.eye(2), np.eye(3)), np.eye(6))
    assert np.allclose(tensor(np.diag([1, 2]), np.eye(2)), np.diag([1, 1, 2, 2]))
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    P0 = np.diag([1.0, 0.0])
    M = tensor(P0, X)
    assert np.allclose(M[:2, :2], X) and np.abs(M[2:, 2:]).max() == 0


def test_partial_trace():
    rng = RngStream(4)
    A = random_density(2, rng)
    B = random_density(3, rng.derive(1))
    assert np.abs(partial_trace(tensor(A, B), (2, 3), keep=1) - A).max() < 1e-12
    assert np.abs(partial_trace(tensor(A, B), (2, 3), keep=2) - B).max() < 1e-12

    omega = np.zeros(4, dtype=complex)
    omega[0] = omega[3] = 1 / np.sqrt(2)
    proj = np.outer(omega, omega.conj())
    assert np.abs(partial_trace(proj, (2, 2), keep=2) - np.eye(2) / 2).max() < 1e-12

    M = random_herm(6, rng.derive(2))
    t1 = np.trace(partial_trace(M, (2, 3), keep=1))
    t2 = np.trace(partial_trace(M, (2, 3), keep=2))
    assert abs(t1 - np.trace(M)) < 1e-12 and abs(t2 - np.trace(M)) < 1e-12

    with pytest.raises(DimensionMismatch):
        partial_trace(np.eye(5), (2, 3), keep=1)


def test_schatten_norms():
    assert abs(schatten_norm(np.diag([1.0, -2.0]), "trace") - 3.0) < 1e-12
    U = haar_unitary(4, RngStream(5))
    assert abs(schatten_norm(U, "operator") - 1.0) < 1e-12

    # |psi><psi| - I/2 has eigenvalues +-1/2, checked via eigendecomposition
    psi = haar_state(2, RngStream(6))
    M = np.outer(psi, psi.conj()) - np.eye(2) / 2
    w = np.linalg.eigvalsh(M)
    assert np.allclose(np.sort(w), [-0.5, 0.5])
    assert abs(trace_norm(M) - 1.0) < 1e-12

    rng = RngStream(7)
    for k in range(5):
        M = rng.derive(k).complex_normal((3, 4))
        assert trace_norm(M) >= operator_norm(M) - 1e-12


def test_state_fidelity_examples():
    rho = random_density(3, RngStream(8))
    assert abs(state_fidelity(rho, rho) - 1.0) < 1e-10

    e0 = np.diag([1.0, 0.0])
    e1 = np.diag([0.0, 1.0])
    assert state_fidelity(e0, e1) < 1e-10

    # pure vs mixed closed form sqrt(<psi|sigma|psi>)
    f = state_fidelity(e0, np.eye(2) / 2)
    assert abs(f - np.sqrt(0.5)) < 1e-10
    assert abs(f - 0.70711) < 1e-5


def test_state_fidelity_symmetry():
    rng = RngStream(9)
    for k in range(10):
        rho = random_density(3, rng.derive(2 * k))
        sig = random_density(3, rng.derive(2 * k + 1))
        assert abs(state_fidelity(rho, sig) - state_fidelity(sig, rho)) < 1e-10


def test_purify():
    out = purify(np.eye(2) / 2)
    target = np.zeros(4, dtype=complex)
    target[0] = target[3] = 1 / np.sqrt(2)
    phase = np.vdot(target, out.vec)
    assert abs(abs(phase) - 1.0) < 1e-10
    assert np.abs(out.vec - phase / abs(phase) * target).max() < 1e-10

    out = purify(np.diag([1.0, 0.0]))
    assert np.abs(out.vec - np.array([1, 0, 0, 0])).max() < 1e-10

    rho = np.diag([0.9, 0.1])
    out = purify(rho)
    rec = partial_trace(out.projector(), (2, 2), keep=1)
    assert np.abs(rec - rho).max() < 1e-12

    rng = RngStream(10)
    for k in range(5):
        rho = random_density(4, rng.derive(k))
        out = purify(rho)
        rec = partial_trace(out.projector(), (4, 4), keep=1)
        assert np.abs(rec - rho).max() < 1e-10


def test_haar_unitary():
    u = haar_unitary(1, RngStream(11))
    assert abs(abs(u[0, 0]) - 1.0) < 1e-12

    U = haar_unitary(5, RngStream(12))
    assert np.abs(U.conj().T @ U - np.eye(5)).max() < 1e-12

    again = haar_unitary(5, RngStream(12))
    assert np.array_equal(U, again)


def test_eig_hermitian():
    rng = RngStream(13)
    for k in range(5):
        M = random_herm(6, rng.derive(k))
        w, U = eig_hermitian(M)
        rec = U @ np.diag(w) @ U.conj().T
        assert np.abs(rec - M).max() <= 1e-10 * max(np.abs(w).max(), 1.0)
        assert np.all(np.diff(w) >= -1e-12)
    with pytest.raises(NotHermitian):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_density_matrix_validation():
    with pytest.raises(Exception):
        DensityMatrix(np.array([[1.2, 0.0], [0.0, -0.2]]))
    rho = DensityMatrix(np.eye(3) / 3)
    assert rho.dim == 3
    psi = PureState(np.array([1.0, 1.0]) / np.sqrt(2))
    assert psi.dim == 2
    assert np.abs(psi.projector() - 0.5 * np.ones((2, 2))).max() < 1e-12


def test_fuchs_van_de_graaf():
    # 1 - f <= (1/2)||rho - sigma||_1 <= sqrt(1 - f^2) on random pairs
    rng = RngStream(14)
    for k in range(200):
        d = 2 if k % 2 == 0 else 3
        rho = random_density(d, rng.derive(2 * k))
        sig = random_density(d, rng.derive(2 * k + 1))
        f = state_fidelity(rho, sig)
        half = 0.5 * trace_norm(rho - sig)
        assert half >= 1.0 - f - 1e-9
        assert half <= np.sqrt(max(1.0 - f * f, 0.0)) + 1e-9


def test_uhlmann_via_purifications():
    # max over W of |<psi_rho|(1 x W)|psi_sigma>| equals the fidelity; the
    # maximum over W of |tr(W G)| is the trace norm of the overlap matrix G.
    rng = RngStream(15)
    for k in range(20):
        d = 2 + (k % 3)
        rho = random_density(d, rng.derive(2 * k))
        sig = random_density(d, rng.derive(2 * k + 1))
        Mr = purify(rho).vec.reshape(d, d)
        Ms = purify(sig).vec.reshape(d, d)
        G = Ms.T @ Mr.conj()
        assert abs(trace_norm(G) - state_fidelity(rho, sig)) < 1e-8
