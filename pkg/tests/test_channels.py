"""Channel representations, conversions, dilations, named families."""
import numpy as np
import pytest

from chancalc.channels import (
    Channel,
    Ensemble,
    LinearMap,
    antisym_projector,
    apply,
    as_channel,
    choi_to_kraus,
    complementary,
    connecting_isometry,
    depolarizing,
    flip,
    from_kraus,
    identity_channel,
    identity_map,
    jamiolkowski_state,
    make_named,
    pad_dilation,
    random_channel,
    random_unitary_mix,
    swap_output_env,
    sym_projector,
    t_family,
    to_stinespring,
    transpose_map,
    unitary_channel,
    werner_eigenvalues,
)
from chancalc.errors import (
    BadParameters,
    DimensionMismatch,
    NotCP,
    NotCPTP,
    NotSameChannel,
    ShrinkNotAllowed,
)
from chancalc.linalg import DensityMatrix, haar_state, haar_unitary, trace_norm
from chancalc.rng import RngStream

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def amplitude_damping(gamma):
    k0 = np.diag([1.0, np.sqrt(1.0 - gamma)]).astype(complex)
    k1 = np.zeros((2, 2), dtype=complex)
    k1[0, 1] = np.sqrt(gamma)
    return from_kraus([k0, k1])


def test_from_kraus_identity():
    T = from_kraus([I2])
    assert T.d_in == 2 and T.d_out == 2
    rho = np.array([[0.7, 0.2j], [-0.2j, 0.3]])
    assert np.abs(T.schrodinger(rho) - rho).max() < 1e-14


def test_from_kraus_pauli_mix_is_depolarizing():
    # oracle: every basis (and superposition) state must land on I/2
    T = from_kraus([I2 / 2, X / 2, Y / 2, Z / 2])
    probes = [
        np.diag([1.0, 0.0]),
        np.diag([0.0, 1.0]),
        np.ones((2, 2)) / 2,
        np.array([[0.5, -0.5j], [0.5j, 0.5]]),
    ]
    for rho in probes:
        assert np.abs(T.schrodinger(rho) - I2 / 2).max() < 1e-12
    S = depolarizing(2)
    assert np.abs(T.base.choi - S.base.choi).max() < 1e-12


def test_from_kraus_amplitude_damping():
    T = amplitude_damping(0.3)
    assert T.d_out == 2
    w = np.linalg.eigvalsh(T.base.choi)
    assert w.min() > -1e-12


def test_from_kraus_rejects_nonchannel():
    with pytest.raises(NotCPTP):
        from_kraus([np.sqrt(0.5) * I2])  # sum K*K = I/2
    with pytest.raises(NotCPTP) as err:
        from_kraus([I2, X])  # sum = 2I
    assert "trace" in str(err.value).lower() or "1" in str(err.value)


def test_choi_to_kraus_counts():
    ops = choi_to_kraus(identity_channel(2).base)
    assert len(ops) == 1
    phase = ops[0][0, 0]
    assert np.abs(ops[0] - phase * I2).max() < 1e-10

    ops = choi_to_kraus(depolarizing(2).base)
    assert len(ops) == 4

    with pytest.raises(NotCP):
        choi_to_kraus(transpose_map(2))


def test_choi_to_kraus_round_trip():
    rng = RngStream(20)
    for k in range(100):
        r = rng.derive(k)
        d_in = 2 + int(r.integers(0, 3))
        d_out = 2 + int(r.integers(0, 3))
        rank = 1 + int(r.integers(0, 4))
        while d_out * rank < d_in:
            rank += 1
        T = random_channel(d_in, d_out, rank, r.derive(99))
        ops = choi_to_kraus(T.base)
        back = from_kraus(ops)
        assert np.abs(back.base.choi - T.base.choi).max() < 1e-9


def test_to_stinespring_examples():
    d = to_stinespring(identity_channel(2))
    assert d.d_E == 1
    assert np.abs(np.abs(d.v[::, :]) - np.abs(I2)).max() < 1e-12

    dd = to_stinespring(depolarizing(2))
    assert dd.d_E == 4

    U = haar_unitary(3, RngStream(21))
    du = to_stinespring(unitary_channel(U))
    assert du.d_E == 1
    phase = du.v[0, 0] / U[0, 0]
    assert np.abs(du.v - phase * U).max() < 1e-10


def test_stinespring_reproduces_choi():
    rng = RngStream(22)
    for k in range(20):
        r = rng.derive(k)
        d_in = 2 + int(r.integers(0, 3))
        d_out = 2 + int(r.integers(0, 3))
        rank = 1 + int(r.integers(0, 4))
        while d_out * rank < d_in:
            rank += 1
        T = random_channel(d_in, d_out, rank, r.derive(5))
        d = to_stinespring(T)
        assert d.d_E <= d_in * d_out
        assert np.abs(d.induced_choi() - T.base.choi).max() < 1e-9
        # isometry
        assert np.abs(d.v.conj().T @ d.v - np.eye(d_in)).max() < 1e-10


def test_pad_dilation():
    d = to_stinespring(identity_channel(2))
    p = pad_dilation(d, 4)
    assert p.d_E == 4
    assert np.abs(p.induced_choi() - d.induced_choi()).max() < 1e-12
    assert np.abs(p.v.conj().T @ p.v - np.eye(2)).max() < 1e-12
    # pad then re-minimalize via the induced channel
    again = to_stinespring(p.induced_channel())
    assert again.d_E == d.d_E
    with pytest.raises(ShrinkNotAllowed):
        pad_dilation(p, 2)


def test_complementary_identity_is_constant():
    d = to_stinespring(identity_channel(3))
    C = complementary(d)
    assert C.d_in == 3 and C.d_out == 1
    rho = np.diag([0.5, 0.3, 0.2])
    out = C.schrodinger(rho)
    assert out.shape == (1, 1)
    assert abs(out[0, 0] - 1.0) < 1e-12


def test_complementary_depolarizing_retains_input():
    # The environment of a completely depolarizing channel receives all the
    # information the output loses: every pure input lands on spectrum
    # (1/2, 1/2, 0, 0) and orthogonal inputs give orthogonal outputs.
    d = to_stinespring(depolarizing(2))
    C = complementary(d)
    rng = RngStream(23)
    probes = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    probes += [haar_state(2, rng.derive(k)) for k in range(4)]
    outs = [C.schrodinger(np.outer(v, v.conj())) for v in probes]
    for out in outs:
        w = np.sort(np.linalg.eigvalsh(out))[::-1]
        assert np.abs(w - np.array([0.5, 0.5, 0.0, 0.0])).max() < 1e-10
    overlap = np.trace(outs[0] @ outs[1]).real
    assert abs(overlap) < 1e-10


def test_complementary_twice_unitary():
    U = haar_unitary(2, RngStream(24))
    T = unitary_channel(U)
    d = to_stinespring(T)
    back = complementary(to_stinespring(complementary(d)))
    assert np.abs(back.base.choi - T.base.choi).max() < 1e-10


def test_complementary_twice_random():
    # environment-basis freedom: compare through the connecting isometry
    rng = RngStream(25)
    for k in range(5):
        T = random_channel(2, 2, 2, rng.derive(k))
        d = to_stinespring(T)
        back = complementary(to_stinespring(complementary(d)))
        assert np.abs(back.base.choi - T.base.choi).max() < 1e-8
        d2 = to_stinespring(back)
        dl, dr = (d, d2) if d.d_E <= d2.d_E else (d2, d)
        U = connecting_isometry(dl, pad_dilation(dr, max(d.d_E, d2.d_E)))
        assert np.abs(U.conj().T @ U - np.eye(U.shape[1])).max() < 1e-8


def test_apply_duality():
    rng = RngStream(26)
    T = random_channel(2, 3, 2, rng)
    for k in range(5):
        r = rng.derive(k)
        rho = r.complex_normal((2, 2))
        rho = rho + rho.conj().T
        b = r.complex_normal((3, 3))
        b = b + b.conj().T
        lhs = np.trace(apply(T, rho, "schrodinger") @ b)
        rhs = np.trace(rho @ apply(T, b, "heisenberg"))
        assert abs(lhs - rhs) < 1e-10

    # unitality in the Heisenberg picture
    assert np.abs(apply(T, np.eye(3), "heisenberg") - np.eye(2)).max() < 1e-10
    # depolarizing sends everything to I/2
    S = depolarizing(2)
    assert np.abs(apply(S, np.diag([0.9, 0.1]), "schrodinger") - I2 / 2).max() < 1e-12

    with pytest.raises(DimensionMismatch):
        apply(T, np.eye(3), "schrodinger")


def test_connecting_isometry_trivial():
    d = to_stinespring(amplitude_damping(0.4))
    U = connecting_isometry(d, d)
    kron = np.kron(np.eye(2), U)
    # postcondition, not U == I: any gauge works as long as it connects
    lhs = kron @ d.v_tensor().transpose(1, 0, 2).reshape(-1, 2)
    rhs = d.v_tensor().transpose(1, 0, 2).reshape(-1, 2)
    assert np.abs(lhs - rhs).max() < 1e-8


def test_connecting_isometry_planted_rotation():
    rng = RngStream(27)
    T = random_channel(2, 2, 2, rng)
    d1 = to_stinespring(T)
    W = haar_unitary(3, rng.derive(1))
    padded = pad_dilation(d1, 3)
    V3 = np.einsum("fe,bea->bfa", W, padded.v_tensor())
    d2 = type(padded)(V3.reshape(6, 2), 2, 2, 3)
    U = connecting_isometry(d1, d2)
    assert U.shape == (3, 2)
    assert np.abs(U.conj().T @ U - np.eye(2)).max() < 1e-10
    # recover the planted rotation on the minimal environment
    target = W @ np.eye(3, 2)
    assert np.abs(U - target).max() < 1e-8


def test_connecting_isometry_different_channels():
    d1 = to_stinespring(identity_channel(2))
    d2 = to_stinespring(amplitude_damping(0.4))
    with pytest.raises(NotSameChannel):
        connecting_isometry(pad_dilation(d1, 2), d2)


def test_swap_output_env():
    T = amplitude_damping(0.25)
    d = to_stinespring(T)
    s = swap_output_env(d)
    assert (s.d_B, s.d_E) == (d.d_E, d.d_B)
    assert np.abs(s.induced_choi() - complementary(d).base.choi).max() < 1e-10


def test_t_family_boundary():
    T = t_family(2, 1.0 / 3.0)
    w = np.linalg.eigvalsh(T.base.choi)
    assert abs(w.min()) < 1e-10
    with pytest.raises(NotCPTP):
        t_family(2, 0.35)
    for nu in range(2, 7):
        p = 1.0 / (nu + 1)
        lin = t_family(nu, p, as_channel_obj=False)
        w = np.linalg.eigvalsh(lin.choi)
        assert abs(w.min()) <= 1e-10
        with pytest.raises(NotCPTP):
            t_family(nu, p + 1e-6)


def test_flip_and_projectors():
    for nu in (2, 3):
        F = flip(nu)
        assert np.abs(F @ F - np.eye(nu * nu)).max() < 1e-12
        assert np.abs(F - F.conj().T).max() < 1e-12
        Ps, Pa = sym_projector(nu), antisym_projector(nu)
        assert np.abs(Ps + Pa - np.eye(nu * nu)).max() < 1e-12
        assert np.abs(Ps - Pa - F).max() < 1e-12
        assert np.abs(Ps @ Ps - Ps).max() < 1e-12
        assert np.abs(Pa @ Pa - Pa).max() < 1e-12


def test_werner_eigenvalues():
    (lam1, m1), (lam2, m2) = werner_eigenvalues(1 / 6, 1 / 6, 2)
    assert abs(lam1 - 1 / 3) < 1e-12 and m1 == 3
    assert abs(lam2) < 1e-12 and m2 == 1

    (lam1, m1), (lam2, m2) = werner_eigenvalues(1.0, 0.0, 3)
    assert lam1 == lam2 == 1.0
    assert m1 == 6 and m2 == 3

    (lam1, _), (lam2, _) = werner_eigenvalues(0.0, 1.0, 2)
    assert lam1 == 1.0 and lam2 == -1.0

    # matches the spectrum of alpha*I + beta*F
    for (a, b, nu) in [(0.4, 0.1, 2), (0.2, -0.3, 3)]:
        M = a * np.eye(nu * nu) + b * flip(nu)
        w = np.sort(np.linalg.eigvalsh(M))
        (l1, c1), (l2, c2) = werner_eigenvalues(a, b, nu)
        expect = np.sort(np.array([l1] * c1 + [l2] * c2))
        assert np.abs(w - expect).max() < 1e-12


def test_jamiolkowski_state():
    om = np.zeros(4, dtype=complex)
    om[0] = om[3] = 1 / np.sqrt(2)
    J = jamiolkowski_state(identity_channel(2).base)
    assert np.abs(J - np.outer(om, om.conj())).max() < 1e-12

    J = jamiolkowski_state(depolarizing(2).base)
    assert np.abs(J - np.eye(4) / 4).max() < 1e-12

    for p in (0.0, 0.2, 1.0 / 3.0):
        lin = t_family(2, p, as_channel_obj=False)
        J = jamiolkowski_state(lin)
        target = (1 - p) / 4 * np.eye(4) + (p / 2) * flip(2)
        assert np.abs(J - target).max() < 1e-12

    with pytest.raises(DimensionMismatch):
        jamiolkowski_state(LinearMap(2, 3, np.eye(6)))


def test_random_unitary_mix_rank():
    rng = RngStream(28)
    for (nu, mu) in [(2, 2), (3, 4), (4, 3)]:
        R = random_unitary_mix(nu, mu, rng.derive(10 * nu + mu))
        w = np.linalg.eigvalsh(R.base.choi)
        rank = int(np.sum(w > 1e-10 * w.max()))
        assert rank <= mu
        assert len(R.kraus) == mu


def test_make_named_dispatch():
    T = make_named("t_family", nu=2, p=1 / 3)
    assert isinstance(T, Channel)
    F = make_named("flip", nu=2)
    assert np.abs(F - flip(2)).max() == 0
    with pytest.raises(BadParameters):
        make_named("bogus")


def test_transpose_map_choi_is_flip():
    lin = transpose_map(2)
    assert np.abs(lin.choi - flip(2)).max() < 1e-12
    assert lin.is_hermiticity_preserving()
    rho = np.array([[0.6, 0.1 + 0.2j], [0.1 - 0.2j, 0.4]])
    assert np.abs(lin.schrodinger(rho) - rho.T).max() < 1e-12


def test_linear_map_arithmetic():
    d = identity_map(2)
    s = depolarizing(2).base
    delta = d - s
    assert np.abs(delta.choi - (d.choi - s.choi)).max() == 0
    tw = delta * 2.0
    assert np.abs(tw.choi - 2.0 * delta.choi).max() == 0
    comp = s.compose(d)
    assert np.abs(comp.choi - s.choi).max() < 1e-12
    adj = s.adjoint()
    rho = np.array([[0.7, 0.0], [0.0, 0.3]])
    b = np.array([[1.0, 0.5], [0.5, -1.0]])
    lhs = np.trace(s.schrodinger(rho) @ b)
    rhs = np.trace(rho @ adj.schrodinger(b))
    assert abs(lhs - rhs) < 1e-12


def test_ensemble():
    e = Ensemble([(0.5, DensityMatrix(np.diag([1.0, 0.0]))),
                  (0.5, DensityMatrix(np.diag([0.0, 1.0])))])
    assert np.abs(e.average_state() - I2 / 2).max() < 1e-12
    with pytest.raises(Exception):
        Ensemble([(0.7, DensityMatrix(I2 / 2))])


def test_depolarizing_with_target_state():
    sigma = np.diag([0.8, 0.2])
    S = depolarizing(3, sigma=sigma)
    assert S.d_in == 3 and S.d_out == 2
    rho = np.eye(3) / 3
    assert np.abs(S.schrodinger(rho) - sigma).max() < 1e-12
    # Heisenberg form: S(e) = tr(sigma e) * identity
    b = np.array([[2.0, 1.0], [1.0, 0.0]])
    assert np.abs(S.heisenberg(b) - np.trace(sigma @ b) * np.eye(3)).max() < 1e-12
