"""Channel representations and conversions.

A linear map T between matrix algebras is stored through its unnormalized
Choi matrix J(T) = sum_ij |i><j|_A (x) T_*(|i><j|) with factor order A (x) B,
where T_* is the Schrodinger-picture action on states. Channel certifies the
CPTP invariants on top of LinearMap; StinespringDilation holds an isometry
V: H_A -> H_B (x) H_E with output factor first.

Named families used throughout: completely depolarizing channels
S(e) = tr(sigma e) 1, the matrix transpose (a positive but not completely
positive map), their convex family T_p = (1-p) S + p Theta, unitary
conjugations, and mixtures of random unitaries.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadParameters,
    DimensionMismatch,
    NotCP,
    NotCPTP,
    NotSameChannel,
    ShrinkNotAllowed,
)
from .linalg import (
    DensityMatrix,
    PREDICATE_TOL,
    VALIDATION_TOL,
    _as_matrix,
    haar_unitary,
    hermitian_part,
    is_hermitian,
    partial_trace,
    sorted_eig_descending,
)
from .rng import RngStream

RANK_TOL = 1e-10  # relative eigenvalue cutoff for Choi rank / minimal d_E


@dataclass(frozen=True)
class LinearMap:
    """Linear map between matrix algebras, held as an unnormalized Choi matrix.

    d_in is the dimension of the input system A (Schrodinger picture), d_out
    the output system B. The Choi factor order is A (x) B.
    """

    d_in: int
    d_out: int
    choi: np.ndarray

    def __post_init__(self):
        J = _as_matrix(self.choi)
        m = self.d_in * self.d_out
        if J.shape != (m, m):
            raise DimensionMismatch(
                f"choi shape {J.shape} does not match d_in*d_out = {m}"
            )
        J = J.copy()
        J.flags.writeable = False
        object.__setattr__(self, "choi", J)

    # -- structure ---------------------------------------------------------
    def choi_tensor(self) -> np.ndarray:
        """Choi reshaped to J[a, b, a', b']."""
        return np.asarray(self.choi).reshape(
            self.d_in, self.d_out, self.d_in, self.d_out
        )

    def is_hermiticity_preserving(self, tol: float = PREDICATE_TOL) -> bool:
        return is_hermitian(self.choi, tol)

    # -- algebra -----------------------------------------------------------
    def _like(self, choi) -> "LinearMap":
        return LinearMap(self.d_in, self.d_out, choi)

    def __add__(self, other: "LinearMap") -> "LinearMap":
        self._check_same_shape(other)
        return self._like(np.asarray(self.choi) + np.asarray(other.choi))

    def __sub__(self, other: "LinearMap") -> "LinearMap":
        self._check_same_shape(other)
        return self._like(np.asarray(self.choi) - np.asarray(other.choi))

    def __mul__(self, c) -> "LinearMap":
        return self._like(c * np.asarray(self.choi))

    __rmul__ = __mul__

    def _check_same_shape(self, other: "LinearMap"):
        if (self.d_in, self.d_out) != (other.d_in, other.d_out):
            raise DimensionMismatch("maps act between different spaces")

    # -- action ------------------------------------------------------------
    def schrodinger(self, rho) -> np.ndarray:
        R = _as_matrix(rho)
        if R.shape != (self.d_in, self.d_in):
            raise DimensionMismatch(
                f"state shape {R.shape} does not match d_in={self.d_in}"
            )
        return np.einsum("aA,abAB->bB", R, self.choi_tensor())

    def heisenberg(self, obs) -> np.ndarray:
        E = _as_matrix(obs)
        if E.shape != (self.d_out, self.d_out):
            raise DimensionMismatch(
                f"observable shape {E.shape} does not match d_out={self.d_out}"
            )
        return np.einsum("jbic,cb->ij", self.choi_tensor(), E)

    def adjoint(self) -> "LinearMap":
        """Adjoint map w.r.t. the Hilbert-Schmidt pairing (d_out -> d_in)."""
        J4 = self.choi_tensor()
        Jadj = np.conj(J4).transpose(1, 0, 3, 2)
        m = self.d_in * self.d_out
        return LinearMap(self.d_out, self.d_in, Jadj.reshape(m, m))

    def compose(self, first: "LinearMap") -> "LinearMap":
        """Schrodinger composition: (self . first)_* = self_* of first_*."""
        if first.d_out != self.d_in:
            raise DimensionMismatch("composition dimensions do not match")
        # J[(a,c)] of the composite from contracting first's output leg.
        J1 = first.choi_tensor()  # [a, b, a', b']
        J2 = self.choi_tensor()  # [b, c, b', c']
        J = np.einsum("abAB,bcBC->acAC", J1, J2)
        m = first.d_in * self.d_out
        return LinearMap(first.d_in, self.d_out, J.reshape(m, m))


def identity_map(d: int) -> LinearMap:
    phi = np.eye(d).reshape(-1)  # |phi+> = sum_a |aa>, components delta_ab
    return LinearMap(d, d, np.outer(phi, phi))


@dataclass(frozen=True)
class Channel:
    """CPTP-certified map: psd Choi, tr_B(choi) = identity on A."""

    base: LinearMap
    kraus: tuple

    @property
    def d_in(self) -> int:
        return self.base.d_in

    @property
    def d_out(self) -> int:
        return self.base.d_out

    @property
    def choi(self) -> np.ndarray:
        return self.base.choi

    def schrodinger(self, rho) -> np.ndarray:
        return self.base.schrodinger(rho)

    def heisenberg(self, obs) -> np.ndarray:
        return self.base.heisenberg(obs)


def _validate_cptp(lin: LinearMap, tol: float) -> None:
    J = hermitian_part(lin.choi)
    if not is_hermitian(lin.choi, tol):
        gap = float(np.abs(np.asarray(lin.choi) - J).max())
        raise NotCPTP(f"Choi is not Hermitian: asymmetry {gap:.3e}")
    w = np.linalg.eigvalsh(J)
    scale = max(1.0, float(w[-1]) if w.size else 1.0)
    if w.min(initial=0.0) < -tol * scale:
        raise NotCPTP(
            f"complete positivity fails: min Choi eigenvalue {w.min():.6e}"
        )
    red = partial_trace(J, (lin.d_in, lin.d_out), keep=1)
    dev = float(np.abs(red - np.eye(lin.d_in)).max())
    if dev > max(tol, 10 * VALIDATION_TOL):
        raise NotCPTP(f"trace preservation fails: |tr_B J - 1| = {dev:.6e}")


def as_channel(lin: LinearMap, kraus=None, tol: float = VALIDATION_TOL) -> Channel:
    """Certify a LinearMap as a Channel; NotCPTP explains any failure."""
    _validate_cptp(lin, tol)
    if kraus is None:
        kraus = choi_to_kraus(lin)
    else:
        kraus = [_as_matrix(K) for K in kraus]
        acc = sum(K.conj().T @ K for K in kraus)
        dev = float(np.abs(acc - np.eye(lin.d_in)).max())
        if dev > max(tol, 10 * VALIDATION_TOL):
            raise NotCPTP(f"Kraus completeness fails: |sum K*K - 1| = {dev:.6e}")
    return Channel(lin, tuple(np.asarray(K) for K in kraus))


def from_kraus(kraus, tol: float = VALIDATION_TOL) -> Channel:
    """Channel from Kraus operators K_i (each d_out x d_in)."""
    ops = [_as_matrix(K) for K in kraus]
    if not ops:
        raise BadParameters("need at least one Kraus operator")
    d_out, d_in = ops[0].shape
    for K in ops:
        if K.shape != (d_out, d_in):
            raise DimensionMismatch("Kraus operators must share one shape")
    m = d_in * d_out
    J = np.zeros((m, m), dtype=complex)
    for K in ops:
        w = K.T.reshape(-1)  # w[(a,b)] = K[b,a]
        J += np.outer(w, w.conj())
    lin = LinearMap(d_in, d_out, J)
    return as_channel(lin, kraus=ops, tol=tol)


def choi_to_kraus(lin: LinearMap, tol: float = VALIDATION_TOL):
    """Kraus operators from the Choi eigendecomposition.

    Deterministic: eigenvalues descending, degenerate blocks ordered by the
    phase-normalized eigenvectors, rank cut at RANK_TOL * max eigenvalue.
    Raises NotCP when the Choi has a negative eigenvalue beyond tolerance.
    """
    if not lin.is_hermiticity_preserving(tol):
        raise NotCP("Choi is not Hermitian")
    w, U = sorted_eig_descending(lin.choi, tol)
    wmax = max(float(w[0]), 0.0) if w.size else 0.0
    scale = max(1.0, wmax)
    if w.size and float(w[-1]) < -tol * scale:
        raise NotCP(f"Choi has negative eigenvalue {float(w[-1]):.6e}")
    ops = []
    for k in range(w.size):
        lam = float(w[k])
        if lam <= RANK_TOL * max(wmax, 1e-300):
            continue
        K = np.sqrt(lam) * U[:, k].reshape(lin.d_in, lin.d_out).T
        ops.append(K)
    return ops


@dataclass(frozen=True)
class StinespringDilation:
    """Isometry V: H_A -> H_B (x) H_E with T_*(rho) = tr_E(V rho V*)."""

    v: np.ndarray
    d_A: int
    d_B: int
    d_E: int

    def __post_init__(self):
        V = _as_matrix(self.v)
        if V.shape != (self.d_B * self.d_E, self.d_A):
            raise DimensionMismatch(
                f"dilation shape {V.shape} != ({self.d_B * self.d_E}, {self.d_A})"
            )
        G = V.conj().T @ V
        dev = float(np.abs(G - np.eye(self.d_A)).max())
        if dev > 1e-8:
            raise NotCPTP(f"dilation is not an isometry: |V*V - 1| = {dev:.3e}")
        V = V.copy()
        V.flags.writeable = False
        object.__setattr__(self, "v", V)

    def v_tensor(self) -> np.ndarray:
        """V reshaped to V[b, e, a]."""
        return np.asarray(self.v).reshape(self.d_B, self.d_E, self.d_A)

    def induced_choi(self) -> np.ndarray:
        V3 = self.v_tensor()
        J = np.einsum("bea,BeA->abAB", V3, V3.conj())
        m = self.d_A * self.d_B
        return J.reshape(m, m)

    def induced_channel(self) -> Channel:
        V3 = self.v_tensor()
        kraus = [V3[:, e, :] for e in range(self.d_E)]
        lin = LinearMap(self.d_A, self.d_B, self.induced_choi())
        return as_channel(lin, kraus=kraus)


def _kraus_independent(ops) -> bool:
    """True when the Kraus set is linearly independent (Stinespring minimality)."""
    G = np.array([[np.trace(Ki.conj().T @ Kj) for Kj in ops] for Ki in ops])
    w = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
    return bool(w.min() > RANK_TOL * max(float(w.max()), 1e-300))


def to_stinespring(T: Channel) -> StinespringDilation:
    """Minimal dilation.

    A stored Kraus set is reused verbatim when linearly independent (that is
    the minimality criterion), which keeps dilations stable on channels with
    degenerate Choi spectra; otherwise the environment basis comes from the
    Choi eigenvectors in descending order.
    """
    stored = [np.asarray(K) for K in T.kraus] if T.kraus else []
    if stored and _kraus_independent(stored):
        ops = stored
    else:
        ops = choi_to_kraus(T.base)
    d_E = max(len(ops), 1)
    d_in, d_out = T.d_in, T.d_out
    V3 = np.zeros((d_out, d_E, d_in), dtype=complex)
    for e, K in enumerate(ops):
        V3[:, e, :] = K
    return StinespringDilation(V3.reshape(d_out * d_E, d_in), d_in, d_out, d_E)


def pad_dilation(d: StinespringDilation, new_d_E: int) -> StinespringDilation:
    """Embed the environment into the first d_E coordinates of C^new_d_E."""
    if new_d_E < d.d_E:
        raise ShrinkNotAllowed(f"cannot shrink d_E from {d.d_E} to {new_d_E}")
    if new_d_E == d.d_E:
        return d
    V3 = np.zeros((d.d_B, new_d_E, d.d_A), dtype=complex)
    V3[:, : d.d_E, :] = d.v_tensor()
    return StinespringDilation(
        V3.reshape(d.d_B * new_d_E, d.d_A), d.d_A, d.d_B, new_d_E
    )


def complementary(d: StinespringDilation) -> Channel:
    """Channel to the environment: rho -> tr_B(V rho V*)."""
    V3 = d.v_tensor()
    kraus = [V3[b, :, :] for b in range(d.d_B)]
    J = np.einsum("bea,bEA->aeAE", V3, V3.conj())
    m = d.d_A * d.d_E
    lin = LinearMap(d.d_A, d.d_E, J.reshape(m, m))
    return as_channel(lin, kraus=kraus)


def swap_output_env(d: StinespringDilation) -> StinespringDilation:
    """Reread V with the roles of output and environment exchanged.

    The result is a dilation of the complementary channel: output factor E,
    environment B.
    """
    V3 = d.v_tensor().transpose(1, 0, 2)  # [e, b, a]
    return StinespringDilation(
        V3.reshape(d.d_E * d.d_B, d.d_A), d.d_A, d.d_E, d.d_B
    )


def apply(T, rho, picture: str = "schrodinger") -> np.ndarray:
    """Apply a Channel or LinearMap in the requested picture."""
    lin = T.base if isinstance(T, Channel) else T
    if picture == "schrodinger":
        return lin.schrodinger(rho)
    if picture == "heisenberg":
        return lin.heisenberg(rho)
    raise BadParameters(f"unknown picture {picture!r}")


def _orthonormal_extension(cols: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal columns to a full basis, Gram-Schmidt over the
    standard basis in index order (deterministic)."""
    basis = [cols[:, k] for k in range(cols.shape[1])]
    k = 0
    while len(basis) < dim:
        if k >= dim:
            raise NotSameChannel("orthonormal extension failed")
        r = np.zeros(dim, dtype=complex)
        r[k] = 1.0
        for bvec in basis:
            r = r - bvec * (bvec.conj() @ r)
        n = np.linalg.norm(r)
        if n > 1e-7:
            basis.append(r / n)
        k += 1
    return np.column_stack(basis)


def connecting_isometry(
    d1: StinespringDilation, d2: StinespringDilation, tol: float = 1e-8
) -> np.ndarray:
    """Isometry U: E1 -> E2 with (1_B (x) U) V1 = V2 for two dilations of one
    channel.

    Solved in least squares on the span of the environment vectors of V1 and
    completed to an isometry on the orthogonal complement in index order.
    Raises NotSameChannel when the induced Chois differ.
    """
    if (d1.d_A, d1.d_B) != (d2.d_A, d2.d_B):
        raise DimensionMismatch("dilations act between different spaces")
    if d1.d_E > d2.d_E:
        raise DimensionMismatch("d_E1 > d_E2: pad the second dilation first")
    J1, J2 = d1.induced_choi(), d2.induced_choi()
    scale = max(1.0, float(np.abs(J1).max()))
    if float(np.abs(J1 - J2).max()) > tol * scale:
        raise NotSameChannel("dilations induce different channels")
    # Environment vectors, one per (b, a) pair: U v1_(b,a) = v2_(b,a).
    A = d1.v_tensor().transpose(1, 0, 2).reshape(d1.d_E, -1)
    B = d2.v_tensor().transpose(1, 0, 2).reshape(d2.d_E, -1)
    Ua, s, Vah = np.linalg.svd(A, full_matrices=True)
    smax = s[0] if s.size else 0.0
    r = int(np.sum(s > 1e-10 * max(smax, 1e-300)))
    # Partial isometry on the span; isometric by equality of the Gram matrices.
    Wr = B @ Vah[:r, :].conj().T @ np.diag(1.0 / s[:r])
    if r:
        # Orthonormalize defensively against fp drift.
        Q, R = np.linalg.qr(Wr)
        ph = np.diagonal(R) / np.abs(np.diagonal(R))
        Wr = Q * ph
        full_left = _orthonormal_extension(Wr, d2.d_E) if r < d2.d_E else Wr
    else:
        full_left = np.eye(d2.d_E, dtype=complex)
    # Map the E1 basis (span directions, then null directions, in the order
    # the SVD returns them) onto the constructed E2 basis.
    U = full_left[:, : d1.d_E] @ Ua.conj().T
    # _reorder_be rows carry index order (e, b), so the E rotation sits on
    # the left kron factor.
    V1r = np.kron(U, np.eye(d1.d_B)) @ _reorder_be(d1)
    dev = float(np.abs(V1r - _reorder_be(d2)).max())
    if dev > 1e-6:
        raise NotSameChannel(f"connecting isometry residual {dev:.3e}")
    return U


def _reorder_be(d: StinespringDilation) -> np.ndarray:
    """V with index order (e, b) on the output side, for E-side rotations."""
    return d.v_tensor().transpose(1, 0, 2).reshape(d.d_E * d.d_B, d.d_A)


# ---------------------------------------------------------------------------
# Named families
# ---------------------------------------------------------------------------


def omega(d: int) -> np.ndarray:
    """Maximally entangled unit vector on C^d (x) C^d."""
    return np.eye(d).reshape(-1) / np.sqrt(d)


def flip(nu: int) -> np.ndarray:
    """Flip (swap) operator F |i,j> = |j,i> on C^nu (x) C^nu."""
    F = np.zeros((nu * nu, nu * nu))
    for i in range(nu):
        for j in range(nu):
            F[j * nu + i, i * nu + j] = 1.0
    return F.astype(complex)


def sym_projector(nu: int) -> np.ndarray:
    return 0.5 * (np.eye(nu * nu) + flip(nu))


def antisym_projector(nu: int) -> np.ndarray:
    return 0.5 * (np.eye(nu * nu) - flip(nu))


def identity_channel(d: int) -> Channel:
    return from_kraus([np.eye(d)])


def unitary_channel(U) -> Channel:
    U = _as_matrix(U)
    if U.shape[0] != U.shape[1]:
        raise DimensionMismatch("unitary channel needs a square matrix")
    dev = float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())
    if dev > 1e-9:
        raise BadParameters(f"matrix is not unitary: |U*U - 1| = {dev:.3e}")
    return from_kraus([U])


def depolarizing(d_in: int, sigma=None, d_out: int | None = None) -> Channel:
    """Completely depolarizing channel S(e) = tr(sigma e) 1, i.e. every input
    state is replaced by sigma. Default sigma is maximally mixed on d_out."""
    if sigma is None:
        d_out = d_in if d_out is None else d_out
        sig = np.eye(d_out) / d_out
    else:
        sig = np.asarray(sigma.mat if isinstance(sigma, DensityMatrix) else sigma)
        sig = DensityMatrix(sig).mat
        d_out = sig.shape[0]
    J = np.kron(np.eye(d_in), sig)
    lin = LinearMap(d_in, d_out, J)
    return as_channel(lin)


def transpose_map(nu: int) -> LinearMap:
    """Matrix transpose as a LinearMap; positive but not completely positive,
    so it never validates as a Channel. Its Choi matrix is the flip operator."""
    return LinearMap(nu, nu, flip(nu))


def t_family(nu: int, p: float, as_channel_obj: bool = True):
    """Convex family (1-p) S + p Theta of depolarizing and transpose.

    CPTP exactly for p <= 1/(nu+1); the boundary case has a vanishing minimal
    Choi eigenvalue. With as_channel_obj=False the raw LinearMap is returned
    regardless of p.
    """
    S = depolarizing(nu).base
    lin = (1.0 - p) * S + p * transpose_map(nu)
    if not as_channel_obj:
        return lin
    return as_channel(lin)


def random_unitary_mix(nu: int, mu: int, rng: RngStream) -> Channel:
    """Mixture of mu independent Haar unitaries, each with weight 1/mu."""
    if mu < 1:
        raise BadParameters("need at least one unitary")
    ops = [haar_unitary(nu, rng.derive(i)) / np.sqrt(mu) for i in range(mu)]
    return from_kraus(ops)


def random_channel(d_in: int, d_out: int, kraus_rank: int, rng: RngStream) -> Channel:
    """Haar-random channel: Gaussian (d_out*kraus_rank) x d_in matrix, QR."""
    if kraus_rank < 1 or kraus_rank > d_in * d_out:
        raise BadParameters("kraus_rank must be in [1, d_in*d_out]")
    if d_out * kraus_rank < d_in:
        raise BadParameters(
            "no isometry exists: need d_out*kraus_rank >= d_in "
            f"(got {d_out}*{kraus_rank} < {d_in})"
        )
    G = rng.complex_normal((d_out * kraus_rank, d_in))
    Q, R = np.linalg.qr(G)
    Q = Q * (np.diagonal(R) / np.abs(np.diagonal(R)))
    dil = StinespringDilation(Q, d_in, d_out, kraus_rank)
    return dil.induced_channel()


def make_named(name: str, **params):
    """Dispatcher for the named families (used by tests and experiments)."""
    table = {
        "identity": identity_channel,
        "depolarizing": depolarizing,
        "transpose": transpose_map,
        "t_family": t_family,
        "unitary": unitary_channel,
        "random_unitary_mix": random_unitary_mix,
        "flip": flip,
        "sym_projector": sym_projector,
        "antisym_projector": antisym_projector,
    }
    if name not in table:
        raise BadParameters(f"unknown named object {name!r}")
    return table[name](**params)


def werner_eigenvalues(alpha: float, beta: float, nu: int):
    """Spectrum of alpha 1 + beta F on C^nu (x) C^nu.

    Returns ((alpha+beta, nu(nu+1)/2), (alpha-beta, nu(nu-1)/2)): the operator
    is positive iff both values are nonnegative, i.e. alpha >= |beta|.
    """
    if nu < 2:
        raise BadParameters("need nu >= 2")
    return (
        (alpha + beta, nu * (nu + 1) // 2),
        (alpha - beta, nu * (nu - 1) // 2),
    )


def jamiolkowski_state(lin: LinearMap) -> np.ndarray:
    """(Phi_* (x) id)(|Omega><Omega|) with Omega maximally entangled.

    Equals the stored Choi divided by nu with the two factors swapped (the
    Choi keeps the input factor first; here the map acts on the first half).
    """
    if lin.d_in != lin.d_out:
        raise DimensionMismatch("Jamiolkowski state needs d_in = d_out")
    nu = lin.d_in
    J4 = lin.choi_tensor()
    return J4.transpose(1, 0, 3, 2).reshape(nu * nu, nu * nu) / nu


@dataclass(frozen=True)
class Ensemble:
    """Finite ensemble of states with probabilities that sum to one."""

    members: tuple

    def __post_init__(self):
        ms = []
        total = 0.0
        for p, rho in self.members:
            if p < -VALIDATION_TOL:
                raise BadParameters(f"negative probability {p}")
            total += p
            ms.append((float(p), rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)))
        if abs(total - 1.0) > 1e-9:
            raise BadParameters(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "members", tuple(ms))

    def average_state(self) -> np.ndarray:
        return sum(p * np.asarray(rho.mat) for p, rho in self.members)
