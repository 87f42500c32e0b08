"""Dense complex linear-algebra kernel.

Matrices are plain complex numpy arrays in row-major layout; this module adds
the predicates, decompositions, tensor calculus, Schatten norms, fidelity,
purification and seeded Haar sampling that the channel layers build on.
Dimensions stay small (well under 10^3), so everything is dense and exact
LAPACK-backed; there is no sparse path.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidState, NotHermitian
from .rng import RngStream

# Default tolerances: structural predicates are tight, state validation is
# slightly looser so that channel outputs that are only fp-close to normalized
# still validate.
PREDICATE_TOL = 1e-10
VALIDATION_TOL = 1e-9


def _as_matrix(M) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got ndim={A.ndim}")
    return A


def is_hermitian(M, tol: float = PREDICATE_TOL) -> bool:
    A = _as_matrix(M)
    if A.shape[0] != A.shape[1]:
        return False
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    return bool(np.abs(A - A.conj().T).max(initial=0.0) <= tol * scale)


def is_unitary(M, tol: float = PREDICATE_TOL) -> bool:
    A = _as_matrix(M)
    if A.shape[0] != A.shape[1]:
        return False
    return is_isometry(A, tol) and is_isometry(A.conj().T, tol)


def is_isometry(V, tol: float = PREDICATE_TOL) -> bool:
    A = _as_matrix(V)
    if A.shape[0] < A.shape[1]:
        return False
    G = A.conj().T @ A
    return bool(np.abs(G - np.eye(A.shape[1])).max(initial=0.0) <= tol)


def is_psd(M, tol: float = PREDICATE_TOL) -> bool:
    A = _as_matrix(M)
    if not is_hermitian(A, tol):
        return False
    w = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    scale = max(1.0, float(w[-1]) if w.size else 1.0)
    return bool(w.min(initial=0.0) >= -tol * scale)


def hermitian_part(M) -> np.ndarray:
    A = _as_matrix(M)
    return 0.5 * (A + A.conj().T)


def eig_hermitian(M, tol: float = PREDICATE_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, U with eigenvectors as columns) such that
    M = U diag(w) U*. Raises NotHermitian when the symmetry check fails.
    """
    A = _as_matrix(M)
    if not is_hermitian(A, tol):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    w, U = np.linalg.eigh(0.5 * (A + A.conj().T))
    return w, U


def svd(M):
    """Compact SVD: M = U diag(s) W* with s descending and U, W isometries."""
    A = _as_matrix(M)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    return U, s, Vh.conj().T


def polar(M):
    """Polar decomposition M = U P with U unitary and P psd.

    For singular M the unitary is completed deterministically: left and right
    singular bases are paired in the index order numpy returns them, null
    directions included, so polar(diag(1, 0)) yields U = identity.
    """
    A = _as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch("polar decomposition needs a square matrix")
    W, s, Vh = np.linalg.svd(A, full_matrices=True)
    U = W @ Vh
    P = Vh.conj().T @ np.diag(s.astype(complex)) @ Vh
    return U, 0.5 * (P + P.conj().T)


def tensor(A, B) -> np.ndarray:
    """Kronecker product, left-factor-major: composite index i_A*dim_B + i_B."""
    return np.kron(_as_matrix(A), _as_matrix(B))


def partial_trace(M, dims, keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator on C^d1 (x) C^d2.

    keep=1 returns the d1 x d1 reduction, keep=2 the d2 x d2 one.
    """
    A = _as_matrix(M)
    d1, d2 = int(dims[0]), int(dims[1])
    if A.shape != (d1 * d2, d1 * d2):
        raise DimensionMismatch(f"operator shape {A.shape} does not match dims {dims}")
    if keep not in (1, 2):
        raise DimensionMismatch("keep must be 1 or 2")
    T = A.reshape(d1, d2, d1, d2)
    if keep == 1:
        return np.einsum("ajbj->ab", T)
    return np.einsum("jajb->ab", T)


def schatten_norm(M, p: str) -> float:
    """Schatten norm: p='trace' sums singular values, p='operator' takes the max."""
    A = _as_matrix(M)
    if A.size == 0:
        return 0.0
    s = np.linalg.svd(A, compute_uv=False)
    if p == "trace":
        return float(s.sum())
    if p == "operator":
        return float(s[0])
    raise ValueError(f"unknown Schatten norm {p!r}")


def trace_norm(M) -> float:
    return schatten_norm(M, "trace")


def operator_norm(M) -> float:
    return schatten_norm(M, "operator")


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density operator: Hermitian, psd, unit trace (within tol)."""

    mat: np.ndarray

    def __post_init__(self):
        A = _as_matrix(self.mat)
        if A.shape[0] != A.shape[1]:
            raise InvalidState("density matrix must be square")
        if not is_hermitian(A, VALIDATION_TOL):
            raise InvalidState("density matrix must be Hermitian")
        w = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
        if w.min(initial=0.0) < -VALIDATION_TOL:
            raise InvalidState(f"density matrix has negative eigenvalue {w.min():.3e}")
        if abs(A.trace() - 1.0) > VALIDATION_TOL:
            raise InvalidState(f"density matrix trace {A.trace():.12f} != 1")
        A = A.copy()
        A.flags.writeable = False
        object.__setattr__(self, "mat", A)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True)
class PureState:
    """Unit vector on C^dim."""

    vec: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(v) - 1.0) > VALIDATION_TOL:
            raise InvalidState(f"pure state norm {np.linalg.norm(v):.12f} != 1")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "vec", v)

    @property
    def dim(self) -> int:
        return self.vec.shape[0]

    def projector(self) -> np.ndarray:
        return np.outer(self.vec, self.vec.conj())


def _coerce_density(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return np.asarray(rho.mat)
    return DensityMatrix(_as_matrix(rho)).mat


def psd_sqrt(M) -> np.ndarray:
    """Square root of a psd matrix via eigendecomposition (clips tiny negatives)."""
    w, U = np.linalg.eigh(hermitian_part(M))
    w = np.clip(w, 0.0, None)
    return (U * np.sqrt(w)) @ U.conj().T


def state_fidelity(rho, sigma) -> float:
    """Uhlmann fidelity f(rho, sigma) = tr sqrt(sqrt(rho) sigma sqrt(rho))."""
    R = _coerce_density(rho)
    S = _coerce_density(sigma)
    if R.shape != S.shape:
        raise DimensionMismatch("states must share a dimension")
    sr = psd_sqrt(R)
    w = np.linalg.eigvalsh(hermitian_part(sr @ S @ sr))
    f = float(np.sqrt(np.clip(w, 0.0, None)).sum())
    return min(f, 1.0) if f <= 1.0 + 1e-9 else f


def _phase_normalize(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate a vector's global phase so its first non-vanishing entry is
    positive real. Deterministic representative for eigenvector bookkeeping."""
    idx = np.flatnonzero(np.abs(v) > tol * max(1.0, np.abs(v).max(initial=0.0)))
    if idx.size == 0:
        return v
    ph = v[idx[0]] / abs(v[idx[0]])
    return v / ph


def sorted_eig_descending(M, tol: float = PREDICATE_TOL):
    """Hermitian eigendecomposition ordered by descending eigenvalue.

    Ties are broken by lexicographic comparison of the negated phase-normalized
    eigenvectors (real part, then imaginary part, entry by entry): degenerate
    spectra get a deterministic order, and a degenerate computational eigenbasis
    comes out as e_0, e_1, ... rather than reversed.
    """
    w, U = eig_hermitian(M, tol)
    cols = [_phase_normalize(U[:, k]) for k in range(U.shape[1])]
    order = sorted(
        range(len(w)),
        key=lambda k: (-w[k],) + tuple(np.concatenate([-cols[k].real, -cols[k].imag])),
    )
    w_out = np.array([w[k] for k in order])
    U_out = np.column_stack([cols[k] for k in order]) if order else U
    return w_out, U_out


def purify(rho) -> PureState:
    """Purification sum_k sqrt(p_k) |e_k> (x) |k> on dim^2.

    Eigenvalues are taken in descending order so that purify(|0><0|) is
    |0> (x) |0>; the reference basis on the second factor is computational.
    """
    R = _coerce_density(rho)
    w, U = sorted_eig_descending(R, VALIDATION_TOL)
    d = R.shape[0]
    out = np.zeros(d * d, dtype=complex)
    for k in range(d):
        p = max(float(w[k].real) if np.iscomplexobj(w) else float(w[k]), 0.0)
        if p <= 0.0:
            continue
        ek = np.zeros(d)
        ek[k] = 1.0
        out += np.sqrt(p) * np.kron(U[:, k], ek)
    out /= np.linalg.norm(out)
    return PureState(out)


def haar_unitary(d: int, rng: RngStream) -> np.ndarray:
    """Haar-distributed unitary: complex Gaussian matrix, QR, phases fixed so
    the R diagonal is positive."""
    if d < 1:
        raise DimensionMismatch("dimension must be >= 1")
    A = rng.complex_normal((d, d))
    Q, R = np.linalg.qr(A)
    diag = np.diagonal(R)
    ph = diag / np.abs(diag)
    return Q * ph


def haar_state(d: int, rng: RngStream) -> np.ndarray:
    """Haar-random unit vector on C^d."""
    v = rng.complex_normal((d,))
    return v / np.linalg.norm(v)
