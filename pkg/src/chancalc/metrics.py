"""Channel distance and information quantities.

Induced trace-norm distance, the completely bounded (diamond) norm by SDP
and by variational ascent, the operational channel fidelity through
Stinespring dilations, and the entropic quantities built on top of them.

Optimization conventions shared by everything here: multistart batches draw
from per-start RngStream children of one master stream, ascent/descent
iterations stop when the improvement drops below 1e-12 or after 500 rounds,
and every result carries its own certificate (SDP gap or multistart stats)
so reported values can be audited.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .channels import (
    Channel,
    LinearMap,
    jamiolkowski_state,
    omega,
    pad_dilation,
    to_stinespring,
)
from .errors import (
    BadParameters,
    DimensionMismatch,
    InvalidState,
    NotHermiticityPreserving,
    NumericalFailure,
)
from .linalg import (
    DensityMatrix,
    PureState,
    eig_hermitian,
    haar_state,
    hermitian_part,
    polar,
    purify,
    trace_norm,
)
from .rng import RngStream
from .sdp import SdpProblem, hermitian_basis
from .sdp import solve as sdp_solve
from .linalg import partial_trace

DEFAULT_MULTISTART = 32
ASCENT_CAP = 500
STEP_TOL = 1e-12
CONTRACTION_RESCUE_TOL = 1e-7
ENTROPY_CUT = 1e-12
SDP_TOL = 1e-9


@dataclass
class DistanceResult:
    """A distance value plus the evidence for it.

    certificate carries either the SDP duality gap or multistart statistics;
    witness is the optimizing input when one is available (a PureState for
    state-input optimizations, a matrix for rank-one |psi><phi| inputs).
    """

    value: float
    certificate: dict = field(default_factory=dict)
    witness: object = None


def _as_linear(T) -> LinearMap:
    return T.base if isinstance(T, Channel) else T


def _coerce_state(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return np.asarray(rho.mat)
    if isinstance(rho, PureState):
        return rho.projector()
    return DensityMatrix(rho).mat


def _run_starts(worker, n_starts: int, jobs: int = 1):
    ids = list(range(n_starts))
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(worker, ids))
    return [worker(k) for k in ids]


def _pick_best(results, maximize=True):
    """Deterministic reduction: best value, ties broken by lowest start id."""
    key = (lambda r: (-r["value"], r["start"])) if maximize else (
        lambda r: (r["value"], r["start"])
    )
    return sorted(results, key=key)[0]


def _multistart_stats(results, best):
    vals = [r["value"] for r in results]
    return {
        "starts": len(results),
        "best_start": best["start"],
        "best_value": best["value"],
        "value_spread": float(max(vals) - min(vals)) if vals else 0.0,
        "max_iterations": max((r["iters"] for r in results), default=0),
        "converged": sum(1 for r in results if r["converged"]),
    }


def stabilized_input(sigma) -> np.ndarray:
    """Pure Psi[r, a] on H_r (x) H_A whose reduction over r is sigma on A."""
    S = _coerce_state(sigma)
    w, U = eig_hermitian(S, tol=1e-8)
    d = S.shape[0]
    Psi = np.zeros((d, d), dtype=complex)
    for k in range(d):
        p = max(float(w[k]), 0.0)
        Psi[k, :] = np.sqrt(p) * U[:, k]
    n = np.linalg.norm(Psi)
    if n <= 0:
        raise InvalidState("cannot stabilize the zero state")
    return Psi / n


def stabilized_output(lin: LinearMap, Psi, Phi=None) -> np.ndarray:
    """(id (x) map)(|Psi><Phi|) for rank-one stabilized inputs Psi[r, a]."""
    Psi = np.asarray(Psi, dtype=complex)
    Phi = Psi if Phi is None else np.asarray(Phi, dtype=complex)
    t = lin.choi_tensor()
    out = np.einsum("abAB,ra,RA->rbRB", t, Psi, Phi.conj())
    n = Psi.shape[0] * lin.d_out
    return out.reshape(n, n)


def _stabilized_heisenberg(lin: LinearMap, W, d_r: int) -> np.ndarray:
    """(id (x) map^heis)(W) for W on H_r (x) H_B."""
    t = lin.choi_tensor()
    W4 = np.asarray(W).reshape(d_r, lin.d_out, d_r, lin.d_out)
    M4 = np.einsum("abAB,RBrb->RAra", t, W4)
    n = d_r * lin.d_in
    return M4.reshape(n, n)


def _sign_unitary(H) -> np.ndarray:
    """Hermitian sign of a Hermitian matrix (zero eigenvalues mapped to +1)."""
    w, U = np.linalg.eigh(hermitian_part(H))
    s = np.where(w >= 0.0, 1.0, -1.0)
    return (U * s) @ U.conj().T


# ---------------------------------------------------------------------------
# induced distance (unstabilized norm)
# ---------------------------------------------------------------------------

def induced_distance(
    phi1,
    phi2,
    mode: str = "states",
    multistart: int = DEFAULT_MULTISTART,
    seed: int = 0,
    jobs: int = 1,
) -> DistanceResult:
    """Norm distance of two maps without a bystander system.

    mode="states" maximizes ||Delta_*(rho)||_1 over input density matrices;
    the objective is convex in rho, so pure inputs suffice and the ascent
    runs over unit vectors. mode="full" maximizes over rank-one |psi><phi|,
    the extreme points of the unit trace-norm ball, which gives the full
    induced norm. Both are certified lower bounds with multistart stats.
    """
    l1, l2 = _as_linear(phi1), _as_linear(phi2)
    if (l1.d_in, l1.d_out) != (l2.d_in, l2.d_out):
        raise DimensionMismatch("maps act between different spaces")
    delta = l1 - l2
    if mode == "states":
        return _induced_states(delta, multistart, seed, jobs)
    if mode == "full":
        return _induced_full(delta, multistart, seed, jobs)
    raise BadParameters(f"unknown induced_distance mode {mode!r}")


def _induced_states(delta: LinearMap, multistart, seed, jobs) -> DistanceResult:
    master = RngStream(seed, stream_id=0)

    def one(start):
        rng = master.derive(start)
        psi = haar_state(delta.d_in, rng)
        val = -np.inf
        converged = False
        it = 0
        for it in range(1, ASCENT_CAP + 1):
            out = delta.schrodinger(np.outer(psi, psi.conj()))
            W, _ = polar(out)
            new = trace_norm(out)
            G = hermitian_part(delta.heisenberg(W.conj().T))
            wv, U = np.linalg.eigh(G)
            psi_next = U[:, -1]
            if new - val < STEP_TOL:
                val = max(val, new)
                converged = True
                break
            val = new
            psi = psi_next
        return dict(value=float(val), psi=psi, start=start, iters=it, converged=converged)

    results = _run_starts(one, multistart, jobs)
    best = _pick_best(results, maximize=True)
    return DistanceResult(
        value=best["value"],
        certificate={"method": "states-ascent", "multistart": _multistart_stats(results, best)},
        witness=PureState(best["psi"]),
    )


def _induced_full(delta: LinearMap, multistart, seed, jobs) -> DistanceResult:
    master = RngStream(seed, stream_id=1)
    t = delta.choi_tensor()

    def one(start):
        rng = master.derive(start)
        psi = haar_state(delta.d_in, rng)
        phi = haar_state(delta.d_in, rng)
        val = -np.inf
        converged = False
        it = 0
        for it in range(1, ASCENT_CAP + 1):
            out = delta.schrodinger(np.outer(psi, phi.conj()))
            W, _ = polar(out)
            new = trace_norm(out)
            # G[a, A] pairs the input bra/ket against the fixed dual point W.
            G = np.einsum("abAB,bB->aA", t, W.conj())
            U, s, Vh = np.linalg.svd(G)
            psi_next = U[:, 0].conj()
            phi_next = Vh[0, :]
            if new - val < STEP_TOL:
                val = max(val, new)
                converged = True
                break
            val = new
            psi, phi = psi_next, phi_next
        return dict(
            value=float(val), psi=psi, phi=phi, start=start, iters=it, converged=converged
        )

    results = _run_starts(one, multistart, jobs)
    best = _pick_best(results, maximize=True)
    return DistanceResult(
        value=best["value"],
        certificate={"method": "full-ascent", "multistart": _multistart_stats(results, best)},
        witness=np.outer(best["psi"], best["phi"].conj()),
    )


# ---------------------------------------------------------------------------
# diamond norm
# ---------------------------------------------------------------------------

def diamond_norm(
    delta,
    method: str = "sdp",
    multistart: int = DEFAULT_MULTISTART,
    seed: int = 0,
    tol: float = SDP_TOL,
    jobs: int = 1,
) -> DistanceResult:
    """Completely bounded norm with a d_A-dimensional bystander system.

    method="sdp" certifies the value to the reported duality gap; the
    variational method maximizes the stabilized trace norm over pure inputs
    and is a guaranteed lower bound, requiring a Hermiticity-preserving map.
    method="both" runs the two and records whether they agree to 1e-6.
    """
    lin = _as_linear(delta)
    if method not in ("sdp", "variational", "both"):
        raise BadParameters(f"unknown diamond_norm method {method!r}")
    if method in ("variational", "both") and not lin.is_hermiticity_preserving():
        raise NotHermiticityPreserving(
            "variational diamond norm needs a Hermiticity-preserving map"
        )
    if method == "sdp":
        return _diamond_sdp(lin, tol)
    if method == "variational":
        return _diamond_variational(lin, multistart, seed, jobs)
    rs = _diamond_sdp(lin, tol)
    rv = _diamond_variational(lin, multistart, seed, jobs)
    agreed = abs(rs.value - rv.value) <= 1e-6
    cert = {
        "method": "both",
        "agreed": bool(agreed),
        "sdp_gap": rs.certificate["sdp_gap"],
        "status": rs.certificate["status"],
        "sdp": rs.certificate,
        "variational": rv.certificate,
        "variational_value": rv.value,
    }
    return DistanceResult(value=rs.value, certificate=cert, witness=rv.witness)


def diamond_program(lin: LinearMap):
    """The diamond-norm SDP in block standard form.

    maximize Re tr(J* X) over the top-right corner X of a psd block
    [[rho0 (x) 1_B, X], [X*, rho1 (x) 1_B]] with unit-trace rho0, rho1.
    Returns (problem, extract) with extract(solution) = the norm value.
    """
    dA, dB = lin.d_in, lin.d_out
    J = np.asarray(lin.choi)
    n = dA * dB
    N = 2 * n
    Cobj = np.zeros((N, N), dtype=complex)
    Cobj[:n, n:] = -0.5 * J
    Cobj[n:, :n] = -0.5 * J.conj().T
    A = []
    b = []
    basis = hermitian_basis(n)
    for corner in (0, 1):
        for H in basis:
            G = np.zeros((N, N), dtype=complex)
            if corner == 0:
                G[:n, :n] = H
            else:
                G[n:, n:] = H
            red = partial_trace(H, (dA, dB), keep=1)
            row = [G, None, None]
            row[1 + corner] = -red
            A.append(row)
            b.append(0.0)
    A.append([None, np.eye(dA, dtype=complex), None])
    b.append(1.0)
    A.append([None, None, np.eye(dA, dtype=complex)])
    b.append(1.0)
    prob = SdpProblem((N, dA, dA), (Cobj, np.zeros((dA, dA)), np.zeros((dA, dA))), tuple(A), tuple(b))

    def extract(sol):
        return -sol.primal

    return prob, extract


def _diamond_sdp(lin: LinearMap, tol: float) -> DistanceResult:
    prob, extract = diamond_program(lin)
    sol = sdp_solve(prob, tol=tol)
    value = max(extract(sol), 0.0)
    cert = {
        "method": "sdp",
        "sdp_gap": sol.gap,
        "status": sol.status,
        "iterations": sol.iterations,
    }
    return DistanceResult(value=float(value), certificate=cert, witness=None)


def _diamond_variational(lin: LinearMap, multistart, seed, jobs) -> DistanceResult:
    master = RngStream(seed, stream_id=2)
    dA = lin.d_in

    def one(start):
        rng = master.derive(start)
        psi = haar_state(dA * dA, rng)
        val = -np.inf
        converged = False
        it = 0
        for it in range(1, ASCENT_CAP + 1):
            Psi = psi.reshape(dA, dA)
            out = stabilized_output(lin, Psi)
            W = _sign_unitary(out)
            new = float(np.real(np.trace(W @ out)))
            M = hermitian_part(_stabilized_heisenberg(lin, W, dA))
            w, U = np.linalg.eigh(M)
            psi_next = U[:, -1]
            if new - val < STEP_TOL:
                val = max(val, new)
                converged = True
                break
            val = new
            psi = psi_next
        return dict(value=float(val), psi=psi, start=start, iters=it, converged=converged)

    results = _run_starts(one, multistart, jobs)
    best = _pick_best(results, maximize=True)
    return DistanceResult(
        value=best["value"],
        certificate={
            "method": "variational",
            "multistart": _multistart_stats(results, best),
        },
        witness=PureState(best["psi"]),
    )


# ---------------------------------------------------------------------------
# operational channel fidelity
# ---------------------------------------------------------------------------

def _common_dilations(T1: Channel, T2: Channel):
    if (T1.d_in, T1.d_out) != (T2.d_in, T2.d_out):
        raise DimensionMismatch("channels act between different spaces")
    s1 = to_stinespring(T1)
    s2 = to_stinespring(T2)
    dE = max(s1.d_E, s2.d_E)
    return pad_dilation(s1, dE), pad_dilation(s2, dE)


def _cf_cross(V1t, V2t, sigma):
    """X = tr_B(V2 sigma V1*), the environment-side cross operator."""
    return np.einsum("bEc,cd,bed->Ee", V2t, sigma, V1t.conj())


def _cf_middle(V1t, V2t, U):
    """M(U) = V1* (1 (x) U) V2 on the input space."""
    return np.einsum("bea,eE,bEc->ac", V1t.conj(), U, V2t)


def align_dilations(
    V1t: np.ndarray,
    V2t: np.ndarray,
    multistart: int = DEFAULT_MULTISTART,
    seed: int = 0,
):
    """Minimax alignment of two isometries given as tensors V[b, e, a].

    Finds the worst-case input sigma and the environment unitary U that
    witness the operational fidelity of the two induced channels:
    F = min_sigma ||tr_B(V2 sigma V1*)||_1 = max_U lambda_min of
    Herm(V1* (1 (x) U) V2). Returns (F, sigma, U, info) where info records
    multistart statistics, the achieved duality gap between the two sides,
    and the lower bound from the U side.

    Alternates the polar-decomposition step for U with the minimal-eigenvector
    step for the input, multistarted, then descends over mixed inputs (the
    minimizing sigma may be mixed) with Frank-Wolfe plus a quasi-Newton
    polish; the value reported is the input-side upper value, certified by
    the U-side lower bound.
    """
    V1t = np.asarray(V1t)
    V2t = np.asarray(V2t)
    if V1t.shape != V2t.shape:
        raise DimensionMismatch("isometry tensors have different shapes")
    _, dE, dA = V1t.shape
    master = RngStream(seed, stream_id=3)

    def upper(sigma):
        X = _cf_cross(V1t, V2t, sigma)
        return float(np.linalg.svd(X, compute_uv=False).sum())

    def u_step(sigma):
        X = _cf_cross(V1t, V2t, sigma)
        W, _ = polar(X)
        return W.conj().T

    def sigma_step(U):
        H = hermitian_part(_cf_middle(V1t, V2t, U))
        w, Q = np.linalg.eigh(H)
        v = Q[:, 0]
        return np.outer(v, v.conj()), float(w[0])

    def one(start):
        rng = master.derive(start)
        v = haar_state(dA, rng)
        sigma = np.outer(v, v.conj())
        val = np.inf
        perturbed = False
        it = 0
        converged = False
        for it in range(1, ASCENT_CAP + 1):
            U = u_step(sigma)
            new = upper(sigma)
            sigma_next, low = sigma_step(U)
            if val - new < STEP_TOL:
                if not perturbed:
                    # One escape attempt per start: blend the aligning
                    # unitary with a random one and restart from its
                    # minimal-eigenvector input.
                    perturbed = True
                    G = rng.complex_normal((dE, dE))
                    Wp, _ = polar(0.99 * U + 0.01 * G)
                    sigma, _ = sigma_step(Wp)
                    val = min(val, new)
                    continue
                val = min(val, new)
                converged = True
                break
            val = min(val, new)
            sigma = sigma_next
        return dict(value=float(val), sigma=sigma, start=start, iters=it, converged=converged)

    results = _run_starts(one, multistart)
    best = _pick_best(results, maximize=False)
    sigma = np.asarray(best["sigma"])
    # The alternation walks over pure inputs only; the true minimizer may be
    # mixed (the objective is convex in the reduced input), so polish over
    # the full state set. Frank-Wolfe steps with exact line search first.
    sigma = _cf_frank_wolfe(V1t, V2t, sigma, upper, u_step)
    gap, lower_val = _cf_gap(V1t, V2t, sigma, upper)
    if gap > 1e-9:
        sigma2 = _cf_bfgs(V1t, V2t, sigma, upper, dA)
        if upper(sigma2) < upper(sigma):
            sigma = _cf_frank_wolfe(V1t, V2t, sigma2, upper, u_step)
        gap, lower_val = _cf_gap(V1t, V2t, sigma, upper)

    if gap > CONTRACTION_RESCUE_TOL:
        # Descent can stall short of the saddle when the minimizer is a
        # well-mixed input, so hand the whole problem to the semidefinite
        # program, which certifies the value and returns the worst input.
        try:
            _, _, sigma_c = contraction_align(V1t, V2t)
        except NumericalFailure:
            sigma_c = None
        if sigma_c is not None and upper(sigma_c) < upper(sigma):
            sigma = sigma_c
            gap, lower_val = _cf_gap(V1t, V2t, sigma, upper)

    U = u_step(sigma)
    if gap > 1e-9:
        # A singular cross operator leaves the polar unitary arbitrary on
        # the null space; resolve that freedom before reporting the gap.
        U_ref, low_ref = _refine_unitary(V1t, V2t, sigma)
        if low_ref > lower_val:
            U = U_ref
            lower_val = low_ref
            gap = upper(sigma) - lower_val

    F = min(max(upper(sigma), 0.0), 1.0)
    info = _multistart_stats(results, best)
    info["duality_gap"] = float(gap)
    info["lower_bound"] = float(lower_val)
    return F, sigma, U, info


def channel_fidelity(
    T1: Channel,
    T2: Channel,
    multistart: int = DEFAULT_MULTISTART,
    seed: int = 0,
    tol: float = 1e-10,
    with_stats: bool = False,
):
    """Worst-case fidelity of stabilized outputs over all pure inputs.

    Returns (F, witness, U): F in [0, 1]; witness a PureState on
    H_A (x) H_A (reference factor first) whose outputs under id (x) T_i
    realize F; U the environment unitary aligning the two canonical
    dilations, with lambda_min of Herm(V1* (1 (x) U) V2) matching F up to
    the duality gap recorded in the optional stats.
    """
    d1, d2 = _common_dilations(T1, T2)
    F, sigma, U, info = align_dilations(
        d1.v_tensor(), d2.v_tensor(), multistart=multistart, seed=seed
    )
    Psi = stabilized_input(sigma)
    witness = PureState(Psi.reshape(-1))
    if with_stats:
        return F, witness, U, info
    return F, witness, U


def _cf_lower(V1t, V2t, U) -> float:
    H = hermitian_part(_cf_middle(V1t, V2t, U))
    return float(np.linalg.eigvalsh(H)[0])


def _cf_gap(V1t, V2t, sigma, upper):
    X = _cf_cross(V1t, V2t, sigma)
    W, _ = polar(X)
    U = W.conj().T
    low = _cf_lower(V1t, V2t, U)
    return upper(sigma) - low, low


def _refine_unitary(V1t, V2t, sigma):
    """Best aligning unitary at the given input, degeneracies resolved.

    The polar step pins U only on the support of the cross operator X;
    on its null space any unitary block maximizes tr(U X), and the right
    choice there decides the lower bound. The full maximizer family is
    U(Q) = Vx diag(1_r, Q) Ux* over unitary Q, searched here directly.
    """
    X = _cf_cross(V1t, V2t, sigma)
    dE = X.shape[0]
    Ux, s, Vhx = np.linalg.svd(X)
    Vx = Vhx.conj().T
    smax = float(s[0]) if s.size else 0.0
    r = int(np.sum(s > max(1e-12, 1e-7 * smax)))
    k = dE - r

    def build(Q):
        core = np.zeros((dE, dE), dtype=complex)
        core[:r, :r] = np.eye(r)
        core[r:, r:] = Q
        return Vx @ core @ Ux.conj().T

    U0 = build(np.eye(k, dtype=complex))
    if k == 0:
        return U0, _cf_lower(V1t, V2t, U0)
    # Candidate that re-pairs the two null-space bases; exact for
    # self-alignments, where it reproduces the identity. The raw pairing is
    # only a contraction when the left and right null spaces differ, so take
    # its polar unitary.
    Qp, _ = polar(Vx[:, r:].conj().T @ Ux[:, r:])
    cands = [np.eye(k, dtype=complex), Qp]
    best_Q = max(cands, key=lambda Q: _cf_lower(V1t, V2t, build(Q)))

    from scipy.linalg import expm

    idx_diag = list(range(k))
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]

    def q_of(theta):
        H = np.zeros((k, k), dtype=complex)
        for t, i in zip(theta[:k], idx_diag):
            H[i, i] = t
        off = theta[k:]
        for m, (i, j) in enumerate(pairs):
            re, im = off[2 * m], off[2 * m + 1]
            H[i, j] = re + 1j * im
            H[j, i] = re - 1j * im
        return best_Q @ expm(1j * H)

    def neg(theta):
        return -_cf_lower(V1t, V2t, build(q_of(theta)))

    theta0 = np.zeros(k * k)
    res = optimize.minimize(neg, theta0, method="Powell",
                            options={"maxiter": 2000, "xtol": 1e-10, "ftol": 1e-12})
    U_ref = build(q_of(res.x))
    low_ref = _cf_lower(V1t, V2t, U_ref)
    low_base = _cf_lower(V1t, V2t, build(best_Q))
    if low_ref >= low_base:
        return U_ref, low_ref
    return build(best_Q), low_base


def contraction_align(V1t, V2t, tol: float = 1e-9):
    """Alignment value over environment contractions, by semidefinite program.

    Maximizes lambda_min of Herm(V1* (1 (x) C) V2) over matrices C with
    ||C|| <= 1. Over contractions the maximum always equals the operational
    fidelity of the two induced channels, whereas the maximum over unitaries
    of the same size can fall short when the cross operator is singular at
    the optimum; the unitary dilation of the optimal contraction on a
    doubled environment then recovers the full value.

    The program is solved in dual (LMI) form with variables (t, C):
    maximize t subject to Herm(V1* (1 (x) C) V2) >= t*1 and the contraction
    condition written as [[1, C], [C*, 1]] >= 0. The primal block attached
    to the first constraint is the worst-case input state, so the solve
    certifies both sides of the saddle at once. Returns (value, C, sigma).
    """
    V1t = np.asarray(V1t)
    V2t = np.asarray(V2t)
    if V1t.shape != V2t.shape:
        raise DimensionMismatch("isometry tensors have different shapes")
    _, dE, dA = V1t.shape
    basis = []
    for p in range(dE):
        for q in range(dE):
            E = np.zeros((dE, dE), dtype=complex)
            E[p, q] = 1.0
            basis.append(E)
            basis.append(1j * E)
    rows = [[np.eye(dA, dtype=complex), None]]
    for B in basis:
        M = hermitian_part(_cf_middle(V1t, V2t, B))
        K = np.zeros((2 * dE, 2 * dE), dtype=complex)
        K[:dE, dE:] = B
        K[dE:, :dE] = B.conj().T
        rows.append([-M, -K])
    b = np.zeros(len(rows))
    b[0] = 1.0
    problem = SdpProblem(
        block_dims=(dA, 2 * dE),
        C=(np.zeros((dA, dA), dtype=complex), np.eye(2 * dE, dtype=complex)),
        A=tuple(tuple(r) for r in rows),
        b=tuple(b),
    )
    sol = sdp_solve(problem, tol=tol)
    y = np.asarray(sol.y)
    C = np.zeros((dE, dE), dtype=complex)
    for coef, B in zip(y[1:], basis):
        C = C + coef * B
    sigma = hermitian_part(np.asarray(sol.X[0]))
    sigma = sigma / np.trace(sigma).real
    return float(y[0]), C, sigma


def _cf_frank_wolfe(V1t, V2t, sigma, upper, u_step, iters: int = 300):
    for _ in range(iters):
        U = u_step(sigma)
        G = hermitian_part(_cf_middle(V1t, V2t, U))
        w, Q = np.linalg.eigh(G)
        v = Q[:, 0]
        vertex = np.outer(v, v.conj())
        fw_gap = float(np.real(np.trace(G @ (sigma - vertex))))
        if fw_gap < 1e-12:
            break
        D = vertex - sigma

        def line(t):
            return upper(sigma + t * D)

        res = optimize.minimize_scalar(line, bounds=(0.0, 1.0), method="bounded",
                                       options={"xatol": 1e-12})
        t = float(res.x)
        if line(t) >= upper(sigma) - 1e-15:
            break
        sigma = sigma + t * D
        sigma = hermitian_part(sigma)
        sigma = sigma / np.trace(sigma).real
    return sigma


def _cf_bfgs(V1t, V2t, sigma0, upper, dA):
    """Quasi-Newton descent over a Cholesky-style parameterization."""
    w, Q = np.linalg.eigh(hermitian_part(sigma0))
    L0 = Q @ np.diag(np.sqrt(np.clip(w, 0.0, None)).astype(complex))

    def unpack(z):
        L = (z[: dA * dA] + 1j * z[dA * dA:]).reshape(dA, dA)
        S = L @ L.conj().T
        tr = np.trace(S).real
        if tr <= 1e-300:
            return np.eye(dA) / dA
        return S / tr

    def fun(z):
        return upper(unpack(z))

    z0 = np.concatenate([L0.real.reshape(-1), L0.imag.reshape(-1)])
    res = optimize.minimize(fun, z0, method="L-BFGS-B",
                            options={"maxiter": 400, "ftol": 1e-14, "gtol": 1e-12})
    return unpack(res.x)


# ---------------------------------------------------------------------------
# entropic quantities
# ---------------------------------------------------------------------------

def _entropy_of(mat) -> float:
    w = np.linalg.eigvalsh(hermitian_part(mat))
    w = w[w > ENTROPY_CUT]
    if w.size == 0:
        return 0.0
    return float(-(w * np.log2(w)).sum())


def von_neumann_entropy(rho) -> float:
    """Base-2 von Neumann entropy; eigenvalues below 1e-12 count as zero."""
    R = _coerce_state(rho)
    return max(_entropy_of(R), 0.0)


def holevo_chi(ensemble, T: Channel) -> float:
    """Holevo information of the output ensemble."""
    outs = []
    probs = []
    for p, rho in ensemble.members:
        R = np.asarray(rho.mat)
        if R.shape[0] != T.d_in:
            raise DimensionMismatch("ensemble dimension does not match the channel")
        outs.append(T.schrodinger(R))
        probs.append(p)
    avg = sum(p * o for p, o in zip(probs, outs))
    chi = _entropy_of(avg) - sum(p * _entropy_of(o) for p, o in zip(probs, outs))
    if chi < -1e-10:
        raise InvalidState(f"Holevo information came out negative: {chi:.3e}")
    return max(chi, 0.0)


def coherent_info(T: Channel, rho) -> float:
    """Output entropy minus joint output entropy of the purified input."""
    R = _coerce_state(rho)
    if R.shape[0] != T.d_in:
        raise DimensionMismatch("state dimension does not match the channel")
    psi = purify(R)
    d = R.shape[0]
    Psi = psi.vec.reshape(d, d).T  # reference factor first, channel acts second
    joint = stabilized_output(T.base, Psi)
    out = T.schrodinger(R)
    return _entropy_of(out) - _entropy_of(joint)


def channel_fidelity_Fc(R: Channel) -> float:
    """Overlap of the channel's Jamiolkowski state with the maximally
    entangled vector."""
    lin = _as_linear(R)
    if lin.d_in != lin.d_out:
        raise DimensionMismatch("channel fidelity needs d_in = d_out")
    jam = jamiolkowski_state(lin)
    Om = omega(lin.d_in)
    val = Om.conj() @ jam @ Om
    return float(np.real(val))
