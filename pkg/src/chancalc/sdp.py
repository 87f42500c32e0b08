"""Small dense semidefinite-program solver.

Primal-dual path-following interior-point method with Nesterov-Todd scaling
and a Mehrotra predictor-corrector step, solving the dense normal equations
per iteration. Problems are stated over complex Hermitian blocks:

    minimize    sum_blk Re <C_blk, X_blk>
    subject to  sum_blk Re <A_i_blk, X_blk> = b_i,   X_blk >= 0,

with <A, B> = tr(A* B). Internally every Hermitian block is embedded as a
real symmetric block of doubled dimension; the embedding doubles inner
products, so objective values are halved on the way out. Problem sizes here
are tiny (block dims up to ~64 complex), so everything is dense and the
normal-equation matrix is formed explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameters, DegenerateConstraints, DimensionMismatch, NumericalFailure


@dataclass(frozen=True)
class SdpProblem:
    """Standard-form problem data over complex Hermitian blocks.

    block_dims: complex dimension of each psd block.
    C: objective per block (Hermitian).
    A: one entry per constraint; each entry is a list aligned with the blocks
       whose items are Hermitian matrices or None (block does not appear).
    b: right-hand side, one real number per constraint.
    """

    block_dims: tuple
    C: tuple
    A: tuple
    b: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if any(d < 1 for d in dims):
            raise BadParameters("block dims must be positive")
        C = tuple(np.asarray(c, dtype=complex) for c in self.C)
        if len(C) != len(dims):
            raise DimensionMismatch("objective must list one matrix per block")
        for c, d in zip(C, dims):
            if c.shape != (d, d):
                raise DimensionMismatch("objective block shape mismatch")
        A = []
        for row in self.A:
            row = list(row)
            if len(row) != len(dims):
                raise DimensionMismatch("constraint must list one entry per block")
            row = [None if a is None else np.asarray(a, dtype=complex) for a in row]
            for a, d in zip(row, dims):
                if a is not None and a.shape != (d, d):
                    raise DimensionMismatch("constraint block shape mismatch")
            A.append(tuple(row))
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "A", tuple(A))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        if len(self.b) != len(self.A):
            raise DimensionMismatch("b length must match constraint count")


@dataclass
class SdpSolution:
    X: list
    y: np.ndarray
    Z: list
    primal: float
    dual: float
    gap: float
    iterations: int
    status: str
    iterate_log: list = field(default_factory=list)


def hermitian_basis(d: int):
    """Orthonormal (Frobenius) basis of d x d Hermitian matrices: diagonal
    units, then symmetric and antisymmetric pair combinations in index order."""
    out = []
    for i in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[i, i] = 1.0
        out.append(E)
    for i in range(d):
        for j in range(i + 1, d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = E[j, i] = 1.0 / np.sqrt(2.0)
            out.append(E)
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = -1j / np.sqrt(2.0)
            E[j, i] = 1j / np.sqrt(2.0)
            out.append(E)
    return out


def _embed(H: np.ndarray) -> np.ndarray:
    """Real symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix."""
    re, im = H.real, H.imag
    return np.block([[re, -im], [im, re]])


def _extract(Xr: np.ndarray) -> np.ndarray:
    """Inverse of _embed, averaging over the embedding symmetry."""
    n = Xr.shape[0] // 2
    re = 0.5 * (Xr[:n, :n] + Xr[n:, n:])
    im = 0.5 * (Xr[n:, :n] - Xr[:n, n:])
    H = re + 1j * im
    return 0.5 * (H + H.conj().T)


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _dot(As, Bs) -> float:
    return float(sum(np.tensordot(a, b, axes=2) for a, b in zip(As, Bs)))


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    """sup {alpha : X + alpha dX >= 0} for X > 0, via the scaled eigenproblem."""
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        # Roundoff can push a tiny eigenvalue of the iterate below zero;
        # rebuild a usable factor from the clipped eigendecomposition.
        w, U = np.linalg.eigh(X)
        floor = max(float(w[-1]), 0.0) * 1e-14 + 1e-300
        L = U * np.sqrt(np.clip(w, floor, None))
    Li = np.linalg.inv(L)
    T = _sym(Li @ dX @ Li.T)
    lam = np.linalg.eigvalsh(T)[0]
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def _nt_scaling(X: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Nesterov-Todd scaling point W: W Z W = X, via symmetric geometric mean."""
    wx, Ux = np.linalg.eigh(X)
    sx = (Ux * np.sqrt(np.clip(wx, 1e-300, None))) @ Ux.T  # X^{1/2}
    M = _sym(sx @ Z @ sx)
    wm, Um = np.linalg.eigh(M)
    mi = (Um * (np.clip(wm, 1e-300, None) ** -0.5)) @ Um.T  # M^{-1/2}
    return _sym(sx @ mi @ sx)


def solve(problem: SdpProblem, tol: float = 1e-8, max_iter: int = 100) -> SdpSolution:
    """Solve the SDP; returns an SdpSolution whose status is one of
    optimal / max_iter / infeasible.

    Raises DegenerateConstraints when the equality constraints are linearly
    dependent and NumericalFailure when a factorization breaks down.
    """
    dims_c = problem.block_dims
    nblk = len(dims_c)
    m = len(problem.b)
    # Real symmetric embedding; inner products double, so b doubles too and
    # objective values are halved on extraction.
    C = [_embed(0.5 * (c + c.conj().T)) for c in problem.C]
    A = []
    for row in problem.A:
        A.append(
            [
                None if a is None else _embed(0.5 * (a + a.conj().T))
                for a in row
            ]
        )
    b = 2.0 * np.asarray(problem.b, dtype=float)
    dims = [2 * d for d in dims_c]
    n_total = sum(dims)

    def a_apply(Xs) -> np.ndarray:
        out = np.zeros(m)
        for i, row in enumerate(A):
            acc = 0.0
            for a, x in zip(row, Xs):
                if a is not None:
                    acc += np.tensordot(a, x, axes=2)
            out[i] = acc
        return out

    def a_adj(y) -> list:
        outs = [np.zeros((d, d)) for d in dims]
        for i, row in enumerate(A):
            if y[i] == 0.0:
                continue
            for k, a in enumerate(row):
                if a is not None:
                    outs[k] = outs[k] + y[i] * a
        return outs

    # Linear independence of the constraints via the Gram spectrum.
    gram = np.zeros((m, m))
    flat = []
    for row in A:
        flat.append(np.concatenate([np.zeros(0) if a is None else a.reshape(-1) for a in row]))
    lens = {len(f) for f in flat}
    if len(lens) > 1:  # None-padding made rows ragged; rebuild densely
        flat = []
        for row in A:
            parts = []
            for a, d in zip(row, dims):
                parts.append(np.zeros(d * d) if a is None else a.reshape(-1))
            flat.append(np.concatenate(parts))
    F = np.vstack(flat) if m else np.zeros((0, 0))
    if m:
        gram = F @ F.T
        gw = np.linalg.eigvalsh(gram)
        if gw[0] < 1e-12 * max(gw[-1], 1e-300):
            raise DegenerateConstraints(
                f"constraint Gram condition {gw[0]:.3e} / {gw[-1]:.3e}"
            )

    # Initial point: scaled identities.
    normC = max(1.0, max(np.linalg.norm(c) for c in C) if nblk else 1.0)
    normA = max(1.0, max(np.linalg.norm(f) for f in flat) if m else 1.0)
    sx = max(1.0, float(np.abs(b).max(initial=0.0)) / normA) * np.sqrt(max(dims))
    sz = max(1.0, normC / np.sqrt(max(dims)))
    X = [sx * np.eye(d) for d in dims]
    y = np.zeros(m)
    Z = [sz * np.eye(d) for d in dims]

    log = []
    status = "max_iter"
    it = 0
    best = None
    stall = 0
    for it in range(1, max_iter + 1):
        mu = _dot(X, Z) / n_total
        rp = b - a_apply(X)
        Aty = a_adj(y)
        Rd = [c - aty - z for c, aty, z in zip(C, Aty, Z)]
        pobj = _dot(C, X) / 2.0
        dobj = float(b @ y) / 2.0
        err_p = float(np.linalg.norm(rp)) / (1.0 + float(np.linalg.norm(b)))
        err_d = max(
            (np.linalg.norm(r) / (1.0 + np.linalg.norm(c)) for r, c in zip(Rd, C)),
            default=0.0,
        )
        gap = abs(pobj - dobj)
        log.append(
            dict(
                iter=it,
                primal=pobj,
                dual=dobj,
                mu=mu,
                err_p=err_p,
                err_d=float(err_d),
            )
        )
        merit = max(err_p, float(err_d), gap / (1.0 + abs(pobj)))
        if np.isfinite(merit) and (best is None or merit < best["merit"]):
            if best is None or merit < 0.9 * best["merit"]:
                stall = 0
            best = dict(
                merit=merit,
                X=[x.copy() for x in X],
                y=y.copy(),
                Z=[z.copy() for z in Z],
            )
        else:
            stall += 1
        if err_p <= tol and err_d <= tol and gap <= tol * (1.0 + abs(pobj)):
            status = "optimal"
            break
        if float(np.abs(y).max(initial=0.0)) > 1.0 / tol:
            status = "infeasible"
            break
        if stall >= 8:
            # Finite precision has run out; report the best iterate seen.
            break

        try:
            W = [_nt_scaling(x, z) for x, z in zip(X, Z)]
            Zi = []
            for z in Z:
                wz, Uz = np.linalg.eigh(z)
                floor = max(float(wz[-1]), 0.0) * 1e-16 + 1e-280
                Zi.append(_sym((Uz / np.clip(wz, floor, None)) @ Uz.T))

            # Normal-equation matrix M_ij = <A_i, W A_j W>.
            WAW = []
            for row in A:
                WAW.append(
                    [
                        None if a is None else _sym(w @ a @ w)
                        for a, w in zip(row, W)
                    ]
                )
            Mmat = np.zeros((m, m))
            for j in range(m):
                colj = WAW[j]
                for i in range(m):
                    acc = 0.0
                    for a, waw in zip(A[i], colj):
                        if a is not None and waw is not None:
                            acc += np.tensordot(a, waw, axes=2)
                    Mmat[i, j] = acc
            Mmat = 0.5 * (Mmat + Mmat.T)

            # Factor once per iteration; the matrix gets severely
            # ill-conditioned near convergence, so escalate the jitter
            # instead of failing outright.
            scale = float(np.trace(Mmat)) / max(m, 1)
            if not np.isfinite(scale) or scale <= 0.0:
                scale = 1.0
            L = None
            eps = 1e-14
            while eps <= 1e-10:
                try:
                    L = np.linalg.cholesky(Mmat + eps * scale * np.eye(m))
                    break
                except np.linalg.LinAlgError:
                    eps *= 100.0
            if L is None:
                if best is None:
                    raise NumericalFailure(
                        "normal-equation factorization failed",
                        info=dict(iteration=it, mu=mu, err_p=err_p, err_d=float(err_d)),
                    )
                break

            def direction(Rc):
                # ZD = Rc - W Rd W contribution folded into the rhs.
                base = [rc - _sym(w @ rd @ w) for rc, rd, w in zip(Rc, Rd, W)]
                rhs = rp - a_apply(base)
                dy = np.linalg.solve(L.T, np.linalg.solve(L, rhs))
                # One round of iterative refinement against the unjittered
                # matrix recovers digits lost to conditioning near the end.
                resid = rhs - Mmat @ dy
                dy = dy + np.linalg.solve(L.T, np.linalg.solve(L, resid))
                dZ = [rd - aty for rd, aty in zip(Rd, a_adj(dy))]
                dX = [
                    _sym(rc - _sym(w @ dz @ w))
                    for rc, dz, w in zip(Rc, dZ, W)
                ]
                return dX, dy, dZ

            # Predictor.
            Rc_aff = [-x for x in X]
            dXa, dya, dZa = direction(Rc_aff)
            ap = min(1.0, 0.98 * min(_max_step(x, dx) for x, dx in zip(X, dXa)))
            ad = min(1.0, 0.98 * min(_max_step(z, dz) for z, dz in zip(Z, dZa)))
            mu_aff = _dot(
                [x + ap * dx for x, dx in zip(X, dXa)],
                [z + ad * dz for z, dz in zip(Z, dZa)],
            ) / n_total
            sigma = min(1.0, max((mu_aff / mu) ** 3, 1e-8))

            # Corrector with the second-order Mehrotra term.
            Rc = []
            for x, zi, dxa, dza in zip(X, Zi, dXa, dZa):
                second = _sym(dxa @ dza @ zi)
                Rc.append(sigma * mu * zi - x - second)
            dX, dy, dZ = direction(Rc)
            ap = min(1.0, 0.98 * min(_max_step(x, dx) for x, dx in zip(X, dX)))
            ad = min(1.0, 0.98 * min(_max_step(z, dz) for z, dz in zip(Z, dZ)))
            if min(ap, ad) < 1e-3:
                # Fall back to a plain centering step.
                Rc = [sigma * mu * zi - x for x, zi in zip(X, Zi)]
                dX, dy, dZ = direction(Rc)
                ap = min(1.0, 0.98 * min(_max_step(x, dx) for x, dx in zip(X, dX)))
                ad = min(1.0, 0.98 * min(_max_step(z, dz) for z, dz in zip(Z, dZ)))

            X = [_sym(x + ap * dx) for x, dx in zip(X, dX)]
            y = y + ad * dy
            Z = [_sym(z + ad * dz) for z, dz in zip(Z, dZ)]
            if not all(np.isfinite(x).all() for x in X) or not np.isfinite(y).all():
                if best is None:
                    raise NumericalFailure(
                        "iterate became non-finite",
                        info=dict(iteration=it, mu=mu),
                    )
                break
        except np.linalg.LinAlgError as exc:
            if best is None:
                raise NumericalFailure(
                    "linear algebra breakdown",
                    info=dict(iteration=it, mu=mu, err_p=err_p, err_d=float(err_d)),
                ) from exc
            break

    if status == "max_iter" and best is not None:
        X, y, Z = best["X"], best["y"], best["Z"]
    Xc = [_extract(x) for x in X]
    Zc = [_extract(z) for z in Z]
    pobj = _dot(C, X) / 2.0
    dobj = float(b @ y) / 2.0
    return SdpSolution(
        X=Xc,
        y=np.asarray(y),
        Z=Zc,
        primal=pobj,
        dual=dobj,
        gap=abs(pobj - dobj),
        iterations=it,
        status=status,
        iterate_log=log,
    )


def trace_norm_program(M) -> tuple:
    """Trace norm as the two-block SDP max Re tr(M* X) over contractions X:
    one psd block [[G11, X], [X*, G22]] with G11 = G22 = identity pinned.

    Returns (problem, extract) where extract(sol) gives the optimal value.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch("trace_norm_program expects a square matrix")
    d = M.shape[0]
    n = 2 * d
    Cobj = np.zeros((n, n), dtype=complex)
    Cobj[:d, d:] = -0.5 * M
    Cobj[d:, :d] = -0.5 * M.conj().T
    basis = hermitian_basis(d)
    A = []
    b = []
    for corner in (0, 1):
        for E in basis:
            G = np.zeros((n, n), dtype=complex)
            if corner == 0:
                G[:d, :d] = E
            else:
                G[d:, d:] = E
            A.append([G])
            b.append(float(np.trace(E).real))
    prob = SdpProblem((n,), (Cobj,), tuple(A), tuple(b))

    def extract(sol: SdpSolution) -> float:
        return -sol.primal

    return prob, extract
