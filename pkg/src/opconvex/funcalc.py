"""Functional calculus for commuting tuples and for the pair ``(L_A, R_B)``.

For commuting Hermitian ``X_1, ..., X_k`` a joint eigenbasis exists and
``f(X_1, ..., X_k)`` acts on each joint eigenvector by the value of ``f`` at
the attached eigenvalues.  The left and right multiplication operators
``L_A: H -> AH`` and ``R_B: H -> HB`` always commute, so ``f(L_A, R_B)`` is
defined for any ``A, B``; it is applied here in the two eigenbases without
forming the ``n^2 x n^2`` superoperator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ArityMismatch, DimensionMismatch, DomainViolation, NonConvergence, NotCommuting
from .matcore import assemble, hermitian, spectral_decompose

COMMUTATOR_TOL = 1e-10
CLUSTER_GAP = 1e-8
RECONSTRUCTION_TOL = 1e-9


class CommutingTuple:
    """Hermitian matrices of one dimension that pairwise commute (checked on construction)."""

    def __init__(self, matrices: Sequence):
        mats = tuple(hermitian(X) for X in matrices)
        if not mats:
            raise ArityMismatch("a commuting tuple needs at least one matrix")
        shape = mats[0].shape
        if any(X.shape != shape for X in mats):
            raise DimensionMismatch("matrices in a tuple must share one dimension")
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                Xi, Xj = mats[i], mats[j]
                comm = np.linalg.norm(Xi @ Xj - Xj @ Xi)
                bound = COMMUTATOR_TOL * (1.0 + np.linalg.norm(Xi) * np.linalg.norm(Xj))
                if comm > bound:
                    raise NotCommuting(f"||[X_{i}, X_{j}]||_F = {comm:.3g} exceeds {bound:.3g}")
        self.matrices = mats

    @property
    def k(self) -> int:
        return len(self.matrices)

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]


@dataclass(frozen=True)
class JointEigensystem:
    """Joint eigenbasis (columns of ``basis``) and, per matrix, the eigenvalue
    attached to each basis vector: ``diag_values[m, j] = u_j* X_m u_j``."""

    basis: np.ndarray
    diag_values: np.ndarray


def _split_clusters(w: np.ndarray, gap: float) -> list:
    clusters, start = [], 0
    for i in range(1, len(w)):
        if w[i] - w[i - 1] >= gap:
            clusters.append(range(start, i))
            start = i
    clusters.append(range(start, len(w)))
    return clusters


def _joint_basis(mats: Sequence[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    n = mats[0].shape[0]
    if n == 1:
        return np.eye(1, dtype=np.complex128)
    c = rng.standard_normal(len(mats))
    M = sum(ci * X for ci, X in zip(c, mats))
    M = (M + M.conj().T) / 2
    try:
        w, U = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    scale = max(np.max(np.abs(w)), max(np.linalg.norm(X, 2) for X in mats))
    clusters = _split_clusters(w, CLUSTER_GAP * scale)
    if len(clusters) == 1:
        # a generic combination is degenerate only if every member is scalar here
        return U
    for cl in clusters:
        if len(cl) == 1:
            continue
        idx = np.asarray(cl)
        Ucl = U[:, idx]
        sub = [Ucl.conj().T @ X @ Ucl for X in mats]
        U[:, idx] = Ucl @ _joint_basis([(S + S.conj().T) / 2 for S in sub], rng)
    return U


def joint_diagonalize(t: CommutingTuple, seed: int = 0) -> JointEigensystem:
    """Simultaneously diagonalize a commuting tuple.

    A random combination of the members is decomposed; degenerate clusters
    of its spectrum are refined recursively on the restricted matrices.
    Eigenvalues are attached to basis vectors through Rayleigh quotients,
    which keeps the pairing between members intact.  Vectors are ordered
    lexicographically by their attached values.
    """
    rng = np.random.default_rng(seed)
    U = _joint_basis(t.matrices, rng)
    # canonical phase: largest component of each vector real and positive
    lead = U[np.argmax(np.abs(U), axis=0), np.arange(t.dim)]
    U = U * (lead.conj() / np.abs(lead))
    values = np.einsum("ij,mik,kj->mj", U.conj(), np.stack(t.matrices), U).real
    order = np.lexsort(values[::-1])
    U, values = U[:, order], values[:, order]
    for m, X in enumerate(t.matrices):
        resid = np.linalg.norm(assemble(U, values[m]) - X)
        if resid > RECONSTRUCTION_TOL * (1.0 + np.linalg.norm(X)):
            raise NotCommuting(f"joint eigenbasis fails to diagonalize member {m} (residual {resid:.3g})")
    return JointEigensystem(U, values)


def _kernel_values(f: Callable, *args: np.ndarray) -> np.ndarray:
    arity = getattr(f, "arity", None)
    if arity is not None and arity != len(args):
        raise ArityMismatch(f"kernel takes {arity} arguments, got {len(args)}")
    shape = np.broadcast_shapes(*(np.shape(a) for a in args))
    with np.errstate(all="ignore"):
        out = np.broadcast_to(np.asarray(f(*args)), shape)
    if np.iscomplexobj(out):
        if np.any(out.imag != 0):
            raise DomainViolation("kernel is not real-valued at the given arguments")
        out = out.real
    out = np.asarray(out, dtype=np.float64)
    if not np.all(np.isfinite(out)):
        raise DomainViolation("kernel is not finite at the given arguments")
    return out


def multivariate_apply(f: Callable, t: CommutingTuple, seed: int = 0) -> np.ndarray:
    """``f(X_1, ..., X_k)`` for a commuting tuple; ``f`` is vectorized over its k arguments."""
    if not isinstance(t, CommutingTuple):
        t = CommutingTuple(t)
    js = joint_diagonalize(t, seed=seed)
    vals = _kernel_values(f, *js.diag_values)
    return assemble(js.basis, vals)


def lr_apply(f: Callable, A, B, H) -> np.ndarray:
    """Apply ``f(L_A, R_B)`` to ``H``.

    With ``A = sum_i a_i P_i`` and ``B = sum_j b_j Q_j`` this is
    ``sum_{i,j} f(a_i, b_j) P_i H Q_j``.
    """
    a, U = spectral_decompose(A)
    b, V = spectral_decompose(B)
    H = np.asarray(H, dtype=np.complex128)
    if H.shape != U.shape or U.shape != V.shape:
        raise DimensionMismatch(f"shapes {U.shape}, {V.shape}, {H.shape} are incompatible")
    K = _kernel_values(f, a[:, None], b[None, :])
    return U @ ((U.conj().T @ H @ V) * K) @ V.conj().T


def trace_form(f: Callable, A, B, H) -> float:
    """``Re Tr(H* f(L_A, R_B) H)``."""
    H = np.asarray(H, dtype=np.complex128)
    return float(np.vdot(H, lr_apply(f, A, B, H)).real)


def superoperator_dense(f: Callable, A, B) -> np.ndarray:
    """Dense matrix of ``f(L_A, R_B)`` acting on row-major ``vec(H)``; debugging aid for ``dim <= 4``."""
    a, U = spectral_decompose(A)
    b, V = spectral_decompose(B)
    n = U.shape[0]
    if n > 4:
        raise ValueError("dense superoperator export is limited to dim <= 4")
    K = _kernel_values(f, a[:, None], b[None, :])
    S = np.zeros((n * n, n * n), dtype=np.complex128)
    for i in range(n):
        P = np.outer(U[:, i], U[:, i].conj())
        for j in range(n):
            Q = np.outer(V[:, j], V[:, j].conj())
            S += K[i, j] * np.kron(P, Q.T)
    return S
