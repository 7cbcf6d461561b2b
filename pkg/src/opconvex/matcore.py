"""Hermitian linear algebra kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The helpers
here validate self-adjointness, decompose, apply scalar functions through
the spectral theorem, compare in the Loewner order and sample positive
definite matrices reproducibly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DimensionMismatch, DomainViolation, NonConvergence, NotHermitian

HERMITIAN_TOL = 1e-10
PD_TOL = 1e-12


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return assemble(self.eigenvectors, self.eigenvalues)


def hermitian(A, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(A + A*)/2`` as a complex array after checking near self-adjointness.

    Raises :class:`NotHermitian` when ``||A - A*||_F > tol * (1 + ||A||_F)``
    and :class:`DimensionMismatch` for non-square input.
    """
    A = np.array(A, dtype=np.complex128)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainViolation("matrix has non-finite entries")
    Ah = A.conj().T
    if np.linalg.norm(A - Ah) > tol * (1.0 + np.linalg.norm(A)):
        raise NotHermitian("matrix is not self-adjoint within tolerance")
    return (A + Ah) / 2


def symmetrize(M: np.ndarray) -> np.ndarray:
    """``(M + M*)/2`` without any tolerance check; for products that are Hermitian in exact arithmetic."""
    return (M + np.swapaxes(M, -1, -2).conj()) / 2


def assemble(U: np.ndarray, values: np.ndarray) -> np.ndarray:
    """``U diag(values) U*``, symmetrized."""
    M = (U * values) @ U.conj().T
    return (M + M.conj().T) / 2


def spectral_decompose(A, check: bool = True) -> SpectralDecomposition:
    A = hermitian(A) if check else symmetrize(A)
    try:
        w, U = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    return SpectralDecomposition(w, U)


def apply_on_spectrum(f: Callable, values: np.ndarray) -> np.ndarray:
    """Evaluate ``f`` on real ``values``, enforcing ``f.domain`` when present."""
    domain = getattr(f, "domain", None)
    if domain is not None:
        lo, hi = domain
        if np.any(values <= lo) or np.any(values >= hi):
            raise DomainViolation(
                f"spectrum [{values.min():.6g}, {values.max():.6g}] outside domain ({lo}, {hi})"
            )
    with np.errstate(all="ignore"):
        out = np.broadcast_to(np.asarray(f(values)), values.shape)
    if np.iscomplexobj(out):
        if np.any(np.abs(out.imag) > 0):
            raise DomainViolation("function is not real-valued on the spectrum")
        out = out.real
    out = out.astype(np.float64)
    if not np.all(np.isfinite(out)):
        raise DomainViolation("function is not finite on the spectrum")
    return out


def matrix_function(f: Callable, A) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its eigendecomposition.

    ``f`` is any vectorized callable.  If it carries a ``domain`` attribute
    (an open interval ``(lo, hi)``) the spectrum is checked against it;
    otherwise non-finite function values signal a domain violation.
    """
    w, U = spectral_decompose(A)
    return assemble(U, apply_on_spectrum(f, w))


def loewner_margin(A, B) -> float:
    """``lambda_min(B - A)``; non-negative exactly when ``A <= B`` in the Loewner order."""
    A = hermitian(A)
    B = hermitian(B)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes {A.shape} and {B.shape} differ")
    try:
        return float(np.linalg.eigvalsh(B - A)[0])
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc


def pd_decompose(B, name: str = "matrix") -> SpectralDecomposition:
    """Decompose ``B`` and reject it unless ``lambda_min > PD_TOL * (1 + ||B||_2)``."""
    dec = spectral_decompose(B)
    w = dec.eigenvalues
    norm2 = np.max(np.abs(w))
    if not w[0] > PD_TOL * (1.0 + norm2):
        raise DomainViolation(f"{name} is not positive definite (lambda_min = {w[0]:.3g})")
    return dec


def is_pd(B) -> bool:
    try:
        pd_decompose(B)
    except DomainViolation:
        return False
    return True


def sqrtm_pd(B) -> np.ndarray:
    w, U = pd_decompose(B)
    return assemble(U, np.sqrt(w))


def congruence_half(B, X, direction: float) -> np.ndarray:
    """Return ``B^d X B^d`` with ``d = +1/2`` or ``-1/2``.

    The half power is taken spectrally; ``B`` must be positive definite.
    """
    if direction not in (0.5, -0.5):
        raise ValueError("direction must be +0.5 or -0.5")
    w, U = pd_decompose(B, "congruence base")
    X = hermitian(X)
    if X.shape != U.shape:
        raise DimensionMismatch(f"shapes {U.shape} and {X.shape} differ")
    R = assemble(U, w**direction)
    M = R @ X @ R
    return (M + M.conj().T) / 2


@dataclass(frozen=True)
class PdSamplerSpec:
    """Parameters for :func:`random_pd`.

    Eigenvalues are log-uniform in ``[10**log10_eig_min, 10**log10_eig_max]``.
    """

    dim: int
    log10_eig_min: float = -2.0
    log10_eig_max: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if not self.log10_eig_min <= self.log10_eig_max:
            raise ValueError("log10_eig_min must not exceed log10_eig_max")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary from the QR factorization of a complex Gaussian matrix."""
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_pd(spec: PdSamplerSpec) -> np.ndarray:
    rng = np.random.default_rng(int(spec.seed))
    eig = 10.0 ** rng.uniform(spec.log10_eig_min, spec.log10_eig_max, spec.dim)
    Q = haar_unitary(rng, spec.dim)
    if spec.dim == 1:
        # conjugation by a phase is the identity
        return eig.astype(np.complex128).reshape(1, 1)
    return assemble(Q, eig)


def random_complex(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Gaussian Hermitian matrix scaled to unit Frobenius norm."""
    Z = random_complex(rng, dim)
    H = (Z + Z.conj().T) / 2
    return H / np.linalg.norm(H)


def matrix_to_json(A) -> dict:
    A = np.asarray(A, dtype=np.complex128)
    return {
        "dim": int(A.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in A],
    }


def matrix_from_json(obj) -> np.ndarray:
    """Parse ``{"dim": n, "entries": [[[re, im], ...], ...]}`` (row-major).

    Entries may also be given as plain real numbers.
    """
    try:
        n = int(obj["dim"])
        rows = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError("matrix JSON needs 'dim' and 'entries'") from exc
    if len(rows) != n or any(len(r) != n for r in rows):
        raise DimensionMismatch(f"entries are not {n}x{n}")
    out = np.empty((n, n), dtype=np.complex128)
    for i, row in enumerate(rows):
        for j, z in enumerate(row):
            if isinstance(z, (list, tuple)):
                if len(z) != 2:
                    raise ValueError("complex entries must be [re, im] pairs")
                out[i, j] = complex(float(z[0]), float(z[1]))
            else:
                out[i, j] = float(z)
    return out
