"""Divided differences, Loewner matrices and Frechet differentials of power functions.

In the eigenbasis of ``A`` the differential of ``f`` at ``A`` acts on ``H``
as the Hadamard product with the Loewner matrix
``L_f[i, j] = f[lambda_i, lambda_j]`` (first divided differences).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainViolation, SingularDifferential
from .matcore import pd_decompose

DIAGONAL_GAP = 1e-7
SINGULAR_TOL = 1e-14


@dataclass(frozen=True)
class PowerFunction:
    """``t -> t**exponent`` on the open half-line."""

    exponent: float

    domain = (0.0, np.inf)

    def __post_init__(self):
        if not np.isfinite(self.exponent):
            raise ValueError("exponent must be finite")

    def __call__(self, t):
        return np.power(t, self.exponent)

    def derivative(self, t):
        if self.exponent == 0:
            return np.zeros_like(np.asarray(t, dtype=np.float64))
        return self.exponent * np.power(t, self.exponent - 1)


def _check_positive(*args):
    for a in args:
        if np.any(~(np.asarray(a) > 0)):
            raise DomainViolation("divided differences require positive arguments")


def _power_quotient(a: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # (hi^a - lo^a)/(hi - lo) without cancellation: lo^(a-1) * expm1(a*log r)/(r - 1)
    d = (hi - lo) / lo
    return lo ** (a - 1) * np.expm1(a * np.log1p(d)) / d


def divided_difference(f, s, t):
    """First divided difference ``f[s, t]``.

    The quotient is used when ``|t - s| > 1e-7 * max(s, t, 1)``; closer
    arguments get ``f'((s + t)/2)``.  ``f`` is a :class:`PowerFunction` or
    any vectorized callable with a ``derivative`` method.  Works elementwise
    on arrays and is exactly symmetric in ``s`` and ``t``.
    """
    s = np.asarray(s, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    _check_positive(s, t)
    lo, hi = np.minimum(s, t), np.maximum(s, t)
    near = (hi - lo) <= DIAGONAL_GAP * np.maximum(hi, 1.0)
    with np.errstate(all="ignore"):
        if isinstance(f, PowerFunction):
            far = _power_quotient(f.exponent, lo, hi)
        else:
            far = (f(hi) - f(lo)) / (hi - lo)
        out = np.where(near, f.derivative((lo + hi) / 2), far)
    return out if out.ndim else float(out)


def loewner_matrix(f, eigenvalues) -> np.ndarray:
    lam = np.asarray(eigenvalues, dtype=np.float64)
    return divided_difference(f, lam[:, None], lam[None, :])


def _setup(f, A, H):
    w, U = pd_decompose(A)
    H = np.asarray(H, dtype=np.complex128)
    if H.shape != U.shape:
        raise DimensionMismatch(f"shapes {U.shape} and {H.shape} differ")
    return U, loewner_matrix(f, w), H


def frechet_apply(f, A, H) -> np.ndarray:
    """``Df(A)(H) = U ((U* H U) o L_f) U*`` for positive definite ``A``."""
    U, L, H = _setup(f, A, H)
    return U @ ((U.conj().T @ H @ U) * L) @ U.conj().T


def _checked_loewner(L: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(L))
    if np.any(np.abs(L) < SINGULAR_TOL * scale) or scale == 0:
        raise SingularDifferential("Loewner matrix has (near-)zero entries")
    return L


def frechet_inverse_apply(f, A, H) -> np.ndarray:
    """Inverse of :func:`frechet_apply`: Hadamard division by ``L_f`` in ``A``'s eigenbasis."""
    U, L, H = _setup(f, A, H)
    L = _checked_loewner(L)
    return U @ ((U.conj().T @ H @ U) / L) @ U.conj().T


def frechet_trace_forms(f, A, probes, inverse: bool = False) -> np.ndarray:
    """``Re Tr(H* Df(A) H)`` for each probe ``H`` (or with ``Df(A)^{-1}`` when ``inverse``).

    One decomposition of ``A`` is shared by all probes.
    """
    w, U = pd_decompose(A)
    L = loewner_matrix(f, w)
    if inverse:
        L = 1.0 / _checked_loewner(L)
    out = np.empty(len(probes))
    for k, H in enumerate(probes):
        H = np.asarray(H, dtype=np.complex128)
        if H.shape != U.shape:
            raise DimensionMismatch(f"shapes {U.shape} and {H.shape} differ")
        M = U.conj().T @ H @ U
        out[k] = np.sum(np.abs(M) ** 2 * L)
    return out


def frechet_trace_form(f, A, H) -> float:
    """``Re Tr(H* Df(A)(H)) = sum_ij |(U* H U)_ij|^2 L_f[i, j]``."""
    return float(frechet_trace_forms(f, A, [H])[0])
