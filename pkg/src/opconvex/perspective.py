"""Perspectives of operator maps and the nested three-variable construction.

The perspective of a map ``F`` of ``k`` positive definite arguments is

    P_F(A_1, ..., A_k, B) = B^(1/2) F(B^(-1/2) A_1 B^(-1/2), ..., B^(-1/2) A_k B^(-1/2)) B^(1/2).

Starting from ``F1(A) = (lam A^p + (1-lam) I)^(1/p)`` the chain

    F1 -> P_F1 -> G2 = P_F1^(1-p) -> F2 = (1/p) int_0^1 G2 dlam -> P_F2

produces a concave map of three arguments which on positive scalars equals
the kernel ``F35``.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import BadParameter, DimensionMismatch, DomainViolation, NonConvergence
from .kernels import QuadratureRule, gauss_legendre
from .matcore import assemble, hermitian, matrix_function, pd_decompose, spectral_decompose, symmetrize


def _check_p(p: float):
    if not 0 < p <= 1:
        raise BadParameter(f"p must satisfy 0 < p <= 1, got {p}")


def perspective_apply(F: Callable, As: Sequence, B) -> np.ndarray:
    """``P_F(A_1, ..., A_k, B)`` for positive definite inputs."""
    wB, UB = pd_decompose(B, "B")
    mats = [hermitian(A) for A in As]
    for i, A in enumerate(mats):
        if A.shape != UB.shape:
            raise DimensionMismatch(f"argument {i} has shape {A.shape}, expected {UB.shape}")
        pd_decompose(A, f"argument {i}")
    root = assemble(UB, np.sqrt(wB))
    iroot = assemble(UB, 1 / np.sqrt(wB))
    inner = [hermitian(iroot @ A @ iroot) for A in mats]
    return hermitian(root @ hermitian(F(*inner)) @ root)


def f1_map(A, lam: float, p: float) -> np.ndarray:
    """``(lam A^p + (1-lam) I)^(1/p)``."""
    _check_p(p)
    if not 0 <= lam <= 1:
        raise BadParameter(f"lam must lie in [0, 1], got {lam}")
    w, U = pd_decompose(A, "A")
    return assemble(U, (lam * w**p + (1 - lam)) ** (1 / p))


def _batched_power(P: np.ndarray, exponent: float) -> np.ndarray:
    P = symmetrize(P)
    try:
        e, Z = np.linalg.eigh(P)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    if np.any(e <= 0):
        raise DomainViolation("intermediate perspective lost positive definiteness")
    return (Z * (e**exponent)[:, None, :]) @ np.swapaxes(Z, -1, -2).conj()


def _positive_decompose(M, name):
    # intermediate matrices are positive definite by construction; only reject a numerical breakdown
    w, U = spectral_decompose(M, check=False)
    if not w[0] > 0:
        raise DomainViolation(f"{name} lost positive definiteness (lambda_min = {w[0]:.3g})")
    return w, U


def _f2_core(A, B, p, rule):
    wB, UB = _positive_decompose(B, "B")
    root = assemble(UB, np.sqrt(wB))
    iroot = assemble(UB, 1 / np.sqrt(wB))
    c, W = _positive_decompose(iroot @ A @ iroot, "B^-1/2 A B^-1/2")
    V = root @ W
    lam = rule.nodes[:, None]
    D = (lam * c[None, :] ** p + (1 - lam)) ** (1 / p)
    P = (V[None, :, :] * D[:, None, :]) @ V.conj().T
    G = _batched_power(P, 1 - p)
    return symmetrize(np.tensordot(rule.weights, G, axes=1) / p)


def f2_map(A, B, p: float, rule: QuadratureRule | None = None) -> np.ndarray:
    """``(1/p) sum_nu w_nu [P_F1(A, B; lam_nu)]^(1-p)``.

    All quadrature nodes share the decomposition of ``B^(-1/2) A B^(-1/2)``:
    in its eigenbasis ``F1`` is diagonal, so only the ``(1-p)`` power needs
    one (batched) eigendecomposition per node.
    """
    _check_p(p)
    rule = rule or gauss_legendre(64)
    A, B = hermitian(A), hermitian(B)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes {A.shape} and {B.shape} differ")
    pd_decompose(A, "A")
    pd_decompose(B, "B")
    return _f2_core(A, B, p, rule)


def pf2_apply(A, B, C, p: float, rule: QuadratureRule | None = None) -> np.ndarray:
    """Perspective of :func:`f2_map`: ``C^(1/2) F2(C^(-1/2) A C^(-1/2), C^(-1/2) B C^(-1/2)) C^(1/2)``."""
    _check_p(p)
    rule = rule or gauss_legendre(64)
    A, B, C = hermitian(A), hermitian(B), hermitian(C)
    if not A.shape == B.shape == C.shape:
        raise DimensionMismatch("A, B and C must share one dimension")
    pd_decompose(A, "A")
    pd_decompose(B, "B")
    wC, UC = pd_decompose(C, "C")
    root = assemble(UC, np.sqrt(wC))
    iroot = assemble(UC, 1 / np.sqrt(wC))
    inner = _f2_core(symmetrize(iroot @ A @ iroot), symmetrize(iroot @ B @ iroot), p, rule)
    return symmetrize(root @ inner @ root)


def power_map(exponent: float) -> Callable:
    """One-argument operator map ``X -> X**exponent`` (spectral)."""

    def F(X):
        return matrix_function(lambda t: t**exponent, X)

    return F
