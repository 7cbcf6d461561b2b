"""Catalog of two- and three-variable scalar kernels and their lambda-integral forms.

======  =====  ===============================================  ========  ===========
id      arity  off-diagonal value                               sense     p range
======  =====  ===============================================  ========  ===========
G21     2      (t^(p+1) - s^(p+1)) / (t - s)                    concave   0 < p <= 1
F23     2      (t - s) / (t^(p+1) - s^(p+1))                    convex    0 < p <= 1
H25     2      (t^(1-p) - s^(1-p)) / (t - s)                    convex    0 <= p < 1
F33     3      G21(t1, t2) * t3^(1-p)                           concave   0 < p <= 1
F34     3      H25(t1, t2) * t3^(1+p)                           convex    0 < p < 1
F35     3      (t1 - t2) / (t1^p - t2^p) * t3^p                 concave   0 < p <= 1
LIEB    2      t1^p * t3^(1-p)                                  concave   0 < p <= 1
======  =====  ===============================================  ========  ===========

On the diagonal ``t1 == t2`` every kernel takes the limit of its
off-diagonal expression, e.g. ``G21(t, t) = (p+1) t^p``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArityMismatch, BadParameter, DomainViolation, NoIntegralForm
from .frechet import PowerFunction, divided_difference

KERNEL_IDS = ("G21", "F23", "H25", "F33", "F34", "F35", "LIEB")

# id -> (arity, sense, p_min, p_min_inclusive, p_max, p_max_inclusive)
_CATALOG = {
    "G21": (2, "concave", 0.0, False, 1.0, True),
    "F23": (2, "convex", 0.0, False, 1.0, True),
    "H25": (2, "convex", 0.0, True, 1.0, False),
    "F33": (3, "concave", 0.0, False, 1.0, True),
    "F34": (3, "convex", 0.0, False, 1.0, False),
    "F35": (3, "concave", 0.0, False, 1.0, True),
    "LIEB": (2, "concave", 0.0, False, 1.0, True),
}


def p_admissible(lo: float, lo_incl: bool, hi: float, hi_incl: bool, p: float) -> bool:
    above = p >= lo if lo_incl else p > lo
    below = p <= hi if hi_incl else p < hi
    return bool(np.isfinite(p) and above and below)


def p_range_text(lo, lo_incl, hi, hi_incl) -> str:
    return f"{lo:g} {'<=' if lo_incl else '<'} p {'<=' if hi_incl else '<'} {hi:g}"


@dataclass(frozen=True)
class ScalarKernel:
    """A catalog kernel at a fixed parameter ``p``; calling it evaluates elementwise."""

    id: str
    p: float

    def __post_init__(self):
        if self.id not in _CATALOG:
            raise BadParameter(f"unknown kernel {self.id!r}; expected one of {', '.join(KERNEL_IDS)}")
        _, _, *rng = _CATALOG[self.id]
        if not p_admissible(*rng, float(self.p)):
            raise BadParameter(f"{self.id} requires {p_range_text(*rng)}, got p = {self.p}")

    @property
    def arity(self) -> int:
        return _CATALOG[self.id][0]

    @property
    def sense(self) -> str:
        return _CATALOG[self.id][1]

    @property
    def has_integral(self) -> bool:
        return self.id in ("G21", "H25", "F33", "F34")

    def __call__(self, *args):
        if len(args) != self.arity:
            raise ArityMismatch(f"{self.id} takes {self.arity} arguments, got {len(args)}")
        args = [np.asarray(a, dtype=np.float64) for a in args]
        for a in args:
            if np.any(~(a > 0)):
                raise DomainViolation(f"{self.id} is defined for positive arguments only")
        p = self.p
        if self.id == "LIEB":
            t1, t3 = args
            return t1**p * t3 ** (1 - p)
        s, t = args[0], args[1]
        if self.id in ("G21", "F33"):
            out = divided_difference(PowerFunction(1 + p), s, t)
        elif self.id == "F23":
            out = 1.0 / divided_difference(PowerFunction(1 + p), s, t)
        elif self.id in ("H25", "F34"):
            out = divided_difference(PowerFunction(1 - p), s, t)
        else:  # F35
            out = 1.0 / divided_difference(PowerFunction(p), s, t)
        if self.arity == 3:
            out = out * args[2] ** {"F33": 1 - p, "F34": 1 + p, "F35": p}[self.id]
        return out


def kernel_eval(k: ScalarKernel, args: Sequence[float]) -> float:
    return float(k(*args))


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights on ``[0, 1]``; weights sum to one."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x, w = np.asarray(self.nodes), np.asarray(self.weights)
        if x.shape != w.shape or x.ndim != 1 or len(x) == 0:
            raise ValueError("nodes and weights must be equal-length vectors")
        if np.any(w <= 0) or abs(w.sum() - 1) > 1e-14:
            raise ValueError("weights must be positive and sum to 1")
        if np.any(x <= 0) or np.any(x >= 1) or np.any(np.diff(x) <= 0):
            raise ValueError("nodes must be ascending inside (0, 1)")

    def __len__(self):
        return len(self.nodes)


def gauss_legendre(n: int = 64) -> QuadratureRule:
    """Gauss-Legendre rule with ``n`` nodes mapped to ``[0, 1]``."""
    if n < 1:
        raise ValueError("need at least one node")
    x, w = np.polynomial.legendre.leggauss(n)
    w = w / 2
    # renormalize so the weights sum to one to the last bit
    return QuadratureRule((x + 1) / 2, w / w.sum())


def segment_mean(g, s: float, t: float, rule: QuadratureRule) -> float:
    """Quadrature value of ``int_0^1 g(lam*t + (1-lam)*s) dlam``.

    The nodes are placed geometrically between ``s`` and ``t``
    (``w = lo * (hi/lo)**v``), which keeps power-type integrands smooth
    however wide the ratio ``hi/lo`` is.
    """
    lo, hi = min(s, t), max(s, t)
    if lo == hi:
        return float(g(np.float64(lo)))
    log_ratio = np.log1p((hi - lo) / lo)
    w = lo * np.exp(log_ratio * rule.nodes)
    return float(log_ratio / (hi - lo) * np.sum(rule.weights * g(w) * w))


def kernel_integral(k: ScalarKernel, args: Sequence[float], rule: QuadratureRule | None = None) -> float:
    """Evaluate a kernel through its lambda-integral representation.

    ``G21(s, t)      = (p+1) int_0^1 (lam t + (1-lam) s)^p dlam``,
    ``H25(s, t)      = (1-p) int_0^1 (lam t + (1-lam) s)^(-p) dlam``,
    ``F33(t1,t2,t3)  = G21(t1, t2) t3^(1-p)`` and
    ``F34(t1,t2,t3)  = H25(t1, t2) t3^(1+p)``, each with the integral taken numerically.
    """
    if not k.has_integral:
        raise NoIntegralForm(f"{k.id} has no registered integral form")
    if len(args) != k.arity:
        raise ArityMismatch(f"{k.id} takes {k.arity} arguments, got {len(args)}")
    if any(not a > 0 for a in args):
        raise DomainViolation(f"{k.id} is defined for positive arguments only")
    rule = rule or gauss_legendre(64)
    p = k.p
    if k.id in ("G21", "F33"):
        val = (p + 1) * segment_mean(lambda u: u**p, args[0], args[1], rule)
    else:
        val = (1 - p) * segment_mean(lambda u: u ** (-p), args[0], args[1], rule)
    if k.id == "F33":
        val *= args[2] ** (1 - p)
    elif k.id == "F34":
        val *= args[2] ** (1 + p)
    return val
