"""Randomized Loewner-order certification of concavity and convexity claims.

Each map id names an operator map together with the curvature it is
claimed to have.  A trial draws two input tuples ``X`` and ``Y`` and, for
every mixing weight ``lam`` on a grid, measures

    concave:  lambda_min( F(lam X + (1-lam) Y) - lam F(X) - (1-lam) F(Y) )
    convex:   lambda_min( lam F(X) + (1-lam) F(Y) - F(lam X + (1-lam) Y) )

A negative value beyond the tolerance is a violation.  Margins are reported
relative to ``1 + max ||F(.)||_2`` over the three values in the trial.
"""

from __future__ import annotations

import hashlib
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import BadParameter, UnknownCheck, UnknownMap
from .frechet import PowerFunction, frechet_apply, frechet_trace_form, frechet_trace_forms
from .funcalc import CommutingTuple, multivariate_apply, trace_form
from .kernels import (
    ScalarKernel,
    gauss_legendre,
    kernel_eval,
    kernel_integral,
    p_admissible,
    p_range_text,
)
from .matcore import (
    PdSamplerSpec,
    assemble,
    haar_unitary,
    hermitian,
    loewner_margin,
    matrix_from_json,
    matrix_function,
    matrix_to_json,
    random_complex,
    random_hermitian,
    random_pd,
)
from .perspective import pf2_apply

DEFAULT_LAMBDA_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)
DEFAULT_TOL = 1e-8
STRESS_TOL = 1e-6
DEFAULT_EIG_RANGE = (-2.0, 2.0)
STRESS_EIG_RANGE = (-4.0, 4.0)


@dataclass(frozen=True)
class MapInfo:
    map_id: str
    kind: str  # commuting | frechet | pf2 | lieb | power
    arity: int
    sense: str
    p_range: Optional[tuple]  # (lo, lo_inclusive, hi, hi_inclusive) or None when p is unused
    description: str


_OPEN_CLOSED = (0.0, False, 1.0, True)

MAPS = {
    m.map_id: m
    for m in [
        MapInfo("THM2.1", "commuting", 2, "concave", _OPEN_CLOSED, "G21(X1, X2) on commuting pairs"),
        MapInfo("COR2.3", "commuting", 2, "convex", _OPEN_CLOSED, "F23(X1, X2) on commuting pairs"),
        MapInfo("THM2.2", "frechet", 1, "concave", _OPEN_CLOSED, "A -> D[t^(1+p)](A), via trace forms"),
        MapInfo("COR2.4", "frechet", 1, "convex", _OPEN_CLOSED, "A -> D[t^(1+p)](A)^-1, via trace forms"),
        MapInfo("THM2.5", "frechet", 1, "convex", (0.0, True, 1.0, False), "A -> D[t^(1-p)](A), via trace forms"),
        MapInfo("THM3.3", "commuting", 3, "concave", _OPEN_CLOSED, "F33(X1, X2, X3) on commuting triples"),
        MapInfo("THM3.4", "commuting", 3, "convex", (0.0, False, 1.0, False), "F34(X1, X2, X3) on commuting triples"),
        MapInfo("THM3.5", "pf2", 3, "concave", _OPEN_CLOSED, "P_F2(A, B, C) on general triples"),
        MapInfo("LIEB", "lieb", 2, "concave", _OPEN_CLOSED, "(A, B) -> Tr K* A^p K B^(1-p)"),
        MapInfo("NEG_T4", "power", 1, "convex", None, "A -> A^4 (negative control)"),
    ]
}
POSITIVE_MAPS = tuple(m for m in MAPS if m != "NEG_T4")
NEGATIVE_MAPS = ("NEG_T4",)

_COMMUTING_KERNEL = {"THM2.1": "G21", "COR2.3": "F23", "THM3.3": "F33", "THM3.4": "F34"}


def map_info(map_id: str) -> MapInfo:
    try:
        return MAPS[map_id]
    except KeyError:
        raise UnknownMap(f"unknown map {map_id!r}; expected one of {', '.join(MAPS)}") from None


def p_is_admissible(map_id: str, p) -> bool:
    info = map_info(map_id)
    if info.p_range is None:
        return True
    return p is not None and p_admissible(*info.p_range, float(p))


@dataclass(frozen=True)
class MapSpec:
    """Which map to certify and at what size.

    ``model`` only matters for functional-calculus maps: ``"shared"`` draws
    every matrix of a trial from one random eigenbasis, ``"tensor"`` places
    independent ``dim x dim`` matrices on separate tensor factors
    (``A (x) I``, ``I (x) B``, ...), which commute without sharing a basis.
    """

    map_id: str
    p: Optional[float] = None
    dim: int = 2
    probe_count: int = 8
    model: str = "shared"
    quadrature_nodes: int = 64

    def __post_init__(self):
        info = map_info(self.map_id)
        if info.p_range is not None:
            if self.p is None or not p_admissible(*info.p_range, float(self.p)):
                raise BadParameter(f"{self.map_id} requires {p_range_text(*info.p_range)}, got p = {self.p}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise BadParameter(f"dim must be a positive integer, got {self.dim}")
        if self.probe_count < 1:
            raise BadParameter("probe_count must be positive")
        if self.model not in ("shared", "tensor"):
            raise BadParameter(f"unknown commuting model {self.model!r}")
        if self.model == "tensor" and info.kind != "commuting":
            raise BadParameter(f"the tensor model applies to functional-calculus maps, not {self.map_id}")
        if self.quadrature_nodes < 1:
            raise BadParameter("quadrature_nodes must be positive")

    @property
    def info(self) -> MapInfo:
        return map_info(self.map_id)


@dataclass
class OperatorMap:
    """A map from a tuple of positive definite matrices to a Hermitian matrix."""

    map_id: str
    arity: int
    sense: str
    fn: Callable
    aux: dict = field(default_factory=dict)

    def __call__(self, *mats) -> np.ndarray:
        return self.fn(*mats)


def _aux_for(spec: MapSpec, rng: np.random.Generator) -> dict:
    kind = spec.info.kind
    if kind == "frechet":
        return {"probes": [random_hermitian(rng, spec.dim) for _ in range(spec.probe_count)]}
    if kind == "lieb":
        K = random_complex(rng, spec.dim)
        return {"K": K / np.linalg.norm(K)}
    return {}


def build_map(spec: MapSpec, seed: int = 0, aux: Optional[dict] = None) -> OperatorMap:
    """Construct the operator map named by ``spec``.

    Trace-form maps draw their probes (or ``K`` for LIEB) from ``seed``
    unless ``aux`` supplies them.
    """
    info = spec.info
    p = spec.p
    if aux is None:
        aux = _aux_for(spec, np.random.default_rng(seed))

    if info.kind == "commuting":
        kernel = ScalarKernel(_COMMUTING_KERNEL[spec.map_id], p)

        def fn(*mats):
            return multivariate_apply(kernel, CommutingTuple(mats))

    elif info.kind == "frechet":
        f = PowerFunction(1 - p if spec.map_id == "THM2.5" else 1 + p)
        inverse = spec.map_id == "COR2.4"
        probes = aux["probes"]

        def fn(A):
            return np.diag(frechet_trace_forms(f, A, probes, inverse=inverse)).astype(np.complex128)

    elif info.kind == "pf2":
        rule = gauss_legendre(spec.quadrature_nodes)

        def fn(A, B, C):
            return pf2_apply(A, B, C, p, rule)

    elif info.kind == "lieb":
        kernel = ScalarKernel("LIEB", p)
        K = aux["K"]

        def fn(A, B):
            return np.array([[trace_form(kernel, A, B, K)]], dtype=np.complex128)

    else:
        quartic = PowerFunction(4.0)

        def fn(A):
            return matrix_function(quartic, A)

    return OperatorMap(spec.map_id, info.arity, info.sense, fn, aux)


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    lam: float
    margin: float
    scale: float
    digest: str

    @property
    def relative_margin(self) -> float:
        return self.margin / (1.0 + self.scale)


def input_digest(X: Sequence, Y: Sequence) -> str:
    h = hashlib.sha256()
    for M in list(X) + list(Y):
        h.update(np.ascontiguousarray(M, dtype=np.complex128).tobytes())
    return h.hexdigest()[:16]


def _opnorm(M: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(M)))) if M.size else 0.0


def concavity_trial(
    F: OperatorMap,
    sense: str,
    X: Sequence,
    Y: Sequence,
    lam: float,
    trial_index: int = 0,
    values: Optional[tuple] = None,
) -> TrialResult:
    """One Loewner-order check of ``F`` at weight ``lam``.

    ``values`` may carry precomputed ``(F(X), F(Y))``.  The margin is
    positive when the claimed inequality holds strictly.
    """
    if not 0 <= lam <= 1:
        raise BadParameter(f"lam must lie in [0, 1], got {lam}")
    if sense not in ("concave", "convex"):
        raise BadParameter(f"sense must be 'concave' or 'convex', got {sense!r}")
    FX, FY = values if values is not None else (F(*X), F(*Y))
    mixed = [lam * x + (1 - lam) * y for x, y in zip(X, Y)]
    Fmix = F(*mixed)
    combo = lam * FX + (1 - lam) * FY
    if sense == "concave":
        margin = loewner_margin(combo, Fmix)
    else:
        margin = loewner_margin(Fmix, combo)
    scale = max(_opnorm(FX), _opnorm(FY), _opnorm(Fmix))
    return TrialResult(trial_index, float(lam), margin, scale, input_digest(X, Y))


def _trial_seeds(seed: int, trial_index: int, count: int) -> list:
    ss = np.random.SeedSequence([int(seed), int(trial_index)])
    return [int(s) for s in ss.generate_state(count, dtype=np.uint64)]


def sample_inputs(spec: MapSpec, seed: int, trial_index: int, eig_range=DEFAULT_EIG_RANGE):
    """Draw the input tuples ``(X, Y)`` of one trial and the seed for the map's probes."""
    info = spec.info
    k, n = info.arity, spec.dim
    lo, hi = eig_range
    seeds = _trial_seeds(seed, trial_index, 2 + 2 * k)
    aux_seed = seeds[0]

    if info.kind == "commuting" and spec.model == "shared":
        rng = np.random.default_rng(seeds[1])
        U = haar_unitary(rng, n)
        X = tuple(assemble(U, 10.0 ** rng.uniform(lo, hi, n)) for _ in range(k))
        Y = tuple(assemble(U, 10.0 ** rng.uniform(lo, hi, n)) for _ in range(k))
        return X, Y, aux_seed

    draws = [random_pd(PdSamplerSpec(n, lo, hi, s)) for s in seeds[2:]]
    if info.kind == "commuting":
        eye = np.eye(n, dtype=np.complex128)

        def lift(M, m):
            out = np.ones((1, 1), dtype=np.complex128)
            for j in range(k):
                out = np.kron(out, M if j == m else eye)
            return out

        draws = [lift(M, i % k) for i, M in enumerate(draws)]
    return tuple(draws[:k]), tuple(draws[k:]), aux_seed


@dataclass
class CertificationReport:
    map_id: str
    p: Optional[float]
    dim: Optional[int]
    trials: int
    seed: int
    tolerance: float
    lambda_grid: list
    worst_margin: float
    violation: bool
    worst_case: Optional[dict]
    wall_time_ms: float
    sense: Optional[str] = None
    model: Optional[str] = None
    eig_range: Optional[list] = None
    kind: str = "certify"
    params: Optional[dict] = None

    def to_dict(self) -> dict:
        d = {
            "map_id": self.map_id,
            "p": self.p,
            "dim": self.dim,
            "trials": self.trials,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "lambda_grid": list(self.lambda_grid),
            "worst_margin": self.worst_margin,
            "violation": self.violation,
            "worst_case": self.worst_case,
            "wall_time_ms": self.wall_time_ms,
            "kind": self.kind,
        }
        if self.kind == "certify":
            d.update(sense=self.sense, model=self.model, eig_range=self.eig_range)
        else:
            d["params"] = self.params
        return d


def _run_trials(spec: MapSpec, seed: int, indices: Sequence[int], lambda_grid, eig_range):
    """Worst ``(relative_margin, trial_index, lambda_position)`` over a block of trials."""
    best = None
    for i in indices:
        X, Y, aux_seed = sample_inputs(spec, seed, i, eig_range)
        F = build_map(spec, aux_seed)
        values = (F(*X), F(*Y))
        for j, lam in enumerate(lambda_grid):
            r = concavity_trial(F, F.sense, X, Y, lam, trial_index=i, values=values)
            key = (r.relative_margin, i, j)
            if best is None or key < best:
                best = key
    return best


def _run_block(args):
    return _run_trials(*args)


def _serialize_case(spec: MapSpec, seed: int, trial_index: int, lam: float, eig_range) -> dict:
    X, Y, aux_seed = sample_inputs(spec, seed, trial_index, eig_range)
    F = build_map(spec, aux_seed)
    r = concavity_trial(F, F.sense, X, Y, lam, trial_index=trial_index)
    case = {
        "X": [matrix_to_json(M) for M in X],
        "Y": [matrix_to_json(M) for M in Y],
        "lambda": lam,
        "trial_index": trial_index,
        "margin": r.margin,
        "relative_margin": r.relative_margin,
        "digest": r.digest,
    }
    if "probes" in F.aux:
        case["probes"] = [matrix_to_json(H) for H in F.aux["probes"]]
    if "K" in F.aux:
        case["K"] = matrix_to_json(F.aux["K"])
    return case


def certify(
    spec: MapSpec,
    trials: int = 200,
    seed: int = 42,
    tol: float = DEFAULT_TOL,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    eig_range=DEFAULT_EIG_RANGE,
    jobs: int = 1,
    emit_worst: bool = False,
) -> CertificationReport:
    """Run ``trials x len(lambda_grid)`` concavity trials and report the worst margin.

    Trial ``i`` draws its inputs from ``(seed, i)`` only, so the report does
    not depend on ``jobs``.  Ties for the worst case go to the lowest trial
    index.
    """
    if trials < 1:
        raise BadParameter("trials must be at least 1")
    if not tol > 0:
        raise BadParameter("tol must be positive")
    lambda_grid = [float(x) for x in lambda_grid]
    if not lambda_grid or any(not 0 <= x <= 1 for x in lambda_grid):
        raise BadParameter("lambda_grid must be a non-empty list of values in [0, 1]")
    lo, hi = eig_range
    if not lo <= hi:
        raise BadParameter("empty eigenvalue range")
    start = time.perf_counter()
    indices = list(range(trials))
    if jobs > 1 and trials > 1:
        blocks = [indices[b::jobs] for b in range(jobs) if indices[b::jobs]]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_block, [(spec, seed, blk, lambda_grid, eig_range) for blk in blocks]))
        worst = min(results)
    else:
        worst = _run_trials(spec, seed, indices, lambda_grid, eig_range)
    worst_margin, worst_trial, worst_j = worst
    violation = bool(worst_margin < -tol)
    worst_case = None
    if violation or emit_worst:
        worst_case = _serialize_case(spec, seed, worst_trial, lambda_grid[worst_j], eig_range)
    return CertificationReport(
        map_id=spec.map_id,
        p=spec.p,
        dim=spec.dim,
        trials=trials,
        seed=seed,
        tolerance=tol,
        lambda_grid=lambda_grid,
        worst_margin=float(worst_margin),
        violation=violation,
        worst_case=worst_case,
        wall_time_ms=round((time.perf_counter() - start) * 1e3, 3),
        sense=spec.info.sense,
        model=spec.model,
        eig_range=[float(lo), float(hi)],
    )


def replay_worst_case(spec: MapSpec, worst_case: dict) -> TrialResult:
    """Re-evaluate a serialized worst case without the seed."""
    X = tuple(hermitian(matrix_from_json(m)) for m in worst_case["X"])
    Y = tuple(hermitian(matrix_from_json(m)) for m in worst_case["Y"])
    aux = {}
    if "probes" in worst_case:
        aux["probes"] = [matrix_from_json(m) for m in worst_case["probes"]]
    if "K" in worst_case:
        aux["K"] = matrix_from_json(worst_case["K"])
    F = build_map(spec, aux=aux)
    return concavity_trial(F, F.sense, X, Y, float(worst_case["lambda"]), worst_case.get("trial_index", 0))


# ---------------------------------------------------------------------------
# identity crosschecks

CHECK_IDS = ("QUAD", "PF2-F35", "FD-FRECHET", "TRACE-IDENT")
DEFAULT_P_GRID = (0.25, 0.5, 0.75, 1.0)


def _quad_cases(params, rng):
    kernels = params.get("kernels", ("G21", "H25", "F33", "F34"))
    p_grid = params.get("p_grid", (0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0))
    count = params.get("count", 200)
    rule = gauss_legendre(params.get("nodes", 64))
    lo, hi = params.get("log10_range", (-2.0, 2.0))
    # spot value with a closed form: (4^(3/2) - 1)/(4 - 1) = 7/3
    k = ScalarKernel("G21", 0.5)
    yield {"kernel": "G21", "p": 0.5, "args": [1.0, 4.0]}, kernel_integral(k, (1.0, 4.0), rule), 7 / 3
    for kid in kernels:
        for p in p_grid:
            try:
                k = ScalarKernel(kid, p)
            except BadParameter:
                continue
            for _ in range(count):
                args = tuple(float(a) for a in 10.0 ** rng.uniform(lo, hi, k.arity))
                yield {"kernel": kid, "p": p, "args": list(args)}, kernel_integral(k, args, rule), kernel_eval(k, args)


def _pf2_cases(params, rng):
    p_grid = params.get("p_grid", DEFAULT_P_GRID)
    rule = gauss_legendre(params.get("nodes", 64))
    pts = np.logspace(*params.get("log10_range", (-1.0, 1.0)), params.get("points", 5))
    yield {"p": 0.5, "args": [4.0, 1.0, 1.0]}, pf2_apply(4.0, 1.0, 1.0, 0.5, rule)[0, 0].real, 3.0
    for p in p_grid:
        k = ScalarKernel("F35", p)
        for t1 in pts:
            for t2 in pts:
                for t3 in pts:
                    args = (float(t1), float(t2), float(t3))
                    got = pf2_apply(t1, t2, t3, p, rule)[0, 0].real
                    yield {"p": p, "args": list(args)}, got, kernel_eval(k, args)


def _fd_cases(params, rng):
    exponents = params.get("exponents", (1.5, 0.5, 2.0))
    dims = params.get("dims", (2, 3, 5))
    count = params.get("count", 50)
    eps = params.get("eps", 1e-5)
    lo, hi = params.get("log10_range", (-1.0, 1.0))
    for a in exponents:
        f = PowerFunction(a)
        for n in dims:
            for _ in range(count):
                A = random_pd(PdSamplerSpec(n, lo, hi, int(rng.integers(2**63))))
                H = random_hermitian(rng, n)
                fd = (matrix_function(f, A + eps * H) - matrix_function(f, A - eps * H)) / (2 * eps)
                D = frechet_apply(f, A, H)
                dev = np.linalg.norm(fd - D) / (1 + np.linalg.norm(D))
                yield {"exponent": a, "dim": n, "A": matrix_to_json(A), "H": matrix_to_json(H)}, dev


def _trace_cases(params, rng):
    p_grid = params.get("p_grid", DEFAULT_P_GRID)
    dims = params.get("dims", (2, 3, 5))
    count = params.get("count", 100)
    lo, hi = params.get("log10_range", (-2.0, 2.0))
    for p in p_grid:
        f = PowerFunction(1 + p)
        G = ScalarKernel("G21", p)
        for c in range(count):
            n = dims[c % len(dims)]
            A = random_pd(PdSamplerSpec(n, lo, hi, int(rng.integers(2**63))))
            H = random_complex(rng, n)
            H /= np.linalg.norm(H)
            yield {"p": p, "dim": n, "A": matrix_to_json(A), "H": matrix_to_json(H)}, frechet_trace_form(
                f, A, H
            ), trace_form(G, A, A, H)


_CHECK_TOL = {"QUAD": 1e-9, "PF2-F35": 1e-8, "FD-FRECHET": 1e-5, "TRACE-IDENT": 1e-10}


def crosscheck(check_id: str, seed: int = 42, emit_worst: bool = False, tol: Optional[float] = None, **params):
    """Run one identity suite and report the worst deviation.

    The deviation of a case is ``|got - expected| / (1 + |expected|)``
    (Frobenius norms for ``FD-FRECHET``); the report's ``worst_margin`` is
    its negative, so ``violation`` means a deviation above tolerance.
    """
    if check_id not in CHECK_IDS:
        raise UnknownCheck(f"unknown check {check_id!r}; expected one of {', '.join(CHECK_IDS)}")
    tol = _CHECK_TOL[check_id] if tol is None else tol
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    gen = {"QUAD": _quad_cases, "PF2-F35": _pf2_cases, "FD-FRECHET": _fd_cases, "TRACE-IDENT": _trace_cases}[
        check_id
    ](params, rng)
    worst, worst_case, cases = -1.0, None, 0
    for item in gen:
        if check_id == "FD-FRECHET":
            case, dev = item
            case = dict(case, deviation=float(dev))
        else:
            case, got, want = item
            dev = abs(got - want) / (1 + abs(want))
            case = dict(case, got=float(got), expected=float(want), deviation=float(dev))
        cases += 1
        if dev > worst:
            worst, worst_case = float(dev), case
    violation = bool(worst > tol)
    return CertificationReport(
        map_id=check_id,
        p=None,
        dim=None,
        trials=cases,
        seed=seed,
        tolerance=tol,
        lambda_grid=[],
        worst_margin=-worst,
        violation=violation,
        worst_case=worst_case if (violation or emit_worst) else None,
        wall_time_ms=round((time.perf_counter() - start) * 1e3, 3),
        kind="crosscheck",
        params={k: list(v) if isinstance(v, tuple) else v for k, v in params.items()},
    )
