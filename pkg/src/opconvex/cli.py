"""Command-line front end.

Subcommands::

    certify     randomized Loewner-order certification of one map
    crosscheck  one identity suite (QUAD, PF2-F35, FD-FRECHET, TRACE-IDENT)
    eval        evaluate a kernel on scalars or a map on JSON matrices
    suite       every positive map, every crosscheck and the negative control

Exit codes: 0 all checks passed, 1 a violation or deviation was found,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .certify import (
    CHECK_IDS,
    DEFAULT_EIG_RANGE,
    DEFAULT_LAMBDA_GRID,
    DEFAULT_TOL,
    MAPS,
    NEGATIVE_MAPS,
    POSITIVE_MAPS,
    STRESS_EIG_RANGE,
    STRESS_TOL,
    MapSpec,
    build_map,
    certify,
    crosscheck,
    map_info,
    p_is_admissible,
)
from .errors import BadParameter, OpConvexError
from .kernels import KERNEL_IDS, ScalarKernel, gauss_legendre, kernel_eval, kernel_integral
from .matcore import hermitian, matrix_from_json, matrix_to_json

DEFAULTS = {
    "trials": 200,
    "seed": 42,
    "tol": None,
    "lambda_grid": list(DEFAULT_LAMBDA_GRID),
    "quadrature_nodes": 64,
    "out": None,
    "emit_worst": False,
    "stress": False,
    "jobs": None,
    "probes": 8,
    "model": "shared",
    "dim": 2,
    "p": None,
    "dims": [2, 3, 5],
    "maps": list(POSITIVE_MAPS),
    "neg_trials": 500,
    "integral": False,
    "matrix": [],
}

SUITE_P_GRID = (0.25, 0.5, 0.75)
SUITE_ENDPOINTS = (0.0, 1.0)


class UsageError(Exception):
    pass


def _floats(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text) -> list:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise UsageError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _names(text) -> list:
    if isinstance(text, (list, tuple)):
        return [str(x) for x in text]
    return [x.strip() for x in str(text).split(",") if x.strip()]


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opconvex", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, help="run seed (default 42)")
        sp.add_argument("--out", help="write the JSON report here")
        sp.add_argument("--emit-worst", action="store_true", default=argparse.SUPPRESS)
        sp.add_argument("--config", help="JSON file with flag values; explicit flags win")
        sp.add_argument("--quadrature-nodes", type=int)

    def certifying(sp):
        sp.add_argument("--trials", type=int)
        sp.add_argument("--tol", type=float, help="relative tolerance (default 1e-8, 1e-6 with --stress)")
        sp.add_argument("--lambda-grid", help="comma-separated mixing weights")
        sp.add_argument("--stress", action="store_true", default=argparse.SUPPRESS)
        sp.add_argument("--jobs", type=int, help="worker processes (default: available CPUs)")
        sp.add_argument("--probes", type=int, help="random probes per trial for trace-form maps")
        sp.add_argument("--model", choices=["shared", "tensor"], help="commuting-tuple sampler")

    sp = sub.add_parser("certify", help="certify one map", argument_default=argparse.SUPPRESS)
    sp.add_argument("--map", dest="map_id", help=", ".join(MAPS))
    sp.add_argument("--p", type=float)
    sp.add_argument("--dim", type=int)
    common(sp)
    certifying(sp)

    sp = sub.add_parser("crosscheck", help="run an identity crosscheck", argument_default=argparse.SUPPRESS)
    sp.add_argument("--check", dest="check_id", help=", ".join(CHECK_IDS))
    sp.add_argument("--p", help="comma-separated p grid")
    sp.add_argument("--count", type=int, help="random cases per grid cell")
    sp.add_argument("--tol", type=float)
    common(sp)

    sp = sub.add_parser("eval", help="evaluate a kernel or a map", argument_default=argparse.SUPPRESS)
    sp.add_argument("--kernel", help=", ".join(KERNEL_IDS))
    sp.add_argument("--map", dest="map_id", help=", ".join(MAPS))
    sp.add_argument("--p", type=float)
    sp.add_argument("--args", help="comma-separated positive scalars for --kernel")
    sp.add_argument("--integral", action="store_true", help="use the quadrature form of the kernel")
    sp.add_argument("--matrix", action="append", help="JSON matrix file, once per map argument")
    sp.add_argument("--probes", type=int)
    common(sp)

    sp = sub.add_parser("suite", help="reproduce every claim", argument_default=argparse.SUPPRESS)
    sp.add_argument("--p", help="comma-separated p grid overriding the default")
    sp.add_argument("--dims", help="comma-separated dimensions (default 2,3,5)")
    sp.add_argument("--maps", help="comma-separated positive map ids (default all)")
    sp.add_argument("--neg-trials", type=int, help="trials for the negative control (default 500)")
    common(sp)
    certifying(sp)
    return parser


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def _settings(ns: argparse.Namespace) -> dict:
    given = vars(ns).copy()
    cfg = _load_config(given.pop("config")) if given.get("config") else {}
    cfg.pop("command", None)
    if "map" in cfg:
        cfg["map_id"] = cfg.pop("map")
    if "check" in cfg:
        cfg["check_id"] = cfg.pop("check")
    s = {**DEFAULTS, **cfg, **given}
    if s["stress"]:
        s["eig_range"] = STRESS_EIG_RANGE
        s["tol_value"] = STRESS_TOL if s["tol"] is None else float(s["tol"])
    else:
        s["eig_range"] = DEFAULT_EIG_RANGE
        s["tol_value"] = DEFAULT_TOL if s["tol"] is None else float(s["tol"])
    s["lambda_grid"] = _floats(s["lambda_grid"])
    s["jobs"] = int(s["jobs"]) if s["jobs"] else (os.cpu_count() or 1)
    return s


def _write(path, payload):
    if path:
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


def _summary(rep) -> str:
    if rep.kind == "crosscheck":
        status = "DEVIATION" if rep.violation else "PASS"
    else:
        status = "VIOLATION" if rep.violation else "PASS"
    where = f" p={rep.p:g}" if rep.p is not None else ""
    where += f" dim={rep.dim}" if rep.dim is not None else ""
    return (
        f"{status}  {rep.map_id}{where}  cases={rep.trials}  "
        f"worst_margin={rep.worst_margin:.3e}  tol={rep.tolerance:.1e}"
    )


def _cmd_certify(s) -> int:
    if not s.get("map_id"):
        raise UsageError("certify needs --map")
    spec = MapSpec(
        s["map_id"],
        s["p"],
        int(s["dim"]),
        probe_count=int(s["probes"]),
        model=s["model"],
        quadrature_nodes=int(s["quadrature_nodes"]),
    )
    rep = certify(
        spec,
        trials=int(s["trials"]),
        seed=int(s["seed"]),
        tol=s["tol_value"],
        lambda_grid=s["lambda_grid"],
        eig_range=s["eig_range"],
        jobs=s["jobs"],
        emit_worst=bool(s["emit_worst"]),
    )
    print(_summary(rep))
    _write(s["out"], rep.to_dict())
    return 1 if rep.violation else 0


def _crosscheck_params(check_id, s) -> dict:
    params = {}
    if check_id in ("QUAD", "PF2-F35"):
        params["nodes"] = int(s["quadrature_nodes"])
    if s.get("p") is not None:
        params["p_grid"] = tuple(_floats(s["p"]))
    if s.get("count") is not None:
        params["count"] = int(s["count"])
    return params


def _cmd_crosscheck(s) -> int:
    check_id = s.get("check_id")
    if not check_id:
        raise UsageError("crosscheck needs --check")
    rep = crosscheck(
        check_id,
        seed=int(s["seed"]),
        emit_worst=bool(s["emit_worst"]),
        tol=s["tol"],
        **_crosscheck_params(check_id, s),
    )
    print(_summary(rep))
    _write(s["out"], rep.to_dict())
    return 1 if rep.violation else 0


def _cmd_eval(s) -> int:
    if s.get("kernel"):
        if s.get("p") is None or s.get("args") is None:
            raise UsageError("eval --kernel needs --p and --args")
        k = ScalarKernel(s["kernel"], float(s["p"]))
        args = _floats(s["args"])
        if s["integral"]:
            value = kernel_integral(k, args, gauss_legendre(int(s["quadrature_nodes"])))
        else:
            value = kernel_eval(k, args)
        print(format(value, ".17g"))
        _write(s["out"], {"kernel": k.id, "p": k.p, "args": args, "value": value})
        return 0
    if s.get("map_id"):
        info = map_info(s["map_id"])
        paths = s["matrix"] or []
        if len(paths) != info.arity:
            raise UsageError(f"{info.map_id} takes {info.arity} --matrix arguments, got {len(paths)}")
        mats = []
        for path in paths:
            try:
                with open(path) as fh:
                    mats.append(hermitian(matrix_from_json(json.load(fh))))
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read matrix {path}: {exc}") from None
        spec = MapSpec(
            info.map_id,
            s["p"],
            mats[0].shape[0],
            probe_count=int(s["probes"]),
            quadrature_nodes=int(s["quadrature_nodes"]),
        )
        value = build_map(spec, seed=int(s["seed"]))(*mats)
        payload = matrix_to_json(value)
        print(json.dumps(payload))
        _write(s["out"], payload)
        return 0
    raise UsageError("eval needs --kernel or --map")


def strip_wall_times(obj):
    """Drop every ``wall_time*`` key, recursively; what remains is deterministic."""
    if isinstance(obj, dict):
        return {k: strip_wall_times(v) for k, v in obj.items() if not k.startswith("wall_time")}
    if isinstance(obj, list):
        return [strip_wall_times(v) for v in obj]
    return obj


def suite_p_values(map_id: str, p_grid=None) -> list:
    """Default p values for a map: 0.25, 0.5, 0.75 plus admissible endpoints."""
    if p_grid is not None:
        bad = [p for p in p_grid if not p_is_admissible(map_id, p)]
        if bad:
            raise BadParameter(f"p = {bad[0]} is not admissible for {map_id}; restrict --maps")
        return list(p_grid)
    return [p for p in SUITE_P_GRID + SUITE_ENDPOINTS if p_is_admissible(map_id, p)]


def run_suite(s) -> dict:
    """Build the aggregate suite report from merged settings."""
    start = time.perf_counter()
    maps = _names(s["maps"])
    for m in maps:
        if m not in POSITIVE_MAPS:
            raise BadParameter(f"{m!r} is not a positive map id")
    dims = _ints(s["dims"])
    p_grid = _floats(s["p"]) if s.get("p") is not None else None
    plan = [(m, p, d) for m in maps for p in suite_p_values(m, p_grid) for d in dims]
    trials, seed = int(s["trials"]), int(s["seed"])
    common = dict(
        trials=trials,
        seed=seed,
        tol=s["tol_value"],
        lambda_grid=s["lambda_grid"],
        eig_range=s["eig_range"],
        jobs=s["jobs"],
        emit_worst=bool(s["emit_worst"]),
    )
    certs = []
    for m, p, d in plan:
        spec = MapSpec(m, p, d, probe_count=int(s["probes"]), quadrature_nodes=int(s["quadrature_nodes"]))
        rep = certify(spec, **common)
        print(_summary(rep), flush=True)
        certs.append(rep)
    checks = []
    for cid in CHECK_IDS:
        params = {"nodes": int(s["quadrature_nodes"])} if cid in ("QUAD", "PF2-F35") else {}
        rep = crosscheck(cid, seed=seed, emit_worst=bool(s["emit_worst"]), **params)
        print(_summary(rep), flush=True)
        checks.append(rep)
    neg = []
    for m in NEGATIVE_MAPS:
        rep = certify(MapSpec(m, None, 2), **dict(common, trials=int(s["neg_trials"])))
        fired = rep.violation
        print(f"{'PASS' if fired else 'FAIL'}  negative control {m} dim=2 fired={fired}  "
              f"worst_margin={rep.worst_margin:.3e}", flush=True)
        neg.append(rep)
    passed = not any(r.violation for r in certs + checks) and all(r.violation for r in neg)
    return {
        "seed": seed,
        "trials": trials,
        "dims": dims,
        "lambda_grid": s["lambda_grid"],
        "tolerance": s["tol_value"],
        "eig_range": list(s["eig_range"]),
        "certifications": [r.to_dict() for r in certs],
        "crosschecks": [r.to_dict() for r in checks],
        "negative_controls": [r.to_dict() for r in neg],
        "passed": passed,
        "wall_time_ms": round((time.perf_counter() - start) * 1e3, 3),
    }


def _cmd_suite(s) -> int:
    report = run_suite(s)
    print("suite " + ("PASSED" if report["passed"] else "FAILED"))
    _write(s["out"], report)
    return 0 if report["passed"] else 1


def suite(config: dict) -> int:
    """Run the suite from a settings dict (same keys as the flags)."""
    ns = argparse.Namespace(**{k.replace("-", "_"): v for k, v in config.items()})
    try:
        return _cmd_suite(_settings(ns))
    except (OpConvexError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run(argv=None) -> int:
    try:
        ns = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    command = ns.command
    del ns.command
    try:
        s = _settings(ns)
        return {"certify": _cmd_certify, "crosscheck": _cmd_crosscheck, "eval": _cmd_eval, "suite": _cmd_suite}[
            command
        ](s)
    except (OpConvexError, UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())

