"""Command-line front end.

    djopt analyze FILE         critical cone, CQ flags, necessary and sufficient checks
    djopt cones FILE           tangent / normal cones of the set at --at in --direction
    djopt oracle FILE          sampling cross-checks against the closed forms
    djopt verify-witness FILE REPORT   re-check the witnesses of an analyze report

Exit codes: 0 completed, 2 a necessary condition is violated, 3 invalid
input, 4 an oracle disagreement or a witness that does not re-check.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import jsonschema
import numpy as np

from . import __version__
from .cones import (
    DirectionalContext,
    EmptyCone,
    clarke_directional_normal_cone,
    directional_limiting_normal_cone,
    directional_proximal_normal_cone,
    directional_regular_tangent_cone,
    second_order_tangent_set,
)
from .encodings import EncodingError, EncodingSpec, build
from .expr import DomainError, ExprSyntaxError
from .numeric_core import DEFAULT_TOL, DimensionMismatch, ScaleCapExceeded, Tolerance
from .optimality import (
    ProblemPoint,
    copositivity_test,
    critical_cone,
    find_descent,
    necessary_check,
    sufficient_check,
)
from .polyhedra import ConvexPolyhedron, PointNotInSet, PolyhedralCone, PolyhedralSet, contains, tangent_cone
from .supports import ExtReal

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VIOLATED, EXIT_INPUT, EXIT_DISAGREE = 0, 2, 3, 4

_MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
_VECTOR = {"type": "array", "items": {"type": "number"}}

PIECES_SCHEMA = {
    "type": "object",
    "required": ["dim", "pieces"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "pieces": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {"A": _MATRIX, "b": _VECTOR, "E": _MATRIX, "f": _VECTOR},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

ENCODING_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["mpcc", "switching", "vanishing", "cardinality", "box", "custom"]},
        "pairs": {"type": "integer", "minimum": 1},
        "dim": {"type": "integer", "minimum": 1},
        "max_nonzeros": {"type": "integer", "minimum": 0},
        "lower": {"type": "array", "items": {"type": ["number", "null"]}},
        "upper": {"type": "array", "items": {"type": ["number", "null"]}},
        "pieces": {"type": "array"},
    },
    "additionalProperties": False,
}

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["set"],
    "properties": {
        "vars": {"type": "integer", "minimum": 1},
        "objective": {"type": "string"},
        "constraints": {"type": "array", "items": {"type": "string"}},
        "set": {"oneOf": [PIECES_SCHEMA, ENCODING_SCHEMA]},
        "point": _VECTOR,
        "options": {
            "type": "object",
            "properties": {
                "eps_feas": {"type": "number", "exclusiveMinimum": 0},
                "eps_zero": {"type": "number", "exclusiveMinimum": 0},
                "eps_opt": {"type": "number", "exclusiveMinimum": 0},
                "kappa": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer"},
                "depth": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


class InputError(Exception):
    pass


# --- JSON helpers ----------------------------------------------------------------


def tagged(value, provenance: str):
    """A number together with where it came from: FORMULA, LP or ESTIMATE."""
    return {"value": _num(value), "provenance": provenance}


def _num(v):
    if v is None:
        return None
    if isinstance(v, ExtReal):
        return v.to_json()
    v = float(v) + 0.0
    if math.isinf(v):
        return "+inf" if v > 0 else "-inf"
    return v


def _vec(v) -> list[float]:
    return [float(t) + 0.0 for t in np.asarray(v, dtype=float)]


def _mat(M) -> list[list[float]]:
    return [_vec(r) for r in np.asarray(M, dtype=float)]


def cone_json(K) -> dict:
    if isinstance(K, EmptyCone):
        return {"empty": True, "dim": K.dim}
    pieces = []
    for p in K.pieces:
        g = p.generators
        pieces.append({"A": _mat(p.A), "E": _mat(p.E), "rays": _mat(g.rays), "lines": _mat(g.lines)})
    return {"empty": False, "dim": K.dim, "pieces": pieces}


# --- input ---------------------------------------------------------------------------


@dataclass
class Settings:
    tol: Tolerance
    seed: int
    kappa: float | None
    depth: int


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno} "
                         f"(offset {exc.pos}): {exc.msg}") from exc


def load_document(path: str) -> dict:
    data = _read_json(path)
    try:
        jsonschema.validate(data, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "(root)"
        raise InputError(f"{path}: schema error at {where}: {exc.message}") from exc
    return data


def load_set(data: dict) -> PolyhedralSet:
    spec = data["set"]
    try:
        if "kind" in spec:
            return build(EncodingSpec.from_json(spec))
        return PolyhedralSet.from_json(spec)
    except (EncodingError, ValueError, DimensionMismatch) as exc:
        raise InputError(f"invalid set: {exc}") from exc


def settings_from(args, data: dict) -> Settings:
    opts = data.get("options", {})
    eps_feas = opts.get("eps_feas", DEFAULT_TOL.eps_feas)
    eps_zero = opts.get("eps_zero", DEFAULT_TOL.eps_zero)
    eps_opt = opts.get("eps_opt", DEFAULT_TOL.eps_opt)
    if args.tol is not None:
        eps_feas = eps_opt = args.tol
        eps_zero = min(eps_zero, args.tol / 100)
    try:
        tol = Tolerance(eps_feas, eps_zero, eps_opt)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    seed = args.seed if args.seed is not None else opts.get("seed", 0x5EED)
    kappa = args.kappa if args.kappa is not None else opts.get("kappa")
    depth = args.depth if args.depth is not None else opts.get("depth", 12)
    return Settings(tol, seed, kappa, depth)


def load_problem(data: dict, st: Settings) -> ProblemPoint:
    for key in ("objective", "point"):
        if key not in data:
            raise InputError(f"problem file needs '{key}'")
    D = load_set(data)
    point = data["point"]
    if "vars" in data and data["vars"] != len(point):
        raise InputError(f"'vars' is {data['vars']} but the point has {len(point)} coordinates")
    constraints = data.get("constraints", [])
    if constraints and len(constraints) != D.dim:
        raise InputError(f"{len(constraints)} constraints but the set lives in R^{D.dim}")
    try:
        return ProblemPoint(data["objective"], constraints, D, point, st.kappa, st.tol)
    except ExprSyntaxError as exc:
        raise InputError(f"expression error: {exc}") from exc
    except (DomainError, DimensionMismatch) as exc:
        raise InputError(f"cannot evaluate the problem at the point: {exc}") from exc
    except PointNotInSet as exc:
        raise InputError(f"g(x̄) is not in D (max-norm distance {exc.distance:.3g})") from exc


def _parse_point(text: str | None, dim: int, what: str) -> np.ndarray | None:
    if text is None:
        return None
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}") from exc
    if v.shape[0] != dim:
        raise InputError(f"{what}: expected {dim} coordinates, got {v.shape[0]}")
    return v


# --- analyze ---------------------------------------------------------------------------


def analyze(pp: ProblemPoint, st: Settings, dump_cones: bool = False) -> dict:
    from .systems import DirectionalSystem, generalized_nondegeneracy_check, kappa_oracle, nondegeneracy_check

    cc = critical_cone(pp)
    report: dict = {
        "schema_version": SCHEMA_VERSION,
        "command": "analyze",
        "point": _vec(pp.xbar),
        "objective_value": tagged(pp.f_value, "FORMULA"),
        "gradient": _vec(pp.grad_f),
        "critical_cone": cone_json(cc.pieces),
        "directions": [],
    }
    violated = False
    for piece in cc.refinement:
        if piece.trivial:
            continue
        u = piece.direction / np.max(np.abs(piece.direction))
        ds = DirectionalSystem(pp.system, u, st.tol)
        entry: dict = {
            "direction": _vec(u),
            "signs": list(piece.signs),
            "foscms": ds.foscms.holds,
            "nondegeneracy": nondegeneracy_check(ds).holds,
            "generalized_nondegeneracy": generalized_nondegeneracy_check(ds).holds,
            "mscq_status": ds.mscq_status,
        }
        if not ds.foscms.holds and ds.foscms.witness is not None:
            entry["foscms_witness"] = _vec(ds.foscms.witness)
        try:
            k = kappa_oracle(ds)
            entry["kappa_estimate"] = tagged(k.value, k.provenance)
            entry["kappa_valid"] = k.valid
        except ScaleCapExceeded as exc:
            entry["kappa_estimate"] = None
            entry["kappa_note"] = str(exc)
        necessary = {}
        for mode in ("M", "S"):
            r = necessary_check(pp, u, mode, st.kappa)
            js = r.to_json()
            if r.value is not None:
                js["value"] = tagged(r.value, "LP")
            necessary[mode] = js
            if r.verdict == "Violated" and not r.conditional:
                violated = True
        entry["necessary"] = necessary
        if dump_cones:
            entry["second_tangent"] = cone_json(ds.second_tangent)
            entry["normal"] = cone_json(ds.normal)
            entry["regular_normal"] = cone_json(ds.regular_normal)
        report["directions"].append(entry)
    suff = sufficient_check(pp, st.depth)
    sj = suff.to_json()
    if suff.margin is not None:
        sj["margin"] = tagged(suff.margin, "FORMULA")
    report["sufficient"] = sj
    if dump_cones:
        report["tangent_D"] = cone_json(tangent_cone(pp.D, pp.g_map.value, st.tol))
    report["verdict"] = "Violated" if violated else ("Proven" if suff.verdict == "Proven" else "Inconclusive")
    report["exit_code"] = EXIT_VIOLATED if violated else EXIT_OK
    return report


def _summary_analyze(rep: dict) -> str:
    lines = [f"point {rep['point']}  f = {rep['objective_value']['value']}"]
    for d in rep["directions"]:
        m, s = d["necessary"]["M"], d["necessary"]["S"]
        lines.append(f"  u = {d['direction']}: necessary M {m['verdict']}, S {s['verdict']}; {d['mscq_status']}")
    lines.append(f"sufficient: {rep['sufficient']['verdict']}")
    lines.append(f"overall: {rep['verdict']}")
    return "\n".join(lines)


# --- cones ---------------------------------------------------------------------------


def cones_report(S: PolyhedralSet, z: np.ndarray, w: np.ndarray, tol: Tolerance) -> dict:
    if not contains(S, z, tol):
        from .polyhedra import distance_inf

        raise PointNotInSet("point is not in the set", distance_inf(S, z, tol))
    ctx = DirectionalContext(S, z, w)
    T = tangent_cone(S, z, tol)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "cones",
        "at": _vec(z),
        "direction": _vec(w),
        "direction_is_tangent": bool(contains(T, w, tol)),
        "tangent": cone_json(T),
        "second_order_tangent": cone_json(second_order_tangent_set(ctx, tol)),
        "proximal_normal": cone_json(directional_proximal_normal_cone(ctx, tol)),
        "limiting_normal": cone_json(directional_limiting_normal_cone(ctx, tol)),
        "clarke_normal": cone_json(clarke_directional_normal_cone(ctx, tol)),
        "regular_tangent": cone_json(directional_regular_tangent_cone(ctx, tol)),
        "provenance": "FORMULA",
    }


def _summary_cones(rep: dict) -> str:
    out = [f"at {rep['at']} direction {rep['direction']} (tangent: {rep['direction_is_tangent']})"]
    for key in ("tangent", "second_order_tangent", "proximal_normal", "limiting_normal",
                "clarke_normal", "regular_tangent"):
        K = rep[key]
        if K["empty"]:
            out.append(f"  {key}: empty")
            continue
        parts = [f"rays {p['rays']} lines {p['lines']}" for p in K["pieces"]]
        out.append(f"  {key}: " + " | ".join(parts))
    return "\n".join(out)


# --- oracle cross-checks ------------------------------------------------------------------


ORACLE_CHECKS = ("tangent", "second", "normal", "d2", "gamma")


def _corrupt(K: PolyhedralCone) -> PolyhedralCone:
    """Negative control: flip every row, which changes any nontrivial cone."""
    pieces = [ConvexPolyhedron.cone(-p.A if p.A.shape[0] else np.eye(p.dim)[:1], p.E, p.dim) for p in K.pieces]
    return PolyhedralCone(pieces, K.dim)


def oracle_report(S: PolyhedralSet, z: np.ndarray, checks, seed: int, tol: Tolerance,
                  corrupt: bool = False, pp: ProblemPoint | None = None, probes: int = 24) -> dict:
    from .oracles import (
        ConstraintSet,
        SamplerConfig,
        d2_indicator_oracle,
        normal_limit_oracle,
        second_order_tangent_oracle,
        tangent_membership_oracle,
    )
    from .supports import second_subderivative_indicator

    cfg = SamplerConfig(seed=seed)
    rng = np.random.default_rng([seed, 99])
    n = S.dim
    T = tangent_cone(S, z, tol)
    T_used = _corrupt(T) if corrupt else T
    gens = np.vstack([g for p in T.pieces for g in (p.generators.rays, p.generators.lines, -p.generators.lines)])
    directions = [np.zeros(n)] + list(gens) + [rng.integers(-2, 3, n).astype(float) for _ in range(probes)]
    results: dict = {}
    disagreements = []

    if "tangent" in checks:
        agree = 0
        for w in directions:
            a = tangent_membership_oracle(S, z, w, cfg)
            b = contains(T_used, w, tol)
            if a == b:
                agree += 1
            else:
                disagreements.append({"check": "tangent", "w": _vec(w), "oracle": a, "formula": bool(b)})
        results["tangent"] = {"probes": len(directions), "agree": agree}
    tangent_dirs = [w for w in directions if contains(T, w, tol)]
    if "second" in checks:
        agree = total = 0
        for w in tangent_dirs[: probes // 2 + 1]:
            T2 = tangent_cone(T_used, w, tol) if contains(T_used, w, tol) else EmptyCone(n)
            for _ in range(4):
                s = rng.integers(-2, 3, n).astype(float)
                total += 1
                a = second_order_tangent_oracle(S, z, w, s, cfg)
                b = T2.contains(s, tol)
                if a == b:
                    agree += 1
                else:
                    disagreements.append({"check": "second", "w": _vec(w), "s": _vec(s), "oracle": a, "formula": bool(b)})
        results["second"] = {"probes": total, "agree": agree}
    if "normal" in checks:
        from .cones import limiting_normal_cone

        agree = total = 0
        for w in tangent_dirs[:4]:
            N = limiting_normal_cone(T_used, w, tol) if contains(T_used, w, tol) else EmptyCone(n)
            for v in normal_limit_oracle(S, z, w, cfg, tol):
                total += 1
                if N.contains(v, tol):
                    agree += 1
                else:
                    disagreements.append({"check": "normal", "w": _vec(w), "candidate": _vec(v)})
        results["normal"] = {"probes": total, "agree": agree}
    if "d2" in checks:
        agree = total = 0
        for w in tangent_dirs[:6]:
            for _ in range(3):
                zs = rng.integers(-2, 3, n).astype(float)
                exact = second_subderivative_indicator(DirectionalContext(S, z, w), zs, tol)
                band = d2_indicator_oracle(S, z, zs, w, cfg, tol)
                total += 1
                if band.contains(exact):
                    agree += 1
                else:
                    disagreements.append({"check": "d2", "w": _vec(w), "zstar": _vec(zs),
                                          "exact": exact.to_json(), "band": [band.lo.to_json(), band.hi.to_json()]})
        results["d2"] = {"probes": total, "agree": agree}
    if "gamma" in checks and pp is not None:
        from .systems import DirectionNotLinearized, DirectionalSystem, second_order_tangent_gamma

        Gamma = ConstraintSet(pp.constraints, pp.D)
        agree = total = 0
        for piece in critical_cone(pp).refinement[:4]:
            if piece.trivial:
                continue
            u = piece.direction / np.max(np.abs(piece.direction))
            try:
                ds = DirectionalSystem(pp.system, u, tol)
            except DirectionNotLinearized:
                continue
            if not ds.foscms.holds:
                continue
            T2G = second_order_tangent_gamma(ds)
            for _ in range(4):
                s = rng.integers(-2, 3, pp.n).astype(float)
                total += 1
                a = second_order_tangent_oracle(Gamma, pp.xbar, u, s, cfg)
                b = T2G.contains(s, tol)
                if a == b:
                    agree += 1
                else:
                    disagreements.append({"check": "gamma", "u": _vec(u), "s": _vec(s), "oracle": a, "formula": bool(b)})
        results["gamma"] = {"probes": total, "agree": agree}
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "oracle",
        "at": _vec(z),
        "seed": seed,
        "corrupted_cache": corrupt,
        "checks": results,
        "disagreements": disagreements,
        "provenance": "ESTIMATE",
        "exit_code": EXIT_DISAGREE if disagreements else EXIT_OK,
    }


def _summary_oracle(rep: dict) -> str:
    lines = [f"oracle cross-checks at {rep['at']} (seed {rep['seed']})"]
    for name, r in rep["checks"].items():
        lines.append(f"  {name}: {r['agree']}/{r['probes']} agree")
    lines.append("all agree" if not rep["disagreements"] else f"{len(rep['disagreements'])} disagreement(s)")
    return "\n".join(lines)


# --- verify-witness ------------------------------------------------------------------------


def verify_witnesses(pp: ProblemPoint, report: dict, st: Settings) -> dict:
    checked = []
    for d in report.get("directions", []):
        for mode, r in d.get("necessary", {}).items():
            if r.get("verdict") != "Violated":
                continue
            u = np.array(r["witness"], dtype=float)
            item = {"kind": "necessary", "mode": mode, "witness": _vec(u)}
            try:
                again = necessary_check(pp, u, mode, st.kappa)
                ok = again.verdict == "Violated"
                reported = r.get("value", {})
                reported = reported.get("value") if isinstance(reported, dict) else reported
                if ok and again.value is not None and isinstance(reported, (int, float)):
                    ok = abs(again.value - reported) <= 1e-6 * max(1.0, abs(reported))
                descent = find_descent(pp, 1e-2, u, seed=st.seed)
                item["descent_point"] = None if descent is None else _vec(descent)
            except ValueError as exc:
                ok = False
                item["error"] = str(exc)
            item["verified"] = ok
            checked.append(item)
    suff = report.get("sufficient", {})
    for idx, r in enumerate(suff.get("pieces", [])):
        if r.get("verdict") != "Proven":
            continue
        lam = np.array(r.get("multiplier", []), dtype=float)
        alpha = float(r.get("alpha", 1.0))
        item = {"kind": "sufficient", "piece": idx, "alpha": alpha, "multiplier": _vec(lam)}
        stationary = np.max(np.abs(alpha * pp.grad_f + pp.jacobian.T @ lam), initial=0.0) <= 1e-7
        piece = next((p for p in critical_cone(pp).refinement if list(p.signs) == r["certificates"]["signs"]), None)
        ok = stationary and piece is not None and piece.admissible_normal.contains(lam, st.tol)
        if ok:
            res = copositivity_test(pp.lagrangian_hessian(alpha, lam), piece.cone, st.depth, st.tol)
            ok = res.status == "Proven"
        item["verified"] = bool(ok)
        checked.append(item)
    all_ok = all(c["verified"] for c in checked)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "verify-witness",
        "witnesses": checked,
        "all_verified": all_ok,
        "exit_code": EXIT_OK if all_ok else EXIT_DISAGREE,
    }


def _summary_verify(rep: dict) -> str:
    lines = [f"{len(rep['witnesses'])} witness(es) checked"]
    for w in rep["witnesses"]:
        lines.append(f"  {w['kind']}: {'ok' if w['verified'] else 'FAILED'}")
    return "\n".join(lines)


# --- entry point --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the JSON report on stdout")
    common.add_argument("--seed", type=int, default=None, help="sampling seed (default 0x5EED)")
    common.add_argument("--tol", type=float, default=None,
                        help=f"feasibility/optimality tolerance (default {DEFAULT_TOL.eps_feas:g})")
    common.add_argument("--kappa", type=float, default=None, help="subregularity modulus for multiplier clipping")
    common.add_argument("--depth", type=int, default=None, help="copositivity refinement depth (default 12)")

    parser = argparse.ArgumentParser(prog="djopt", description="Second-order analysis of disjunctive programs.")
    parser.add_argument("--version", action="version", version=f"djopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="run the optimality analysis")
    a.add_argument("file")
    a.add_argument("--dump-cones", action="store_true", help="include cone representations per direction")

    c = sub.add_parser("cones", parents=[common], help="dump tangent and normal cones of the set")
    c.add_argument("file")
    c.add_argument("--at", default=None, help="point z, comma separated (default g(x̄) or the origin)")
    c.add_argument("--direction", default=None, help="direction w, comma separated (default 0)")

    o = sub.add_parser("oracle", parents=[common], help="cross-check closed forms against sampling oracles")
    o.add_argument("file")
    o.add_argument("--at", default=None)
    o.add_argument("--checks", default=",".join(ORACLE_CHECKS),
                   help=f"comma-separated subset of {','.join(ORACLE_CHECKS)}")
    o.add_argument("--probes", type=int, default=24)
    o.add_argument("--corrupt-cache", action="store_true", help=argparse.SUPPRESS)

    v = sub.add_parser("verify-witness", parents=[common], help="re-check the witnesses in an analyze report")
    v.add_argument("file")
    v.add_argument("report")
    return parser


def _base_point(data: dict, S: PolyhedralSet, st: Settings) -> tuple[np.ndarray, ProblemPoint | None]:
    if "objective" in data and "point" in data:
        pp = load_problem(data, st)
        return pp.g_map.value, pp
    return np.zeros(S.dim), None


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        data = load_document(args.file)
        st = settings_from(args, data)
        if args.command == "analyze":
            rep = analyze(load_problem(data, st), st, args.dump_cones)
            text = _summary_analyze(rep)
        elif args.command == "cones":
            S = load_set(data)
            z, _ = _base_point(data, S, st)
            at = _parse_point(args.at, S.dim, "--at")
            w = _parse_point(args.direction, S.dim, "--direction")
            try:
                rep = cones_report(S, z if at is None else at, np.zeros(S.dim) if w is None else w, st.tol)
            except PointNotInSet as exc:
                raise InputError(f"point is not in the set (max-norm distance {exc.distance:.6g})") from exc
            rep["exit_code"] = EXIT_OK
            text = _summary_cones(rep)
        elif args.command == "oracle":
            S = load_set(data)
            z, pp = _base_point(data, S, st)
            at = _parse_point(args.at, S.dim, "--at")
            checks = [c.strip() for c in args.checks.split(",") if c.strip()]
            unknown = set(checks) - set(ORACLE_CHECKS)
            if unknown:
                raise InputError(f"unknown checks: {sorted(unknown)}")
            z = z if at is None else at
            if not contains(S, z, st.tol):
                raise InputError("point is not in the set")
            rep = oracle_report(S, z, checks, st.seed, st.tol, args.corrupt_cache, pp, args.probes)
            text = _summary_oracle(rep)
        else:
            pp = load_problem(data, st)
            report = _read_json(args.report)
            rep = verify_witnesses(pp, report, st)
            text = _summary_verify(rep)
    except InputError as exc:
        if getattr(args, "json", False):
            print(json.dumps({"schema_version": SCHEMA_VERSION, "error": str(exc), "exit_code": EXIT_INPUT}))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ScaleCapExceeded as exc:
        print(f"error: problem exceeds a size cap: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.json:
        print(json.dumps(rep, indent=2))
        print(text, file=sys.stderr)
    else:
        print(text)
    return rep["exit_code"]


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
