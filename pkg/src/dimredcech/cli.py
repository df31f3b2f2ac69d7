"""Command-line front end: parse a JSON problem file, run one computation, print a report.

Exit codes: 0 success, 1 I/O or parse error, 2 model violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional

from .abelian import FpAbelianGroup, PreconditionError
from .derham import (
    CurvatureMatrix,
    InvariantModel,
    ModelError,
    bhm_cohomology,
    bhm_gysin_check,
    ce_total_space,
)
from .dimred import DimRedCochain, DimRedComplex, TwistData, c_of_f, d_F
from .gysin import (
    bockstein_zigzag,
    cech_bockstein,
    exactness_report,
    mod_n_cocycles,
    theorem4_rows_check,
)
from .nerve import (
    Cochain,
    CoefficientSystem,
    Nerve,
    UnsupportedRingError,
    cech_cohomology,
    cech_differential,
    coboundary_matrix,
    cup,
    fixture,
    top_generator,
)
from .obstruction import (
    GMatrix,
    ModelViolation,
    extract_xi_triple,
    lemma4_triple,
    mackey_phi,
    random_gmatrix,
    random_rational_s,
    verify_gluing,
    weyl_fixtures,
    weyl_pair,
)
from .sampling import random_cocycle_F, random_triple

COMMANDS = ("cech", "dimred", "gysin", "bockstein", "derham", "lemma4", "xi-extract", "verify-all")


class ProblemError(ValueError):
    """Malformed problem file."""


# ---------------------------------------------------------------- problem files


def _key(simplex) -> str:
    return ",".join(str(x) for x in simplex)


def _parse_key(key: str) -> tuple:
    try:
        return tuple(int(x) for x in key.split(","))
    except ValueError:
        raise ProblemError(f"bad simplex key {key!r}") from None


def _frac(x) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise ProblemError(f"rational values must be integers or 'p/q' strings, got {x!r}")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        raise ProblemError(f"bad rational {x!r}") from None


def _fstr(x: Fraction) -> str:
    return str(Fraction(x))


@dataclass
class Problem:
    nerve: Nerve
    n: int
    F: Cochain
    s: Optional[Cochain] = None
    g: Optional[GMatrix] = None
    modulus: Optional[int] = None
    curvature: Optional[CurvatureMatrix] = None
    weyl: Optional[str] = None
    max_k: int = 4

    @property
    def twist(self) -> TwistData:
        return TwistData.from_cocycle(self.F, self.s)

    def canonical(self) -> dict:
        out = {
            "nerve": {"maximal": [list(s) for s in sorted(self.nerve.maximal_simplices())]},
            "n": self.n,
            "F": {"values": {_key(s): list(v) for s, v in sorted(self.F.values.items())}},
            "max_k": self.max_k,
        }
        if self.s is not None:
            out["s"] = {"values": {_key(e): [_fstr(x) for x in v] for e, v in sorted(self.s.values.items())}}
        if self.g is not None:
            out["g"] = [_fstr(x) for x in self.g.entries]
        if self.modulus is not None:
            out["modulus"] = self.modulus
        if self.curvature is not None:
            out["derham"] = {"m": self.curvature.m, "n": self.curvature.n, "F2": self.curvature.to_json()}
        if self.weyl is not None:
            out["weyl"] = self.weyl
        return out

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.canonical()).encode("utf-8")).hexdigest()


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def parse_nerve(obj) -> Nerve:
    if not isinstance(obj, dict):
        raise ProblemError("nerve must be an object")
    if "fixture" in obj:
        try:
            return fixture(str(obj["fixture"]))
        except ValueError as e:
            raise ProblemError(str(e)) from None
    if "maximal" in obj:
        try:
            return Nerve([tuple(int(x) for x in s) for s in obj["maximal"]], obj.get("vertex_count"))
        except (TypeError, ValueError) as e:
            raise ProblemError(f"bad maximal simplices: {e}") from None
    raise ProblemError("nerve needs 'fixture' or 'maximal'")


def _vector_cochain(nerve, degree, n, obj, ring) -> Cochain:
    vals = {}
    for key, v in obj.items():
        s = _parse_key(key)
        if len(s) != degree + 1 or not nerve.contains(s):
            raise ProblemError(f"{key} is not a {degree}-simplex of the nerve")
        if not isinstance(v, list) or len(v) != n:
            raise ProblemError(f"value at {key} must be a list of {n} entries")
        vals[s] = tuple(_frac(x) for x in v)
    try:
        return Cochain(nerve, degree, CoefficientSystem(ring, "vector", n), vals)
    except (TypeError, ValueError) as e:
        raise ProblemError(str(e)) from None


def parse_problem(obj) -> Problem:
    if not isinstance(obj, dict):
        raise ProblemError("problem must be a JSON object")
    unknown = set(obj) - {"nerve", "n", "F", "s", "g", "modulus", "derham", "weyl", "max_k"}
    if unknown:
        raise ProblemError(f"unknown keys {sorted(unknown)}")
    nerve = parse_nerve(obj.get("nerve", {"fixture": "point"}))
    n = obj.get("n", 1)
    if not isinstance(n, int) or n < 1:
        raise ProblemError("n must be a positive integer")
    s = None
    if "s" in obj:
        s = _vector_cochain(nerve, 1, n, obj["s"].get("values", {}), "Q")
    Fobj = obj.get("F")
    if Fobj is None:
        if s is not None:
            ds = cech_differential(s)
            if any(x.denominator != 1 for v in ds.values.values() for x in v):
                raise ProblemError("∂s is not integral; give F explicitly or fix s")
            F = ds.with_ring("Z")
        else:
            F = Cochain(nerve, 2, CoefficientSystem("Z", "vector", n))
    elif isinstance(Fobj, dict) and "generator" in Fobj:
        mult = Fobj["generator"]
        if not isinstance(mult, list) or len(mult) != n:
            raise ProblemError(f"F.generator must list {n} integer multiples")
        gen = top_generator(nerve, 2)
        if gen is None:
            raise ProblemError("nerve has no Ȟ² ≅ ℤ generator")
        F = Cochain.stack([int(m) * gen for m in mult], "vector", n)
    elif isinstance(Fobj, dict) and "values" in Fobj:
        F = _vector_cochain(nerve, 2, n, Fobj["values"], "Z")
    else:
        raise ProblemError("F must have 'values' or 'generator'")
    g = None
    if "g" in obj:
        try:
            g = GMatrix(n, tuple(_frac(x) for x in obj["g"]))
        except ValueError as e:
            raise ProblemError(str(e)) from None
    modulus = obj.get("modulus")
    if modulus is not None and (not isinstance(modulus, int) or modulus < 1):
        raise ProblemError("modulus must be a positive integer")
    curv = None
    if "derham" in obj:
        d = obj["derham"]
        try:
            curv = CurvatureMatrix(int(d["m"]), int(d["n"]), tuple(tuple(_frac(x) for x in r) for r in d["F2"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ProblemError(f"bad derham block: {e}") from None
    weyl = obj.get("weyl")
    if weyl is not None and weyl not in weyl_fixtures():
        raise ProblemError(f"unknown weyl fixture {weyl!r}")
    max_k = obj.get("max_k", 4)
    if not isinstance(max_k, int) or max_k < 0:
        raise ProblemError("max_k must be a non-negative integer")
    return Problem(nerve, n, F, s, g, modulus, curv, weyl, max_k)


def load_problem(path: str) -> Problem:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as e:
        raise ProblemError(f"cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ProblemError(f"{path}: invalid JSON: {e}") from None
    return parse_problem(obj)


# ---------------------------------------------------------------- commands


def _group(g: FpAbelianGroup) -> dict:
    return g.invariants()


def _degrees(args, problem) -> list:
    if args.degree is not None:
        return [args.degree]
    return list(range(0, (args.max_k if args.max_k is not None else problem.max_k) + 1))


def _ring(args) -> str:
    return {"int": "Z", "rat": "Q", "modN": "QmodZ"}[args.ring]


def cmd_cech(problem: Problem, args) -> dict:
    ring = _ring(args)
    if ring == "QmodZ":
        raise UnsupportedRingError("Q/Z groups are not computed; use the bockstein command")
    return {"groups": {str(k): _group(cech_cohomology(problem.nerve, ring, k)) for k in _degrees(args, problem)}}


def cmd_dimred(problem: Problem, args) -> dict:
    ring = _ring(args)
    if ring == "QmodZ":
        raise UnsupportedRingError("Q/Z groups are not computed; use the bockstein command")
    cx = DimRedComplex(problem.twist)
    ks = _degrees(args, problem)
    return {
        "groups": {str(k): _group(cx.cohomology(k, ring)) for k in ks},
        "truncated_groups": {str(k): _group(cx.bar_cohomology(k, ring)) for k in ks},
    }


def cmd_gysin(problem: Problem, args) -> dict:
    ring = _ring(args)
    if ring == "QmodZ":
        ring = "Z"
    ks = _degrees(args, problem)
    nodes = exactness_report(problem.nerve, problem.twist, ring, ks)
    out = {"nodes": [dict(r.summary(), witnesses=len(r.composite_witnesses) + len(r.kernel_witnesses)) for r in nodes],
           "all_exact": all(r.exact for r in nodes)}
    N = args.modulus or problem.modulus
    if N:
        sq = theorem4_rows_check(problem.nerve, problem.twist, N, max(ks))
        out["squares"] = [s.summary() for s in sq]
        out["all_squares_commute"] = all(s.ok for s in sq)
    return out


def cmd_bockstein(problem: Problem, args) -> dict:
    N = args.modulus or problem.modulus
    if not N or N < 2:
        raise PreconditionError("bockstein needs --modulus N >= 2")
    k = args.degree if args.degree is not None else 1
    nerve, tw = problem.nerve, problem.twist
    cech_images = []
    for v in mod_n_cocycles(coboundary_matrix(nerve, k), nerve.count(k) if k >= 0 else 0, N):
        c = Cochain.from_vector(nerve, k, CoefficientSystem("QmodZ", "scalar", 1, N), [Fraction(x, N) for x in v])
        r = cech_bockstein(c)
        cech_images.append(list(r.coordinates))
    cx = DimRedComplex(tw)
    tw_images = []
    for v in mod_n_cocycles(cx.matrix(k), cx.dim(k), N):
        c = DimRedCochain.from_vector(nerve, k, tw.n, [Fraction(x, N) for x in v], "QmodZ", N)
        r = bockstein_zigzag(c, tw)
        tw_images.append(list(r.coordinates))
    return {
        "modulus": N,
        "degree": k,
        "cech_target": _group(cech_cohomology(nerve, "Z", k + 1)),
        "cech_images": cech_images,
        "twisted_target": _group(cx.cohomology(k + 1)),
        "twisted_images": tw_images,
        "nonzero_cech": sum(1 for c in cech_images if any(c)),
        "nonzero_twisted": sum(1 for c in tw_images if any(c)),
    }


def _model(problem: Problem) -> InvariantModel:
    if problem.curvature is None:
        raise PreconditionError("problem has no derham block")
    return InvariantModel.torus(problem.curvature)


def cmd_derham(problem: Problem, args) -> dict:
    M = _model(problem)
    top = M.m + M.n
    ks = [args.degree] if args.degree is not None else list(range(0, top + 1))
    bhm = {str(k): bhm_cohomology(M, k, 0, k).dimension for k in ks}
    ce = {str(k): ce_total_space(M, k) for k in ks}
    nodes = bhm_gysin_check(M, range(0, top + 1))
    return {"bhm_dims": bhm, "ce_dims": ce, "dims_agree": bhm == ce,
            "gysin_nodes": [r.summary() for r in nodes], "gysin_exact": all(r.exact for r in nodes)}


def cmd_lemma4(problem: Problem, args) -> dict:
    if problem.s is None:
        raise PreconditionError("lemma4 needs s")
    g = problem.g if problem.g is not None else GMatrix(problem.n, (0,) * comb(problem.n, 2))
    tw = TwistData.from_s(problem.s)
    triple = lemma4_triple(g, tw)
    r = bockstein_zigzag(triple, tw)
    return {"closed": True, "modulus": triple.modulus, "zero_class": r.is_zero,
            "target": _group(r.group), "coordinates": list(r.coordinates)}


def _triple_json(t: DimRedCochain) -> dict:
    return {slot: {_key(s): [_fstr(x) for x in v] for s, v in sorted(getattr(t, slot).values.items())}
            for slot in ("top", "mid", "bot")}


def cmd_xi_extract(problem: Problem, args) -> dict:
    name = problem.weyl or "single_patch_N3"
    data = weyl_fixtures()[name]
    t = extract_xi_triple(data)
    rep = verify_gluing(data, t)
    return {"fixture": name, "modulus": t.modulus, "triple": _triple_json(t), "closed": True,
            "gluing": rep.summary()}


# ---------------------------------------------------------------- verify-all


def _check(name: str, ok: bool, detail) -> dict:
    return {"check": name, "pass": bool(ok), "detail": detail}


def _d2_sweep(nerve, twist, rng, max_k, samples) -> tuple:
    bad = 0
    for _ in range(samples):
        k = rng.randint(0, max_k)
        c = random_triple(nerve, k, twist.n, rng)
        if not d_F(d_F(c, twist), twist).is_zero():
            bad += 1
    return bad == 0, {"samples": samples, "failures": bad}


def _cf_identity(F: Cochain) -> bool:
    CF = c_of_f(F)
    n = F.system.n
    dC = cech_differential(CF)
    for idx, (i, j) in enumerate((i, j) for i in range(n) for j in range(i + 1, n)):
        Fi, Fj = F.component(i), F.component(j)
        if dC.component(idx) != cup(Fi, Fj) - cup(Fj, Fi):
            return False
    return True


def _f0_decomposition(nerve, n, max_k) -> tuple:
    cx = DimRedComplex(TwistData.zero(nerve, n))
    detail = {}
    ok = True
    for k in range(max_k + 1):
        h = cx.cohomology(k)
        parts = [cech_cohomology(nerve, "Z", k)]
        parts += [cech_cohomology(nerve, "Z", k - 1) if k >= 1 else FpAbelianGroup(0)] * n
        parts += [cech_cohomology(nerve, "Z", k - 2) if k >= 2 else FpAbelianGroup(0)] * comb(n, 2)
        expect = parts[0].direct_sum(*parts[1:])
        ok &= h.same_invariants(expect)
        detail[str(k)] = {"computed": h.invariants(), "expected": expect.invariants()}
    return ok, detail


def cmd_verify_all(problem: Problem, args) -> dict:
    rng = random.Random(args.seed)
    nerve, tw = problem.nerve, problem.twist
    max_k = args.max_k if args.max_k is not None else problem.max_k
    checks = []
    ok, det = _d2_sweep(nerve, tw, rng, max_k, 40)
    checks.append(_check("d_F_squared_zero", ok, det))
    Fs = [tw.F] + [random_cocycle_F(nerve, max(2, tw.n), rng) for _ in range(5)]
    checks.append(_check("cf_coboundary_identity", all(_cf_identity(F) for F in Fs), {"cocycles": len(Fs)}))
    ok, det = _f0_decomposition(nerve, tw.n, max_k)
    checks.append(_check("f0_decomposition", ok, det))
    nodes = exactness_report(nerve, tw, "Z", range(0, max_k + 1))
    checks.append(_check("gysin_exactness", all(r.exact for r in nodes),
                         [{"node": r.name, "degree": r.degree, "exact": r.exact} for r in nodes]))
    moduli = [problem.modulus] if problem.modulus else [2, 6, 12]
    sq_ok, sq_det = True, {}
    for N in moduli:
        sq = theorem4_rows_check(nerve, tw, N, min(max_k, 3))
        sq_ok &= all(s.ok for s in sq)
        sq_det[str(N)] = sum(1 for s in sq if s.ok), len(sq)
    checks.append(_check("coefficient_squares", sq_ok, {k: list(v) for k, v in sq_det.items()}))
    # lemma4_triple on the problem's nerve with random rational data
    n4 = max(2, tw.n)
    zeros = 0
    for _ in range(5):
        s = random_rational_s(nerve, n4, rng)
        t4 = TwistData.from_s(s)
        if bockstein_zigzag(lemma4_triple(random_gmatrix(n4, rng), t4), t4).is_zero:
            zeros += 1
    checks.append(_check("lemma4_zero_class", zeros == 5, {"samples": 5, "zero": zeros}))
    h2 = cech_cohomology(nerve, "Z", 2)
    if h2.torsion:
        N = h2.torsion[0]
        hits = 0
        for v in mod_n_cocycles(coboundary_matrix(nerve, 1), nerve.count(1), N):
            c = Cochain.from_vector(nerve, 1, CoefficientSystem("QmodZ", "scalar", 1, N), [Fraction(x, N) for x in v])
            if not cech_bockstein(c).is_zero:
                hits += 1
        checks.append(_check("classical_bockstein_hits_torsion", hits > 0, {"modulus": N, "nonzero_images": hits}))
    mk = {str(N): _fstr(mackey_phi(list(weyl_pair(N)))[0]) for N in (2, 3, 5, 12)}
    checks.append(_check("weyl_mackey", all(Fraction(v) == Fraction(1, int(k)) for k, v in mk.items()), mk))
    xi = {}
    for name, data in sorted(weyl_fixtures().items()):
        t = extract_xi_triple(data)
        xi[name] = verify_gluing(data, t).consistent
    checks.append(_check("xi_extract_gluing", all(xi.values()), xi))
    if problem.curvature is not None:
        M = _model(problem)
        top = M.m + M.n
        b = [bhm_cohomology(M, k, 0, k).dimension for k in range(top + 1)]
        c = [ce_total_space(M, k) for k in range(top + 1)]
        checks.append(_check("bhm_matches_ce", b == c, {"bhm": b, "ce": c}))
        nodes = bhm_gysin_check(M, range(0, top + 1))
        checks.append(_check("bhm_gysin_exact", all(r.exact for r in nodes), len(nodes)))
    return {"seed": args.seed, "checks": checks, "all_pass": all(c["pass"] for c in checks)}


HANDLERS = {
    "cech": cmd_cech,
    "dimred": cmd_dimred,
    "gysin": cmd_gysin,
    "bockstein": cmd_bockstein,
    "derham": cmd_derham,
    "lemma4": cmd_lemma4,
    "xi-extract": cmd_xi_extract,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimredcech", description="Twisted Čech cohomology computations on finite nerves.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("problem", help="JSON problem file")
    p.add_argument("--degree", type=int, help="single degree k")
    p.add_argument("--ring", choices=("int", "rat", "modN"), default="int")
    p.add_argument("--modulus", type=int, help="modulus N for Q/Z(N)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    p.add_argument("--max-k", type=int, dest="max_k", help="highest degree")
    p.add_argument("--timing", action="store_true", help="include wall-clock time (breaks byte-identical output)")
    return p


def run(command: str, problem: Problem, args) -> dict:
    report = {"command": command, "input_digest": problem.digest()}
    start = time.perf_counter()
    report["result"] = HANDLERS[command](problem, args)
    if args.timing:
        report["seconds"] = round(time.perf_counter() - start, 3)
    return report


def _human(report: dict) -> str:
    lines = [f"{report['command']}  digest {report['input_digest'][:16]}"]

    def walk(obj, indent):
        pad = "  " * indent
        if isinstance(obj, dict):
            for k in sorted(obj):
                v = obj[k]
                if isinstance(v, (dict, list)) and v and not _flat(v):
                    lines.append(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}{k}: {canonical_json(v)}")
        elif isinstance(obj, list):
            for v in obj:
                if isinstance(v, (dict, list)) and not _flat(v):
                    lines.append(f"{pad}-")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}- {canonical_json(v)}")

    walk(report["result"], 1)
    if "seconds" in report:
        lines.append(f"  seconds: {report['seconds']}")
    return "\n".join(lines)


def _flat(v) -> bool:
    if isinstance(v, dict):
        return all(not isinstance(x, (dict, list)) for x in v.values()) and len(v) <= 3
    return all(not isinstance(x, (dict, list)) for x in v)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        problem = load_problem(args.problem)
    except ProblemError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        report = run(args.command, problem, args)
    except (PreconditionError, ModelViolation, ModelError, UnsupportedRingError, AssertionError) as e:
        print(f"model violation in {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    if args.json:
        print(json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False))
    else:
        print(_human(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
