"""Command-line interface.

Exit codes: 0 pass, 1 malformed input, 2 rig axiom failure, 3 resource guard,
4 theorem violation or rejected context.
"""
import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from finclone import commutant as cm
from finclone import distribution as dist
from finclone import theory as th
from finclone.finset import InputError, OpTable, ResourceError
from finclone.rig import (
    REGISTRY_NAMES,
    RigFormatError,
    load_rig,
    registry,
    validate_rig,
)

EXIT_OK, EXIT_INPUT, EXIT_AXIOM, EXIT_RESOURCE, EXIT_THEOREM = 0, 1, 2, 3, 4


class CommandFailed(Exception):
    def __init__(self, code, reason, results=None):
        super().__init__(reason)
        self.code = code
        self.reason = reason
        self.results = results or {}


# ----------------------------------------------------------------------------
# helpers

def _resolve_rig(spec):
    if spec is None:
        return None, None
    if spec in REGISTRY_NAMES and not Path(spec).exists():
        rig = registry()[spec]
        return rig, {"registry": spec}
    path = Path(spec)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CommandFailed(EXIT_INPUT, f"cannot read rig file {spec}: {exc.strerror}")
    try:
        rig = load_rig(path)
    except RigFormatError as exc:
        raise CommandFailed(EXIT_INPUT, f"malformed rig: {exc}")
    return rig, {"file": path.name, "sha256": hashlib.sha256(raw).hexdigest()}


def _load_generators(path, carrier):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CommandFailed(EXIT_INPUT, f"cannot read generators {path}: {exc}")
    if not isinstance(data, list):
        raise CommandFailed(EXIT_INPUT, "generators file must hold a JSON list")
    gens = []
    for i, item in enumerate(data):
        try:
            gens.append(OpTable(carrier, int(item["arity"]), tuple(item["table"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise CommandFailed(EXIT_INPUT, f"generators[{i}]: {exc}")
    return gens


def _carrier(args, rig):
    if rig is not None:
        return rig.size
    return args.carrier


def _build_theory(kind, rig, carrier, max_arity, generators=None):
    if kind in ("mat", "mat-aff", "pointed-mat-op") and rig is None:
        raise CommandFailed(EXIT_INPUT, f"--theory {kind} needs --rig")
    try:
        if kind == "full":
            return th.full_theory(carrier, max_arity)
        if kind == "initial":
            return th.initial_theory(carrier, max_arity)
        if kind == "mat":
            return th.mat_theory(rig, max_arity)
        if kind == "mat-op":
            from finclone.rig import opposite
            return th.mat_theory(opposite(rig), max_arity)
        if kind == "mat-aff":
            return th.mat_aff_theory(rig, max_arity)
        if kind == "pointed-mat-op":
            return th.pointed_module_theory(rig, max_arity)
        if kind == "closure":
            if generators is None:
                raise CommandFailed(EXIT_INPUT, "--theory closure needs --generators")
            return th.clone_closure(carrier, generators, max_arity)
    except th.DegenerateRigError as exc:
        raise CommandFailed(EXIT_INPUT, str(exc))
    raise CommandFailed(EXIT_INPUT, f"unknown theory {kind!r}")


def _digest(inputs):
    blob = json.dumps(inputs, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _render_text(report, out):
    print(f"command: {report['command']}", file=out)
    print(f"status: {report['status']}", file=out)
    if "reason" in report:
        print(f"reason: {report['reason']}", file=out)
    print(f"exactness: {report['exactness']}", file=out)
    for key, val in report["results"].items():
        if isinstance(val, (dict, list)):
            text = json.dumps(_to_jsonable(val), sort_keys=True)
            if len(text) > 160:
                text = text[:157] + "..."
            print(f"{key}: {text}", file=out)
        else:
            print(f"{key}: {val}", file=out)


# ----------------------------------------------------------------------------
# commands

def cmd_rig_validate(args):
    rig, src = _resolve_rig(args.path)
    rep = validate_rig(rig)
    results = {"name": rig.name, "size": rig.size, **rep.to_json(),
               "commutative": rig.is_commutative}
    if not rep.ok:
        raise CommandFailed(EXIT_AXIOM, f"{len(rep.violations)} axiom violations", results)
    return {"rig": src}, results, "exact"


def cmd_theory_slice(args):
    rig, src = _resolve_rig(args.rig)
    carrier = _carrier(args, rig)
    gens = _load_generators(args.generators, carrier) if args.generators else None
    max_ar = args.max_arity
    t = _build_theory(args.theory, rig, carrier, max_ar, gens)
    if args.theory == "full":
        sl = th.full_theory_slice(carrier, args.arity, args.max_candidates)
    else:
        sl = t.slice(args.arity)
    results = {"theory": t.provenance, "carrier": carrier, "arity": args.arity,
               "count": len(sl), "merged": sl.merged}
    if args.dump:
        results["tables"] = sl.to_json()
    inputs = {"rig": src, "theory": args.theory, "carrier": carrier, "arity": args.arity}
    if gens is not None:
        inputs["generators"] = [[g.arity, list(g.table)] for g in gens]
    return inputs, results, "exact"


def cmd_check(args):
    rig, src = _resolve_rig(args.rig)
    carrier = _carrier(args, rig)
    K = args.max_arity
    inputs = {"rig": src, "check": args.check, "carrier": carrier, "max_arity": K}
    if args.check == "mutual-commutant":
        if rig is None:
            raise CommandFailed(EXIT_INPUT, "mutual-commutant needs --rig")
        v = cm.mutual_commutant_check(rig, K)
    elif args.check == "affine-commutant":
        if rig is None:
            raise CommandFailed(EXIT_INPUT, "affine-commutant needs --rig")
        v = cm.affine_commutant_check(rig, K, converse=not args.forward_only)
    else:
        t = _build_theory(args.theory, rig, carrier, K)
        inputs["theory"] = args.theory
        if args.check == "balanced":
            v = cm.is_balanced(t, K)
        elif args.check == "commutative":
            v = cm.is_commutative(t, K)
        elif args.check == "saturated":
            v = cm.is_saturated(t, K)
        else:
            other = _build_theory(args.other, rig, carrier, K)
            inputs["other"] = args.other
            v = cm.commutes(t, other, K)
    results = {"verdict": v.to_json()}
    if not v.ok:
        raise CommandFailed(EXIT_THEOREM, f"{v.kind} check failed", results)
    return inputs, results, v.note


def _dist_results(ctx, k, do_classify, do_laws):
    obj = dist.distribution_object(ctx, k)
    results = {"context": ctx.summary(), "set_size": k, "count": len(obj)}
    theorems = []
    if k <= 4 and ctx.carrier_size ** k <= 64:
        theorems.append(dist.restriction_check(ctx, k).to_json())
        theorems.append(dist.double_commutant_check(ctx, k).to_json())
    results["theorems"] = theorems
    if do_classify:
        rows = []
        for e in obj:
            c = dist.classify(ctx, e)
            rows.append({"table": list(e.table), **c.to_json()})
        results["classification"] = rows
    if do_laws:
        laws = [dist.check_left_unit(ctx, k).to_json(), dist.check_right_unit(ctx, k).to_json()]
        if k <= 2:
            laws.append(dist.check_associativity(ctx, k).to_json())
        results["monad_laws"] = laws
        if not all(x["ok"] for x in laws):
            raise CommandFailed(EXIT_THEOREM, "monad law failed", results)
    return results


def cmd_dist(args):
    rig, src = _resolve_rig(args.rig)
    if args.context != "initial" and rig is None:
        raise CommandFailed(EXIT_INPUT, f"context {args.context} needs --rig")
    carrier = rig.size if rig is not None else args.carrier
    try:
        ctx = dist.build_context(args.context, rig if args.context != "initial" else None,
                                 args.max_arity, carrier_size=carrier)
    except dist.ContextRejected as exc:
        raise CommandFailed(EXIT_THEOREM, f"context rejected: {exc.axiom}",
                            {"verdict": exc.verdict.to_json()})
    results = _dist_results(ctx, args.set_size, args.classify, args.monad_laws)
    inputs = {"rig": src, "context": args.context, "set_size": args.set_size,
              "carrier": carrier, "classify": args.classify, "monad_laws": args.monad_laws}
    return inputs, results, ctx.exactness


# ----------------------------------------------------------------------------
# full acceptance matrix

def _rig_matrix(rig):
    """Per-rig checks; returns (entry, exit code)."""
    entry = {"name": rig.name, "size": rig.size}
    rep = validate_rig(rig)
    entry["validation"] = rep.to_json()
    if not rep.ok:
        return entry, EXIT_AXIOM
    if rep.degenerate:
        entry["skipped"] = "degenerate rig"
        return entry, EXIT_OK
    K = 3 if rig.size == 2 else min(2, th.default_max_arity(rig.size))
    entry["max_arity"] = K
    code = EXIT_OK
    checks = {}
    faithful = all(th.mat_slice(rig, n).faithful for n in range(K + 1))
    checks["faithful"] = faithful
    if not faithful:
        entry["checks"] = checks
        return entry, EXIT_THEOREM
    mutual = cm.mutual_commutant_check(rig, K)
    checks["mutual_commutant"] = mutual.ok
    bal = cm.is_balanced(th.mat_theory(rig, K), K)
    checks["balanced"] = bal.ok
    checks["balanced_expected"] = rig.is_commutative
    aff = cm.affine_commutant_check(rig, K)
    forward = all(p["relation"] == "equal" for p in aff.per_arity
                  if p["direction"].startswith("commutant(pointed)"))
    converse = all(p["relation"] == "equal" for p in aff.per_arity
                   if p["direction"].startswith("commutant(affine)"))
    converse_required = rep.is_ring or dist._bool2_like(rig)
    checks["affine_commutant_forward"] = forward
    checks["affine_commutant_converse"] = converse
    checks["affine_commutant_converse_required"] = converse_required
    failed = (not mutual.ok or bal.ok != rig.is_commutative or not forward
              or (converse_required and not converse))
    contexts = {}
    if rig.is_commutative:
        kinds = ["scalar-linear"]
        if converse_required:
            kinds.append("scalar-affine")
        for kind in kinds:
            try:
                ctx = dist.build_context(kind, rig, K)
            except dist.ContextRejected as exc:
                contexts[kind] = {"admitted": False, "reason": str(exc)}
                failed = True
                continue
            contexts[kind] = _context_matrix(ctx, rig)
            failed |= not contexts[kind]["ok"]
    entry["checks"] = checks
    entry["contexts"] = contexts
    entry["witnesses"] = {"balanced": bal.witnesses[:1], "mutual": mutual.witnesses[:1]}
    if failed:
        code = EXIT_THEOREM
    entry["ok"] = not failed
    return entry, code


def _context_matrix(ctx, rig=None):
    s = ctx.carrier_size
    max_v = 3 if s == 2 else (2 if s <= 4 else 1)
    if ctx.name == "initial":
        max_v = 4
    counts, theorems, ok = [], [], True
    for v in range(max_v + 1):
        counts.append(len(dist.distribution_object(ctx, v)))
        for rep in (dist.restriction_check(ctx, v), dist.double_commutant_check(ctx, v)):
            theorems.append({"theorem": rep.theorem, "n": v, "ok": rep.ok})
            ok &= rep.ok
    laws = []
    law_v = 2 if s == 2 else 1
    for v in range(law_v + 1):
        for rep in (dist.check_left_unit(ctx, v), dist.check_right_unit(ctx, v),
                    dist.check_associativity(ctx, v)):
            laws.append({"law": rep.law, "v_size": v, "ok": rep.ok, "method": rep.method})
            ok &= rep.ok
    out = {"admitted": True, "exactness": ctx.exactness, "balanced": ctx.is_balanced(),
           "counts": counts, "theorems": theorems, "monad_laws": laws}
    if s == 2 and (rig is None or dist._bool2_like(rig)):
        bij = []
        for v in range(min(max_v, 3) + 1):
            obj = dist.distribution_object(ctx, v)
            fams = sorted(tuple(dist.classify(ctx, e).family) for e in obj)
            names = sorted({dist.classify(ctx, e).name for e in obj})
            entry = {"v_size": v, "names": names}
            if ctx.name == "scalar-linear" and rig is not None and dist._bool2_like(rig):
                oracle = sorted(tuple(f) for f in dist.brute_force_filters(v))
                entry["bijective_with_filters"] = fams == oracle and len(set(fams)) == len(fams)
                ok &= entry["bijective_with_filters"]
            bij.append(entry)
        out["classification"] = bij
    out["ok"] = bool(ok)
    return out


def cmd_report_all(args):
    rig_dir = Path(args.rig_dir)
    files = sorted(rig_dir.glob("*.json")) if rig_dir.is_dir() else []
    if not files:
        raise CommandFailed(EXIT_INPUT, f"no rig files in {args.rig_dir}")
    entries, codes, digests = [], [], {}
    for f in files:
        digests[f.name] = hashlib.sha256(f.read_bytes()).hexdigest()
        try:
            rig = load_rig(f)
        except RigFormatError as exc:
            entries.append({"file": f.name, "error": str(exc)})
            codes.append(EXIT_INPUT)
            continue
        try:
            entry, code = _rig_matrix(rig)
        except ResourceError as exc:
            entry, code = {"name": rig.name, "error": str(exc)}, EXIT_RESOURCE
        entry["file"] = f.name
        entries.append(entry)
        codes.append(code)
    ctx = dist.build_context("initial")
    initial = _context_matrix(ctx)
    codes.append(EXIT_OK if initial["ok"] else EXIT_THEOREM)
    results = {"rigs": entries, "initial_context": initial}
    bad = sorted(c for c in codes if c)
    inputs = {"rig_dir": rig_dir.name, "files": digests}
    if bad:
        raise CommandFailed(bad[0], "acceptance matrix has failures", results)
    return inputs, results, "see per-context exactness"


COMMANDS = {
    "rig-validate": cmd_rig_validate,
    "theory-slice": cmd_theory_slice,
    "check": cmd_check,
    "dist": cmd_dist,
    "report-all": cmd_report_all,
}


def build_parser():
    p = argparse.ArgumentParser(prog="finclone", description=__doc__.splitlines()[0])
    p.add_argument("--json", action="store_true", help="print the JSON report")
    p.add_argument("--no-timing", action="store_true",
                   help="report elapsed_ms as 0 for byte-identical output")
    p.add_argument("--out", help="also write the JSON report to this path")
    p.add_argument("--backend", choices=["numba", "numpy"],
                   help="search kernel backend (default: FINCLONE_BACKEND or numba)")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("rig-validate", help="check rig axioms")
    r.add_argument("path", help="rig JSON file or registry name")

    t = sub.add_parser("theory-slice", help="compute an n-ary slice of a theory")
    t.add_argument("--theory", required=True,
                   choices=["full", "initial", "mat", "mat-aff", "pointed-mat-op", "closure"])
    t.add_argument("--rig")
    t.add_argument("--carrier", type=int, default=2)
    t.add_argument("--arity", type=int, required=True)
    t.add_argument("--generators", help="JSON list of {arity, table}")
    t.add_argument("--dump", action="store_true")
    t.add_argument("--max-arity", type=int)
    t.add_argument("--max-candidates", type=int, default=th.DEFAULT_MAX_CANDIDATES)

    c = sub.add_parser("check", help="commutant verdicts and theorem instances")
    c.add_argument("--check", required=True,
                   choices=["balanced", "saturated", "commutative", "commutes",
                            "mutual-commutant", "affine-commutant"])
    c.add_argument("--rig")
    c.add_argument("--carrier", type=int, default=2)
    c.add_argument("--theory", default="mat",
                   choices=["full", "initial", "mat", "mat-op", "mat-aff", "pointed-mat-op"])
    c.add_argument("--other", default="full",
                   choices=["full", "initial", "mat", "mat-op", "mat-aff", "pointed-mat-op"])
    c.add_argument("--max-arity", type=int)
    c.add_argument("--forward-only", action="store_true",
                   help="affine-commutant: skip the converse direction")

    d = sub.add_parser("dist", help="the functional distribution monad on a finite set")
    d.add_argument("--context", required=True, choices=list(dist.CONTEXT_KINDS))
    d.add_argument("--rig")
    d.add_argument("--carrier", type=int, default=2)
    d.add_argument("--set-size", type=int, required=True)
    d.add_argument("--classify", action="store_true")
    d.add_argument("--monad-laws", action="store_true")
    d.add_argument("--max-arity", type=int)

    a = sub.add_parser("report-all", help="run the acceptance matrix over a rig directory")
    a.add_argument("--rig-dir", required=True)
    a.add_argument("--out", dest="report_out", required=True)
    return p


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend:
        os.environ["FINCLONE_BACKEND"] = args.backend
    start = time.perf_counter()
    echo = ["finclone"] + list(argv if argv is not None else sys.argv[1:])
    report = {"command": args.command, "argv": echo}
    code = EXIT_OK
    try:
        inputs, results, exactness = COMMANDS[args.command](args)
        report.update(status="pass", inputs=inputs, results=results, exactness=exactness)
    except CommandFailed as exc:
        code = exc.code
        report.update(status="fail", reason=exc.reason, inputs={}, results=exc.results,
                      exactness="n/a")
    except ResourceError as exc:
        code = EXIT_RESOURCE
        report.update(status="fail", reason=f"resource guard: {exc}", inputs={}, results={},
                      exactness="n/a")
    except (dist.TheoremViolation, th.ConsistencyError) as exc:
        code = EXIT_THEOREM
        report.update(status="fail", reason=f"theorem violation: {exc}", inputs={},
                      results={}, exactness="n/a")
    except (InputError, ValueError) as exc:
        code = EXIT_INPUT
        report.update(status="fail", reason=f"input error: {exc}", inputs={}, results={},
                      exactness="n/a")
    report["exit_code"] = code
    report["inputs_digest"] = _digest(report.get("inputs", {}))
    report["elapsed_ms"] = 0 if args.no_timing else int((time.perf_counter() - start) * 1000)
    report = _to_jsonable(report)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    for target in (args.out, getattr(args, "report_out", None)):
        if target:
            Path(target).write_text(text, encoding="utf-8")
    if args.json:
        stdout.write(text)
    else:
        _render_text(report, stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
