"""Acceptance matrix: one test and one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""
import random
import time

import numpy as np
import pytest

from finclone import distribution as dist
from finclone.commutant import affine_commutant_check, is_balanced, mutual_commutant_check
from finclone.finset import OpTable, digits, enumerate_constrained, naive_candidate_count
from finclone.rig import REGISTRY_NAMES, registry
from finclone.theory import (
    clone_closure_slice,
    free_algebra_size,
    mat_slice,
    mat_theory,
    rig_generators,
)

RIGS = registry()
_CONTEXTS = {}


def context(kind):
    if kind not in _CONTEXTS:
        rig = None if kind == "initial" else RIGS["bool2"]
        _CONTEXTS[kind] = dist.build_context(kind, rig)
    return _CONTEXTS[kind]


def verdict_arity(rig):
    return 3 if rig.size == 2 else 2


_reporter = None


@pytest.fixture(autouse=True)
def _grab_reporter(request):
    global _reporter
    _reporter = request.config.pluginmanager.getplugin("terminalreporter")


def emit(number, ok, detail, elapsed, bound=None):
    timing = f"{elapsed:.1f}s" + (f" (bound {bound}s)" if bound else "")
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}  [{timing}]"
    if _reporter is not None:
        _reporter.write_line(line)
    else:
        print(line)
    return ok


def criterion_1():
    ctx = context("scalar-linear")
    counts, bijective = [], True
    for v in range(5):
        obj = dist.distribution_object(ctx, v)
        counts.append(len(obj))
        fams = [tuple(map(tuple, dist.classify(ctx, e).family)) for e in obj]
        names = {dist.classify(ctx, e).name for e in obj}
        bijective &= len(set(fams)) == len(fams) and "not a filter" not in names
        if v <= 3:
            oracle = sorted(tuple(map(tuple, f)) for f in dist.brute_force_filters(v))
            bijective &= sorted(fams) == oracle
    ok = counts == [2 ** v for v in range(5)] and bijective
    return ok, f"filter counts {counts}, bijection with brute-force filters {bijective}"


def criterion_2():
    ctx = context("scalar-affine")
    counts, all_proper = [], True
    for v in range(4):
        obj = dist.distribution_object(ctx, v)
        counts.append(len(obj))
        all_proper &= all(dist.classify(ctx, e).name in ("proper filter", "ultrafilter")
                          for e in obj)
    ok = counts == [2 ** v - 1 for v in range(4)] and all_proper
    return ok, f"proper-filter counts {counts}, all proper {all_proper}"


def criterion_3():
    ctx = context("initial")
    counts, dirac_ok = [], True
    for v in range(1, 5):
        obj = dist.distribution_object(ctx, v)
        counts.append(len(obj))
        idx = dist.dirac_indices(ctx, v, obj)
        dirac_ok &= sorted(idx.tolist()) == list(range(len(obj)))
    ok = counts == [1, 2, 3, 4] and dirac_ok
    return ok, f"ultrafilter counts {counts}, Dirac bijection {dirac_ok}"


def criterion_4():
    results = {}
    for name in REGISTRY_NAMES:
        rig = RIGS[name]
        results[name] = mutual_commutant_check(rig, verdict_arity(rig)).ok
    return all(results.values()), f"mutual commutant {results}"


def criterion_5():
    results, witness_ok = {}, True
    for name in REGISTRY_NAMES:
        rig = RIGS[name]
        v = is_balanced(mat_theory(rig, verdict_arity(rig)), verdict_arity(rig))
        results[name] = v.ok
        if not rig.is_commutative:
            witness_ok &= bool(v.witnesses)
    expected = {n: RIGS[n].is_commutative for n in REGISTRY_NAMES}
    ok = results == expected and witness_ok
    return ok, f"balanced {results}, non-commutative witness {witness_ok}"


def criterion_6():
    results = {name: affine_commutant_check(RIGS[name], 2).ok for name in ("bool2", "z2", "z3")}
    return all(results.values()), f"affine commutant both directions {results}"


def criterion_7():
    done = {}
    for kind, top in (("scalar-linear", 3), ("scalar-affine", 3), ("initial", 4)):
        ctx = context(kind)
        done[kind] = all(dist.double_commutant_check(ctx, n).ok for n in range(top + 1))
    return all(done.values()), f"D(n) = double commutant {done}"


def criterion_8():
    counts, ok = {}, True
    for kind in ("scalar-linear", "scalar-affine", "initial"):
        ctx = context(kind)
        for n in range(4):
            rep = dist.restriction_check(ctx, n)
            ok &= rep.ok and rep.counts["distributions"] == free_algebra_size(ctx.theory, n)
        counts[kind] = len(dist.distribution_object(ctx, 3))
    ok &= counts == {"scalar-linear": 8, "scalar-affine": 7, "initial": 3}
    return ok, f"restriction bijections, counts at n=3 {counts}"


def criterion_9():
    methods, ok = [], True
    plan = {"scalar-linear": (3, 2), "scalar-affine": (3, 2), "initial": (3, 3)}
    for kind, (unit_max, assoc_max) in plan.items():
        ctx = context(kind)
        for v in range(unit_max + 1):
            ok &= dist.check_left_unit(ctx, v).ok and dist.check_right_unit(ctx, v).ok
        for v in range(assoc_max + 1):
            rep = dist.check_associativity(ctx, v)
            ok &= rep.ok
            if rep.method != "exhaustive":
                methods.append(f"{kind} |V|={v}: {rep.method}")
    note = "; ".join(methods) if methods else "all exhaustive"
    return ok, f"unit and associativity laws ({note})"


def naive_filter(s, n, constraints):
    """Enumerate every table on s^n and keep the ones commuting with each constraint."""
    width = s ** n
    cand = digits(s, width).astype(np.int64)         # every table, lexicographic
    keep = np.ones(cand.shape[0], dtype=bool)
    cells = digits(s, n)
    place = s ** np.arange(n - 1, -1, -1) if n else np.zeros(0, dtype=np.int64)
    for op in constraints:
        k = op.arity
        table = op.array()
        for arg_cells in np.ndindex(*([width] * k)):
            cols = cells[list(arg_cells)] if k else np.zeros((0, n), dtype=np.int64)
            out_tuple = [table[int(sum(cols[j, i] * s ** (k - 1 - j) for j in range(k)))]
                         for i in range(n)]
            out_cell = int(np.dot(out_tuple, place)) if n else 0
            hv = cand[:, list(arg_cells)] if k else np.zeros((cand.shape[0], 0), dtype=np.int64)
            op_idx = hv @ (s ** np.arange(k - 1, -1, -1)) if k else np.zeros(cand.shape[0], dtype=np.int64)
            keep &= cand[:, out_cell] == table[op_idx]
    return cand[keep]


def criterion_10(trials=24, seed=2024):
    rng = random.Random(seed)
    shapes = [(s, n) for s in range(2, 7) for n in range(1, 5)
              if 2 <= naive_candidate_count(s, n) <= 1 << 16]
    agree = 0
    for _ in range(trials):
        s, n = rng.choice(shapes)
        cons = []
        for _ in range(rng.randint(1, 3)):
            k = rng.choice([0, 1, 2] if s ** 2 <= 36 else [0, 1])
            cons.append(OpTable(s, k, tuple(rng.randrange(s) for _ in range(s ** k))))
        want = naive_filter(s, n, cons)
        same = all(np.array_equal(enumerate_constrained(s, n, cons, backend=b), want)
                   for b in ("numba", "numpy"))
        agree += same
    return agree == trials, f"{agree}/{trials} randomized constraint sets match naive filtering"


def criterion_11():
    mat_ok = {}
    for name in REGISTRY_NAMES:
        rig = RIGS[name]
        mat_ok[name] = all(
            clone_closure_slice(rig.size, rig_generators(rig), n).as_set()
            == mat_slice(rig, n).as_set()
            for n in range(verdict_arity(rig) + 1))
    perp_ok = {}
    for kind in ("scalar-linear", "scalar-affine", "initial"):
        ctx = context(kind)
        perp = ctx.perp
        perp_ok[kind] = perp.enforcement == "exact-via-known-generators" and all(
            clone_closure_slice(ctx.carrier_size, perp.generators, n) == perp.slice(n)
            for n in perp.cached_arities)
    ok = all(mat_ok.values()) and all(perp_ok.values())
    return ok, f"closure = mat slice {mat_ok}; closure of known generators = commutant {perp_ok}"


CRITERIA = {
    1: (criterion_1, 60), 2: (criterion_2, 60), 3: (criterion_3, 30), 4: (criterion_4, 120),
    5: (criterion_5, None), 6: (criterion_6, 120), 7: (criterion_7, None),
    8: (criterion_8, None), 9: (criterion_9, 60), 10: (criterion_10, None),
    11: (criterion_11, None),
}


def run_criterion(number):
    fn, bound = CRITERIA[number]
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    within = bound is None or elapsed < bound
    return emit(number, ok and within, detail, elapsed, bound)


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    assert run_criterion(number)


if __name__ == "__main__":
    import sys
    results = [run_criterion(n) for n in sorted(CRITERIA)]
    sys.exit(0 if all(results) else 1)
