"""Commutants, commutation, and the balance/saturation verdicts."""
from dataclasses import dataclass, field

import numpy as np

from finclone.finset import (
    InputError,
    MultiOpTable,
    OpTable,
    ResourceError,
    decode_tuple,
    enumerate_constrained,
    lift_componentwise,
    naive_candidate_count,
)
from finclone.theory import (
    ConcreteTheory,
    ConsistencyError,
    TheorySlice,
    clone_closure_slice,
    projections,
    slice_compare,
)

MAX_UNSEEDED_CANDIDATES = 1 << 32
SPOT_CHECKS = 256


@dataclass
class HomCheck:
    ok: bool
    op: OpTable | None = None
    arguments: tuple = ()
    component: int | None = None

    def __bool__(self):
        return self.ok

    def to_json(self):
        if self.ok:
            return {"ok": True}
        return {"ok": False, "op": list(self.op.table), "op_arity": self.op.arity,
                "arguments": [list(a) for a in self.arguments], "component": self.component}


def is_homomorphism(generators, h) -> HomCheck:
    """Does every component of ``h: A^n -> A^m`` preserve every generator?

    On failure the first violated instance is reported.
    """
    comps = h.components if isinstance(h, MultiOpTable) else (h,)
    for ci, comp in enumerate(comps):
        s, n = comp.carrier_size, comp.arity
        table = comp.array()
        for g in generators:
            if g.carrier_size != s:
                raise InputError("generator and map live on different carriers")
            args, out = lift_componentwise(g, n)
            if g.arity:
                idx = (table[args] * (s ** np.arange(g.arity - 1, -1, -1))).sum(axis=1)
            else:
                idx = np.zeros(out.shape[0], dtype=np.int64)
            bad = np.flatnonzero(table[out] != g.array()[idx])
            if bad.size:
                first = int(bad[0])
                tuples = tuple(decode_tuple(s, n, int(c)) for c in args[first])
                return HomCheck(False, g, tuples, ci)
    return HomCheck(True)


def _seeded(generators):
    return any(g.arity in (1, 2) for g in generators)


def commutant_slice(theory: ConcreteTheory, n, generators=None, backend=None,
                    check=True) -> TheorySlice:
    """All ``h: A^n -> A`` preserving the enforced generators of ``theory``."""
    gens = theory.generators if generators is None else list(generators)
    s = theory.carrier_size
    if naive_candidate_count(s, n) > MAX_UNSEEDED_CANDIDATES and not _seeded(gens):
        raise ResourceError(
            f"commutant at arity {n} on carrier {s}: {s}^({s}^{n}) candidates and no"
            " unary or binary generator to seed propagation")
    rows = enumerate_constrained(s, n, gens, backend=backend)
    sl = TheorySlice(s, n, rows, canonical=True)
    if check:
        _assert_subtheory(sl)
    return sl


def _assert_subtheory(sl: TheorySlice):
    s, n = sl.carrier_size, sl.arity
    have = sl.as_set()
    for p in projections(s, n):
        if p.table not in have:
            raise ConsistencyError(f"commutant slice at arity {n} misses projection {p}")
    m = len(sl)
    if m == 0 or n == 0:
        return
    rng = np.random.default_rng(m * 1009 + n)
    trials = min(SPOT_CHECKS, m ** (n + 1))
    outer = rng.integers(0, m, size=trials)
    inner = rng.integers(0, m, size=(trials, n))
    width = s ** n
    place = s ** np.arange(n - 1, -1, -1)
    for o, ins in zip(outer, inner):
        rows = sl.rows[ins]                       # (n, width)
        idx = place @ rows
        comp = tuple(sl.rows[o][idx].tolist())
        if comp not in have:
            raise ConsistencyError(f"commutant slice at arity {n} not closed under superposition")
    assert width == sl.rows.shape[1]


def commutant_theory(theory: ConcreteTheory, max_arity=None, known_generators=None,
                     backend=None):
    """The commutant of ``theory`` as a concrete theory on the same carrier.

    Its enforced generators are the computed slices up to ``max_arity``, or a
    ``known_generators`` list whose clone closure has been checked against
    those slices.
    """
    K = theory.max_arity if max_arity is None else max_arity
    exact = theory.generators_exact

    def build(n):
        return commutant_slice(theory, n, backend=backend)

    perp = ConcreteTheory(theory.carrier_size, f"commutant-of({theory.provenance})", build,
                          generators=(), max_arity=K, rig=theory.rig,
                          generators_exact=False, parent=theory)
    gens = []
    for k in range(K + 1):
        gens.extend(perp.slice(k))
    perp._generators = gens
    perp.truncation = K
    perp.enforcement = "truncated-at-K"
    if known_generators is not None:
        known = list(known_generators)
        for k in range(K + 1):
            closed = clone_closure_slice(theory.carrier_size, known, k)
            if closed != perp.slice(k):
                cmp = slice_compare(closed, perp.slice(k))
                raise ConsistencyError(
                    f"known generators close to {len(closed)} operations at arity {k},"
                    f" computed commutant has {len(perp.slice(k))} ({cmp.relation})")
        perp._generators = known
        perp.generators_exact = exact
        perp.enforcement = "exact-via-known-generators"
    return perp


# ----------------------------------------------------------------------------
# verdicts

@dataclass
class Verdict:
    kind: str
    ok: bool
    max_arity: int
    per_arity: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    note: str = ""

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"kind": self.kind, "ok": self.ok, "max_arity": self.max_arity,
                "per_arity": self.per_arity, "witnesses": self.witnesses, "note": self.note}


def _same_carrier(t1, t2):
    if t1.carrier_size != t2.carrier_size:
        raise InputError(
            f"theories live on carriers {t1.carrier_size} and {t2.carrier_size}")


def _non_commuting_pair(t1, op):
    """A generator of ``t1`` that ``op`` fails to preserve, with the instance."""
    chk = is_homomorphism(t1.generators, op)
    if chk.ok:
        return None
    return {"op": list(op.table), "op_arity": op.arity,
            "against": list(chk.op.table), "against_arity": chk.op.arity,
            "arguments": [list(a) for a in chk.arguments]}


def commutes(t1: ConcreteTheory, t2: ConcreteTheory, max_arity=None, backend=None) -> Verdict:
    """Does every generator of ``t2`` commute with ``t1``, and vice versa?"""
    _same_carrier(t1, t2)
    K = max_arity or min(t1.max_arity, t2.max_arity)
    directions = []
    witnesses = []
    for a, b in ((t1, t2), (t2, t1)):
        ok = True
        cache = {}
        for g in b.generators:
            if g.arity not in cache:
                cache[g.arity] = commutant_slice(a, g.arity, backend=backend).as_set()
            if g.table not in cache[g.arity]:
                ok = False
                if len(witnesses) < 4:
                    w = _non_commuting_pair(a, g)
                    if w:
                        witnesses.append(w)
        directions.append(ok)
    if directions[0] != directions[1]:
        raise ConsistencyError("commutation is not symmetric on these theories")
    return Verdict("commutes-with", directions[0], K,
                   per_arity=[{"forward": directions[0], "backward": directions[1]}],
                   witnesses=witnesses,
                   note="both enforcement directions agree")


def _exactness_note(theory):
    if theory.generators_exact:
        return "exact: enforced generators generate the theory"
    return (f"enforced generators are the slices up to arity {theory.max_arity};"
            " verdict is relative to that generating set")


def is_commutative(theory: ConcreteTheory, max_arity=None, backend=None) -> Verdict:
    K = theory.max_arity if max_arity is None else max_arity
    per, wit, ok = [], [], True
    for n in range(K + 1):
        mine = theory.slice(n)
        perp = commutant_slice(theory, n, backend=backend)
        cmp = slice_compare(mine, perp)
        good = cmp.relation in ("equal", "left-subset")
        per.append({"arity": n, "relation": cmp.relation,
                    "theory": len(mine), "commutant": len(perp)})
        if not good:
            ok = False
            for op in cmp.left_only[:2]:
                w = _non_commuting_pair(theory, op)
                if w:
                    wit.append(w)
    return Verdict("commutative", ok, K, per, wit, _exactness_note(theory))


def is_balanced(theory: ConcreteTheory, max_arity=None, backend=None) -> Verdict:
    K = theory.max_arity if max_arity is None else max_arity
    per, wit, ok = [], [], True
    for n in range(K + 1):
        mine = theory.slice(n)
        perp = commutant_slice(theory, n, backend=backend)
        cmp = slice_compare(mine, perp)
        per.append({"arity": n, "relation": cmp.relation,
                    "theory": len(mine), "commutant": len(perp)})
        if cmp.relation != "equal":
            ok = False
            for op in cmp.left_only[:2]:
                w = _non_commuting_pair(theory, op)
                if w:
                    wit.append(w)
            for op in cmp.right_only[:2]:
                wit.append({"in_commutant_not_theory": list(op.table), "arity": n})
    return Verdict("balanced", ok, K, per, wit, _exactness_note(theory))


def double_commutant_slice(theory: ConcreteTheory, n, perp=None, max_arity=None,
                           backend=None) -> TheorySlice:
    perp = perp or commutant_theory(theory, max_arity, backend=backend)
    return commutant_slice(perp, n, backend=backend)


def is_saturated(theory: ConcreteTheory, max_arity=None, perp=None, backend=None) -> Verdict:
    """Truncated double-commutant check.

    The double commutant enforces the commutant's slices up to ``max_arity``
    (or verified known generators). Fewer constraints can only enlarge it, so
    equality with the theory certifies saturation at the checked arities,
    while a strict superset is only "not certified".
    """
    K = theory.max_arity if max_arity is None else max_arity
    perp = perp or commutant_theory(theory, K, backend=backend)
    per, wit, ok = [], [], True
    refuted = False
    for n in range(K + 1):
        mine = theory.slice(n)
        dc = commutant_slice(perp, n, backend=backend)
        cmp = slice_compare(mine, dc)
        per.append({"arity": n, "relation": cmp.relation,
                    "theory": len(mine), "double_commutant": len(dc)})
        if cmp.relation == "equal":
            continue
        ok = False
        if cmp.left_only:
            # unit of the Galois connection failed: exact direction
            refuted = True
            wit.extend({"missing_from_double_commutant": list(op.table), "arity": n}
                       for op in cmp.left_only[:2])
        wit.extend({"extra_in_double_commutant": list(op.table), "arity": n}
                   for op in cmp.right_only[:2])
    if ok:
        note = f"certified at arities <= {K} ({perp.enforcement})"
    elif refuted:
        note = "refuted: theory not contained in its double commutant"
    elif perp.enforcement == "exact-via-known-generators" and perp.generators_exact:
        note = "refuted: double commutant computed from exact generators is larger"
    else:
        note = "not certified: truncated double commutant strictly larger"
    return Verdict("saturated", ok, K, per, wit, note)


# ----------------------------------------------------------------------------
# theorem instances over a rig

def _slice_equality_verdict(kind, pairs, K, note):
    per, wit, ok = [], [], True
    for n, label, got, want in pairs:
        cmp = slice_compare(got, want)
        per.append({"arity": n, "direction": label, "relation": cmp.relation,
                    "computed": len(got), "expected": len(want)})
        if cmp.relation != "equal":
            ok = False
            wit.append({"arity": n, "direction": label, **cmp.to_json(2)})
    return Verdict(kind, ok, K, per, wit, note)


def mutual_commutant_check(rig, max_arity=None, backend=None) -> Verdict:
    """Left and right module theories of ``rig`` are each other's commutant."""
    from finclone.rig import opposite
    from finclone.theory import check_max_arity, mat_slice, mat_theory

    K = check_max_arity(rig.size, max_arity)
    left, right = mat_theory(rig, K), mat_theory(opposite(rig), K)
    pairs = []
    for n in range(K + 1):
        pairs.append((n, "commutant(mat R) = mat R^op",
                      commutant_slice(left, n, backend=backend), mat_slice(opposite(rig), n)))
        pairs.append((n, "commutant(mat R^op) = mat R",
                      commutant_slice(right, n, backend=backend), mat_slice(rig, n)))
    return _slice_equality_verdict("mutual-commutant", pairs, K,
                                   "exact: module theories are generated by add, scalars, zero")


def affine_commutant_check(rig, max_arity=None, converse=True, backend=None) -> Verdict:
    """Affine core of mat(R) versus the commutant of pointed right R-modules.

    The forward direction holds for every rig; ``converse`` also compares
    the commutant of the affine core with the pointed-module slices.
    """
    from finclone.theory import (affine_core_slice, check_max_arity, mat_aff_theory,
                                 mat_theory, pointed_module_slice, pointed_module_theory)

    K = check_max_arity(rig.size, max_arity)
    pointed = pointed_module_theory(rig, K)
    mat = mat_theory(rig, K)
    aff = mat_aff_theory(rig, K)
    pairs = []
    for n in range(K + 1):
        pairs.append((n, "commutant(pointed) = affine",
                      commutant_slice(pointed, n, backend=backend), affine_core_slice(mat, n)))
        if converse:
            pairs.append((n, "commutant(affine) = pointed",
                          commutant_slice(aff, n, backend=backend),
                          pointed_module_slice(rig, n)))
    note = "commutant of the affine core enforces its slices up to arity %d" % K
    return _slice_equality_verdict("affine-commutant", pairs, K, note)
