"""Functional-analytic contexts and the functional distribution monad on finite sets.

For a context ``(T, S)`` and a finite set ``V = range(k)``, ``D(V)`` is the
set of maps ``S^V -> S`` that preserve every operation of the commutant of
``T``, where ``S^V`` carries the pointwise structure.  A function
``f: V -> S`` is stored as the cell ``encode(f(0), ..., f(k-1))``, so an
element of ``D(V)`` is a flat table of length ``|S| ** (|S| ** k)``.
"""
import itertools
from dataclasses import dataclass, field

import numpy as np

from finclone.commutant import (
    Verdict,
    commutant_slice,
    commutant_theory,
    is_commutative,
    is_saturated,
)
from finclone.finset import (
    InputError,
    OpTable,
    ResourceError,
    constant,
    digits,
    enumerate_homs,
    naive_candidate_count,
    powers,
)
from finclone.rig import FiniteRig, opposite
from finclone.theory import (
    ConcreteTheory,
    ConsistencyError,
    TheorySlice,
    check_max_arity,
    cotensor_ops,
    initial_theory,
    mat_aff_theory,
    mat_slice,
    mat_theory,
    pointed_module_theory,
    rig_generators,
    slice_compare,
)

MAX_FUNCTION_CELLS = 1 << 12
MAX_CANDIDATES = 1 << 32


class ContextRejected(RuntimeError):
    def __init__(self, axiom, verdict):
        self.axiom = axiom
        self.verdict = verdict
        super().__init__(f"context rejected: {axiom} failed ({verdict.note});"
                         f" witnesses {verdict.witnesses[:1]}")


class TheoremViolation(AssertionError):
    pass


CONTEXT_KINDS = ("scalar-linear", "scalar-affine", "initial")


@dataclass
class Context:
    name: str
    theory: ConcreteTheory
    carrier_size: int
    perp: ConcreteTheory
    commutative: Verdict
    saturated: Verdict
    exactness: str
    rig: FiniteRig | None = None
    _objects: dict = field(default_factory=dict, repr=False)

    @property
    def perp_generators(self):
        return self.perp.generators

    @property
    def max_arity(self):
        return self.theory.max_arity

    def summary(self):
        return {
            "name": self.name,
            "carrier": self.carrier_size,
            "theory": self.theory.provenance,
            "commutative": self.commutative.to_json(),
            "saturated": self.saturated.to_json(),
            "balanced": self.is_balanced(),
            "exactness": self.exactness,
            "perp_generators": [{"arity": g.arity, "table": list(g.table)}
                                for g in self.perp_generators],
        }

    def is_balanced(self):
        return all(self.theory.slice(n) == self.perp.slice(n)
                   for n in range(self.max_arity + 1))


def _bool2_like(rig):
    """True when the rig is the two-element lattice with meet as addition."""
    return (rig.size == 2 and rig.zero == 1 and rig.one == 0
            and rig.add.table == (0, 0, 0, 1) and rig.mul.table == (0, 1, 1, 1))


def _ring(rig):
    return all(any(rig.plus(a, b) == rig.zero for b in rig.elements) for a in rig.elements)


def known_perp_generators(kind, carrier_size, rig=None):
    """Generating sets for the commutant in the shipped contexts, when known.

    Each is checked against the computed commutant slices before use.
    """
    s = carrier_size
    if kind == "scalar-linear":
        if _bool2_like(rig):
            return [rig.add, constant(2, 0, rig.zero)]
        # the commutant of left R-modules is right R-modules
        return rig_generators(opposite(rig))
    if kind == "scalar-affine":
        if _bool2_like(rig):
            return [rig.add, constant(2, 0, 1), constant(2, 0, 0)]
        if _ring(rig):
            return pointed_module_theory(rig).generators
        return None
    if kind == "initial":
        if s == 2:
            return [OpTable.from_function(2, 2, lambda a, b: a & b),
                    OpTable.from_function(2, 1, lambda a: 1 - a),
                    constant(2, 0, 1)]
        return None
    raise InputError(f"unknown context kind {kind!r}")


def make_theory(kind, rig=None, carrier_size=2, max_arity=None):
    if kind == "scalar-linear":
        return mat_theory(rig, max_arity)
    if kind == "scalar-affine":
        return mat_aff_theory(rig, max_arity)
    if kind == "initial":
        return initial_theory(carrier_size, max_arity)
    raise InputError(f"unknown context kind {kind!r}; expected one of {CONTEXT_KINDS}")


def build_context(kind, rig=None, max_arity=None, known_generators="default",
                  carrier_size=None, backend=None) -> Context:
    """Materialize ``T`` on ``S``, run the context axioms, compute ``T⊥``."""
    if kind in ("scalar-linear", "scalar-affine"):
        if rig is None:
            raise InputError(f"{kind} context needs a rig")
        s = rig.size
        K = check_max_arity(s, max_arity)
        for n in range(K + 1):
            if not mat_slice(rig, n).faithful:
                raise ContextRejected(
                    "faithfulness",
                    Verdict("faithful", False, K, note=f"matrix presentation merges tables at arity {n}"))
        if not rig.is_commutative:
            pass  # the commutativity verdict below rejects with a witness
    else:
        s = carrier_size or (rig.size if rig is not None else 2)
        K = check_max_arity(s, max_arity)
    theory = make_theory(kind, rig, s, K)
    return context_from_theory(kind, theory, rig=rig, max_arity=K,
                               known_generators=known_generators, backend=backend)


def context_from_theory(name, theory, rig=None, max_arity=None, known_generators="default",
                        backend=None) -> Context:
    K = theory.max_arity if max_arity is None else max_arity
    comm = is_commutative(theory, K, backend=backend)
    if not comm.ok:
        raise ContextRejected("commutativity", comm)
    if known_generators == "default":
        known = known_perp_generators(name, theory.carrier_size, rig) \
            if name in CONTEXT_KINDS else None
    else:
        known = known_generators
    perp = commutant_theory(theory, K, known_generators=known, backend=backend)
    sat = is_saturated(theory, K, perp=perp, backend=backend)
    if not sat.ok:
        raise ContextRejected("saturation", sat)
    exactness = perp.enforcement
    if exactness == "truncated-at-K":
        exactness = f"truncated-at-{K}, superset-certified"
    return Context(name, theory, theory.carrier_size, perp, comm, sat, exactness, rig)


# ----------------------------------------------------------------------------
# D(V)

def cotensor_structure(ctx: Context, v_size):
    """Each commutant generator acting pointwise on ``S^V``."""
    gens = ctx.perp_generators
    return list(zip(gens, cotensor_ops(gens, v_size)))


@dataclass
class DistObject:
    context: Context
    v_size: int
    rows: np.ndarray
    exactness: str

    def __post_init__(self):
        self.rows.setflags(write=False)
        self._index = {tuple(r): i for i, r in enumerate(self.rows.tolist())}

    def __len__(self):
        return self.rows.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self.element(i)

    def element(self, i):
        return DistElement(self, i, tuple(self.rows[i].tolist()))

    def index_of(self, table):
        return self._index.get(tuple(table))

    def __contains__(self, table):
        return self.index_of(table) is not None

    @property
    def n_functions(self):
        return self.context.carrier_size ** self.v_size

    def to_json(self):
        return {"v_size": self.v_size, "count": len(self),
                "elements": self.rows.tolist(), "exactness": self.exactness}


@dataclass(frozen=True)
class DistElement:
    obj: DistObject
    index: int
    table: tuple

    def __call__(self, f):
        """Value on a function ``f: V -> S`` given as a tuple or a cell."""
        if isinstance(f, (int, np.integer)):
            return self.table[int(f)]
        s = self.obj.context.carrier_size
        cell = 0
        for x in f:
            cell = cell * s + x
        return self.table[cell]


def distribution_object(ctx: Context, v_size, backend=None) -> DistObject:
    key = ("D", v_size)
    if key in ctx._objects:
        return ctx._objects[key]
    s = ctx.carrier_size
    cells = s ** v_size
    gens = ctx.perp_generators
    seeded = any(g.arity in (1, 2) for g in gens)
    if cells > MAX_FUNCTION_CELLS or (naive_candidate_count(s, v_size) > MAX_CANDIDATES
                                      and not seeded):
        raise ResourceError(
            f"D(V) with |V|={v_size} needs tables over {cells} functions; guard is"
            f" {MAX_FUNCTION_CELLS} functions (try |V| <= "
            f"{int(np.log(MAX_FUNCTION_CELLS) / np.log(s))})")
    src_ops = cotensor_ops(gens, v_size)
    rows = enumerate_homs(cells, src_ops, s, gens, backend=backend)
    obj = DistObject(ctx, v_size, rows, ctx.exactness)
    ctx._objects[key] = obj
    return obj


def _function_cells(s, v_size):
    """Row ``c`` is the function ``V -> S`` stored at cell ``c``."""
    return digits(s, v_size)


def dirac(ctx: Context, v_size, v, obj=None) -> DistElement:
    if not 0 <= v < v_size:
        raise InputError(f"point {v} outside V of size {v_size}")
    obj = obj or distribution_object(ctx, v_size)
    table = _function_cells(ctx.carrier_size, v_size)[:, v]
    i = obj.index_of(table.tolist())
    if i is None:
        raise TheoremViolation(f"Dirac at {v} is not a member of D({v_size})")
    return obj.element(i)


def dirac_indices(ctx, v_size, obj=None):
    obj = obj or distribution_object(ctx, v_size)
    return np.array([dirac(ctx, v_size, v, obj).index for v in range(v_size)], dtype=np.int64)


def precompose_cells(s, g, w_size):
    """Cell of ``h ∘ g`` for each cell ``h`` of ``S^W``; ``g`` maps V into W."""
    g = np.asarray(g, dtype=np.int64)
    if g.size and (g.min() < 0 or g.max() >= w_size):
        raise InputError("function values outside the codomain")
    hw = _function_cells(s, w_size)
    composed = hw[:, g] if g.size else np.zeros((hw.shape[0], 0), dtype=np.int64)
    return composed @ powers(s, g.size) if g.size else np.zeros(hw.shape[0], dtype=np.int64)


def dmap(ctx: Context, g, w_size, src=None, dst=None) -> np.ndarray:
    """Index map ``D(V) -> D(W)`` induced by ``g: V -> W``: ``μ ↦ (h ↦ μ(h∘g))``."""
    g = list(g)
    src = src or distribution_object(ctx, len(g))
    dst = dst or distribution_object(ctx, w_size)
    pre = precompose_cells(ctx.carrier_size, g, w_size)
    images = src.rows[:, pre]
    out = np.empty(len(src), dtype=np.int64)
    for i, row in enumerate(images.tolist()):
        j = dst.index_of(row)
        if j is None:
            raise TheoremViolation(f"D(g) sends element {i} of D({len(g)}) outside D({w_size})")
        out[i] = j
    return out


def evaluation_cells(obj: DistObject):
    """For each ``f`` in ``S^V``, the cell of ``μ ↦ μ(f)`` in ``S^{D(V)}``."""
    s = obj.context.carrier_size
    return obj.rows.T @ powers(s, len(obj))


def mult(ctx: Context, v_size, outer=None, inner=None) -> np.ndarray:
    """Index map ``D(D(V)) -> D(V)``: ``Ξ ↦ (f ↦ Ξ(μ ↦ μ(f)))``."""
    inner = inner or distribution_object(ctx, v_size)
    outer = outer or distribution_object(ctx, len(inner))
    ev = evaluation_cells(inner)
    images = outer.rows[:, ev]
    out = np.empty(len(outer), dtype=np.int64)
    for i, row in enumerate(images.tolist()):
        j = inner.index_of(row)
        if j is None:
            raise TheoremViolation(f"multiplication sends element {i} outside D({v_size})")
        out[i] = j
    return out


# ----------------------------------------------------------------------------
# monad laws

@dataclass
class LawReport:
    law: str
    v_size: int
    ok: bool
    checked: int
    method: str
    failures: list = field(default_factory=list)

    def to_json(self):
        return {"law": self.law, "v_size": self.v_size, "ok": self.ok,
                "checked": self.checked, "method": self.method,
                "failures": self.failures[:4]}


def check_left_unit(ctx, v_size):
    """``κ ∘ δ_{D(V)} = id`` on ``D(V)``."""
    dv = distribution_object(ctx, v_size)
    ddv = distribution_object(ctx, len(dv))
    delta = dirac_indices(ctx, len(dv), ddv)
    kappa = mult(ctx, v_size, ddv, dv)
    got = kappa[delta]
    bad = np.flatnonzero(got != np.arange(len(dv))).tolist()
    return LawReport("left-unit", v_size, not bad, len(dv), "exhaustive", bad)


def check_right_unit(ctx, v_size):
    """``κ ∘ D(δ_V) = id`` on ``D(V)``."""
    dv = distribution_object(ctx, v_size)
    ddv = distribution_object(ctx, len(dv))
    delta_v = dirac_indices(ctx, v_size, dv)
    d_delta = dmap(ctx, delta_v, len(dv), dv, ddv)
    kappa = mult(ctx, v_size, ddv, dv)
    got = kappa[d_delta]
    bad = np.flatnonzero(got != np.arange(len(dv))).tolist()
    return LawReport("right-unit", v_size, not bad, len(dv), "exhaustive", bad)


def check_associativity(ctx, v_size, max_cells=MAX_FUNCTION_CELLS):
    """``κ ∘ κ_{D(V)} = κ ∘ D(κ_V)`` on ``D(D(D(V)))``.

    When ``D(D(D(V)))`` is small enough it is enumerated and both sides are
    compared element by element.  Otherwise the check is made on the cells
    both sides feed to ``Ξ``: for each ``f`` in ``S^V`` the functions
    ``ν ↦ ν(μ ↦ μ(f))`` and ``ν ↦ κ(ν)(f)`` on ``D(D(V))`` must coincide,
    which gives the law for every ``Ξ: S^{D(D(V))} -> S`` at once.
    """
    s = ctx.carrier_size
    dv = distribution_object(ctx, v_size)
    ddv = distribution_object(ctx, len(dv))
    kappa = mult(ctx, v_size, ddv, dv)
    # cells fed to Ξ by the two sides
    ev_v = evaluation_cells(dv)                       # f -> cell in S^{D(V)}
    lhs_cells = ddv.rows[:, ev_v].T @ powers(s, len(ddv))      # ν ↦ ν(ev_f)
    rhs_cells = dv.rows[kappa][:, np.arange(dv.n_functions)].T @ powers(s, len(ddv))
    cell_bad = np.flatnonzero(lhs_cells != rhs_cells).tolist()
    if s ** len(ddv) > max_cells:
        return LawReport("associativity", v_size, not cell_bad, len(ev_v),
                         "pointwise on S^V (covers every Ξ)", cell_bad)
    dddv = distribution_object(ctx, len(ddv))
    kappa_d = mult(ctx, len(dv), dddv, ddv)
    d_kappa = dmap(ctx, kappa, len(dv), dddv, ddv)
    left = kappa[kappa_d]
    right = kappa[d_kappa]
    bad = np.flatnonzero(left != right).tolist()
    ok = not bad and not cell_bad
    return LawReport("associativity", v_size, ok, len(dddv), "exhaustive", bad + cell_bad)


def check_naturality(ctx, g, w_size):
    """``D(g) ∘ δ_V = δ_W ∘ g`` pointwise."""
    g = list(g)
    dv = distribution_object(ctx, len(g))
    dw = distribution_object(ctx, w_size)
    dg = dmap(ctx, g, w_size, dv, dw)
    lhs = dg[dirac_indices(ctx, len(g), dv)]
    rhs = dirac_indices(ctx, w_size, dw)[np.asarray(g, dtype=np.int64)] if g else lhs
    return bool(np.array_equal(lhs, rhs))


def check_functor_laws(ctx, v_size, w_size=None):
    """``D(id) = id`` and ``D(g2 ∘ g1) = D(g2) ∘ D(g1)`` over all maps between small sets."""
    w_size = v_size if w_size is None else w_size
    ident = dmap(ctx, list(range(v_size)), v_size)
    ok = bool(np.array_equal(ident, np.arange(len(distribution_object(ctx, v_size)))))
    checked = 0
    for g1 in itertools.product(range(w_size), repeat=v_size):
        for g2 in itertools.product(range(v_size), repeat=w_size):
            comp = [g2[x] for x in g1]
            lhs = dmap(ctx, comp, v_size)
            rhs = dmap(ctx, g2, v_size)[dmap(ctx, g1, w_size)]
            ok &= bool(np.array_equal(lhs, rhs))
            checked += 1
    return LawReport("functor", v_size, ok, checked, "exhaustive")


# ----------------------------------------------------------------------------
# theorems

@dataclass
class TheoremReport:
    theorem: str
    n: int
    ok: bool
    counts: dict
    detail: dict = field(default_factory=dict)

    def to_json(self):
        return {"theorem": self.theorem, "n": self.n, "ok": self.ok,
                "counts": self.counts, **self.detail}


def restriction_check(ctx: Context, n) -> TheoremReport:
    """``D(n)`` is in bijection with the n-ary operations of ``T``.

    The map sends ``ω`` to ``f ↦ ω(f(0), ..., f(n-1))``.
    """
    dn = distribution_object(ctx, n)
    sl = ctx.theory.slice(n)
    fcells = _function_cells(ctx.carrier_size, n)
    images = []
    for op in sl:
        t = op.array()
        idx = fcells @ powers(ctx.carrier_size, n) if n else np.zeros(1, dtype=np.int64)
        images.append(dn.index_of(t[idx].tolist()))
    injective = None not in images and len(set(images)) == len(images)
    surjective = injective and len(set(images)) == len(dn)
    ok = injective and surjective and len(dn) == len(sl)
    rep = TheoremReport("restriction", n, ok,
                        {"distributions": len(dn), "operations": len(sl)},
                        {"injective": injective, "surjective": surjective,
                         "bijection": [int(i) if i is not None else None for i in images]})
    if not ok:
        raise TheoremViolation(f"restriction fails at n={n}: {rep.counts}")
    return rep


def double_commutant_check(ctx: Context, n, backend=None) -> TheoremReport:
    """``D(n)`` (homs out of the cotensor) equals the commutant of ``T⊥`` at arity n."""
    dn = distribution_object(ctx, n, backend=backend)
    via_commutant = commutant_slice(ctx.perp, n, backend=backend)
    via_dist = TheorySlice(ctx.carrier_size, n, dn.rows, canonical=True)
    cmp = slice_compare(via_dist, via_commutant)
    rep = TheoremReport("double-commutant", n, cmp.relation == "equal",
                        {"distributions": len(dn), "double_commutant": len(via_commutant)},
                        {"comparison": cmp.to_json()})
    if not rep.ok:
        raise TheoremViolation(f"double commutant differs from D({n}): {cmp.relation}")
    return rep


# ----------------------------------------------------------------------------
# filters

@dataclass
class Classification:
    family: list                 # subsets of V as sorted tuples
    upward_closed: bool
    meet_closed: bool
    contains_top: bool
    excludes_bottom: bool
    prime: bool
    name: str
    principal_generator: tuple | None

    def to_json(self):
        return {
            "family": [list(a) for a in self.family],
            "upward_closed": self.upward_closed,
            "meet_closed": self.meet_closed,
            "contains_top": self.contains_top,
            "excludes_bottom": self.excludes_bottom,
            "prime": self.prime,
            "name": self.name,
            "principal_generator": None if self.principal_generator is None
            else list(self.principal_generator),
        }


def subsets(v_size):
    return [tuple(i for i in range(v_size) if mask >> i & 1) for mask in range(1 << v_size)]


def characteristic_cell(subset, v_size):
    cell = 0
    for v in range(v_size):
        cell = cell * 2 + (1 if v in subset else 0)
    return cell


def classify_family(family, v_size) -> Classification:
    fam = {frozenset(a) for a in family}
    everything = frozenset(range(v_size))
    all_sets = [frozenset(a) for a in subsets(v_size)]
    upward = all(b in fam for a in fam for b in all_sets if a <= b)
    meets = all((a & b) in fam for a in fam for b in fam)
    top = everything in fam
    proper = frozenset() not in fam
    prime = all((a in fam or b in fam) for a in all_sets for b in all_sets if (a | b) in fam)
    is_filter = upward and meets and top
    gen = None
    if is_filter:
        core = frozenset.intersection(*fam) if fam else everything
        if fam == {b for b in all_sets if core <= b}:
            gen = tuple(sorted(core))
    if not is_filter:
        name = "not a filter"
    elif not proper:
        name = "improper filter"
    elif prime:
        name = "ultrafilter"
    else:
        name = "proper filter"
    return Classification(sorted(tuple(sorted(a)) for a in fam), upward, meets, top,
                          proper, prime and proper, name, gen)


def classify(ctx: Context, element: DistElement) -> Classification:
    """Read an element of ``D(V)`` over a two-element ``S`` as a family of subsets."""
    if ctx.carrier_size != 2:
        raise InputError("classification needs a two-valued context")
    v = element.obj.v_size
    family = [a for a in subsets(v) if element.table[characteristic_cell(a, v)] == 1]
    return classify_family(family, v)


def brute_force_filters(v_size):
    """Every filter on ``range(v_size)``, found by scanning all families of subsets."""
    sets = subsets(v_size)
    found = []
    for mask in range(1 << len(sets)):
        fam = [sets[i] for i in range(len(sets)) if mask >> i & 1]
        c = classify_family(fam, v_size)
        if c.upward_closed and c.meet_closed and c.contains_top:
            found.append(tuple(sorted(fam)))
    return found
