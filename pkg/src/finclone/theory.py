"""Concrete Lawvere theories as clones on a finite carrier.

A theory is materialized inside the full theory of its carrier: its arity-n
part is a set of n-ary operation tables (a :class:`TheorySlice`), computed on
demand and cached per arity.
"""
import threading
from dataclasses import dataclass, field

import numpy as np

from finclone.finset import (
    InputError,
    OpTable,
    ResourceError,
    canonical_rows,
    constant,
    digits,
    naive_candidate_count,
    powers,
    projections,
    superpose_arrays,
)
from finclone.rig import FiniteRig, opposite


class ConsistencyError(RuntimeError):
    """Two independent routes to the same object disagreed."""


class DegenerateRigError(InputError):
    pass


DEFAULT_MAX_CANDIDATES = 1 << 20
CLOSURE_GUARD = 1 << 22


def default_max_arity(carrier_size):
    if carrier_size <= 3:
        return 3
    if carrier_size == 4:
        return 2
    return 1


def check_max_arity(carrier_size, max_arity):
    limit = default_max_arity(carrier_size)
    if max_arity is None:
        return limit
    if max_arity > limit:
        raise ResourceError(
            f"max_arity {max_arity} exceeds the bound {limit} for carrier {carrier_size}")
    return max_arity


class TheorySlice:
    """The n-ary operations of a theory, as sorted unique table rows."""

    __slots__ = ("carrier_size", "arity", "rows", "merged")

    def __init__(self, carrier_size, arity, rows, merged=0, canonical=False):
        width = carrier_size ** arity
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, width)
        if not canonical:
            rows = canonical_rows(rows, width)
        rows.setflags(write=False)
        self.carrier_size = carrier_size
        self.arity = arity
        self.rows = rows
        self.merged = merged

    @classmethod
    def from_ops(cls, carrier_size, arity, ops):
        width = carrier_size ** arity
        rows = np.array([op.table for op in ops], dtype=np.int64).reshape(-1, width)
        return cls(carrier_size, arity, rows)

    def __len__(self):
        return self.rows.shape[0]

    def __iter__(self):
        for row in self.rows.tolist():
            yield OpTable(self.carrier_size, self.arity, tuple(row))

    def __getitem__(self, i):
        return OpTable(self.carrier_size, self.arity, tuple(self.rows[i].tolist()))

    def __contains__(self, op):
        if isinstance(op, OpTable):
            if op.carrier_size != self.carrier_size or op.arity != self.arity:
                return False
            key = op.table
        else:
            key = tuple(op)
        return key in self.as_set()

    def as_set(self):
        return {tuple(r) for r in self.rows.tolist()}

    def ops(self):
        return list(self)

    def __eq__(self, other):
        if not isinstance(other, TheorySlice):
            return NotImplemented
        return (self.carrier_size == other.carrier_size and self.arity == other.arity
                and np.array_equal(self.rows, other.rows))

    __hash__ = None

    def __repr__(self):
        return f"TheorySlice(s={self.carrier_size}, n={self.arity}, count={len(self)})"

    def to_json(self):
        return self.rows.tolist()


class CoefficientSlice(TheorySlice):
    """A slice presented by coefficient vectors, keeping the vector->row map."""

    __slots__ = ("vectors", "vector_to_row")

    def __init__(self, carrier_size, arity, raw_rows, vectors):
        width = carrier_size ** arity
        raw_rows = np.asarray(raw_rows, dtype=np.int64).reshape(-1, width)
        uniq, inverse = np.unique(raw_rows, axis=0, return_inverse=True)
        super().__init__(carrier_size, arity, uniq,
                         merged=raw_rows.shape[0] - uniq.shape[0], canonical=True)
        self.vectors = vectors
        self.vector_to_row = np.asarray(inverse).reshape(-1)

    @property
    def faithful(self):
        return self.merged == 0


# ----------------------------------------------------------------------------
# direct slices

def full_theory_slice(carrier_size, n, max_candidates=DEFAULT_MAX_CANDIDATES):
    count = naive_candidate_count(carrier_size, n)
    if count > max_candidates:
        raise ResourceError(
            f"full theory slice has {carrier_size}^({carrier_size}^{n}) = {count} tables;"
            f" guard is {max_candidates}")
    return TheorySlice(carrier_size, n, digits(carrier_size, carrier_size ** n),
                       canonical=True)


def initial_theory_slice(carrier_size, n):
    return TheorySlice.from_ops(carrier_size, n, projections(carrier_size, n))


def _require_nondegenerate(rig):
    if rig.is_degenerate:
        raise DegenerateRigError(f"rig {rig.name!r} is degenerate (zero == one)")


def _add_mul_arrays(rig):
    s = rig.size
    return rig.add.array().reshape(s, s), rig.mul.array().reshape(s, s)


def mat_slice(rig: FiniteRig, n) -> CoefficientSlice:
    """Operations ``x -> sum_i r_i * x_i`` for all ``r`` in ``R^n``."""
    _require_nondegenerate(rig)
    s = rig.size
    add, mul = _add_mul_arrays(rig)
    vecs = digits(s, n)
    pts = digits(s, n)
    vals = np.full((vecs.shape[0], pts.shape[0]), rig.zero, dtype=np.int64)
    for i in range(n):
        vals = add[vals, mul[vecs[:, i][:, None], pts[:, i][None, :]]]
    return CoefficientSlice(s, n, vals, vecs)


def pointed_module_slice(rig: FiniteRig, n) -> CoefficientSlice:
    """Operations ``x -> u_0 + sum_i x_i * u_i`` for all ``u`` in ``R^(1+n)``.

    Scalars multiply on the right, so this is the pointed right-module
    theory of ``R`` (left modules over the opposite rig) acting on ``R``.
    """
    _require_nondegenerate(rig)
    s = rig.size
    add, mul = _add_mul_arrays(rig)
    vecs = digits(s, n + 1)
    pts = digits(s, n)
    vals = np.repeat(vecs[:, 0][:, None], pts.shape[0], axis=1)
    for i in range(n):
        vals = add[vals, mul[pts[:, i][None, :], vecs[:, i + 1][:, None]]]
    return CoefficientSlice(s, n, vals, vecs)


def diagonal_cells(carrier_size, n):
    return np.array([a * sum(carrier_size ** j for j in range(n)) for a in range(carrier_size)],
                    dtype=np.int64)


def diagonal_fixed(sl: TheorySlice) -> TheorySlice:
    """Rows ``w`` with ``w(a, ..., a) == a`` for every carrier point ``a``."""
    s, n = sl.carrier_size, sl.arity
    cells = diagonal_cells(s, n)
    keep = (sl.rows[:, cells] == np.arange(s)).all(axis=1)
    return TheorySlice(s, n, sl.rows[keep], canonical=True)


# ----------------------------------------------------------------------------
# concrete theories

class ConcreteTheory:
    """A clone on ``range(carrier_size)`` with lazily computed slices.

    ``generators`` are the operations enforced when a commutant of this
    theory is computed; ``generators_exact`` records whether they are known
    to generate the whole theory or only its slices up to ``max_arity``.
    """

    def __init__(self, carrier_size, provenance, builder, generators=(),
                 max_arity=None, rig=None, generators_exact=True, parent=None):
        self.carrier_size = carrier_size
        self.provenance = provenance
        self.max_arity = check_max_arity(carrier_size, max_arity)
        self.rig = rig
        self.parent = parent
        self._builder = builder
        self._generators = list(generators) if not callable(generators) else None
        self._generator_fn = generators if callable(generators) else None
        self.generators_exact = generators_exact
        self._cache = {}
        self._locks = {}
        self._guard = threading.Lock()

    @property
    def generators(self):
        if self._generators is None:
            self._generators = list(self._generator_fn(self))
        return self._generators

    def slice(self, n) -> TheorySlice:
        if n < 0:
            raise InputError("arity must be non-negative")
        hit = self._cache.get(n)
        if hit is not None:
            return hit
        with self._guard:
            lock = self._locks.setdefault(n, threading.Lock())
        with lock:
            hit = self._cache.get(n)
            if hit is None:
                hit = self._builder(n)
                self._cache[n] = hit
        return hit

    @property
    def cached_arities(self):
        return sorted(self._cache)

    def __repr__(self):
        return f"ConcreteTheory({self.provenance}, carrier={self.carrier_size})"


def _lifted_generator_rows(carrier_size, generators):
    return [g for g in generators if g.arity == 0]


def clone_closure_slice(carrier_size, generators, n, guard=CLOSURE_GUARD):
    """Least set of n-ary tables with projections and constants, closed under generators."""
    width = carrier_size ** n
    seed = [p.table for p in projections(carrier_size, n)]
    seed += [constant(carrier_size, n, g.table[0]).table
             for g in _lifted_generator_rows(carrier_size, generators)]
    current = canonical_rows(np.array(seed, dtype=np.int64).reshape(-1, width), width)
    ops = [g for g in generators if g.arity > 0]
    while True:
        m = current.shape[0]
        produced = [current]
        for g in ops:
            k = g.arity
            if m ** k > guard:
                raise ResourceError(
                    f"closure step needs {m}^{k} superpositions; guard is {guard}")
            idx = digits(m, k) if m else np.zeros((0, k), dtype=np.int64)
            if idx.shape[0] == 0:
                continue
            inner = current[idx]  # (m^k, k, width)
            produced.append(superpose_arrays(carrier_size, g.array(), inner))
        grown = canonical_rows(np.concatenate(produced), width)
        if grown.shape[0] == m:
            return TheorySlice(carrier_size, n, grown, canonical=True)
        current = grown


def full_theory(carrier_size, max_arity=None, max_candidates=DEFAULT_MAX_CANDIDATES):
    def gens(t):
        out = []
        for k in range(3):
            out.extend(full_theory_slice(carrier_size, k, max_candidates))
        return out
    return ConcreteTheory(carrier_size, "full",
                          lambda n: full_theory_slice(carrier_size, n, max_candidates),
                          generators=gens, max_arity=max_arity)


def initial_theory(carrier_size, max_arity=None):
    return ConcreteTheory(carrier_size, "initial",
                          lambda n: initial_theory_slice(carrier_size, n),
                          generators=(), max_arity=max_arity)


def rig_generators(rig: FiniteRig):
    """add, the left scalar multiplications, and the constant zero."""
    s = rig.size
    gens = [rig.add, constant(s, 0, rig.zero)]
    gens += [OpTable.from_function(s, 1, lambda x, r=r: rig.times(r, x)) for r in range(s)]
    return gens


def mat_theory(rig: FiniteRig, max_arity=None):
    _require_nondegenerate(rig)
    return ConcreteTheory(rig.size, f"mat({rig.name})", lambda n: mat_slice(rig, n),
                          generators=rig_generators(rig), max_arity=max_arity, rig=rig)


def pointed_module_theory(rig: FiniteRig, max_arity=None):
    """The pointed right-module theory of ``rig`` realized on ``rig`` with point 1."""
    _require_nondegenerate(rig)
    s = rig.size
    gens = [rig.add, constant(s, 0, rig.zero), constant(s, 0, rig.one)]
    gens += [OpTable.from_function(s, 1, lambda x, u=u: rig.times(x, u)) for u in range(s)]
    return ConcreteTheory(s, f"pointed_mat({opposite(rig).name})",
                          lambda n: pointed_module_slice(rig, n),
                          generators=gens, max_arity=max_arity, rig=rig)


def affine_core_slice(theory: ConcreteTheory, n) -> TheorySlice:
    """Operations of ``theory`` fixing the diagonal.

    For matrix theories the row-sum-one coefficient filter is computed too
    and must agree.
    """
    sl = theory.slice(n)
    core = diagonal_fixed(sl)
    if theory.provenance.startswith("mat(") and isinstance(sl, CoefficientSlice):
        rig = theory.rig
        sums = np.array([rig.sum(v) for v in sl.vectors.tolist()], dtype=np.int64)
        rows = np.unique(sl.vector_to_row[sums == rig.one])
        by_rows = TheorySlice(sl.carrier_size, n, sl.rows[rows], canonical=True)
        if by_rows != core:
            raise ConsistencyError(
                f"affine core of {theory.provenance} at arity {n}: diagonal filter gives"
                f" {len(core)} operations, row-sum filter gives {len(by_rows)}")
    return core


AFFINE_GENERATOR_ARITY = 3


def affine_core(theory: ConcreteTheory, max_arity=None):
    """The affine core as a theory.

    Its generators are its slices up to ``max_arity``; for matrix theories
    the slices up to arity 3 are always included, since binary affine
    combinations alone need not generate (over Z/4 they miss x - y + z).
    """
    max_arity = theory.max_arity if max_arity is None else max_arity
    gen_arity = max_arity
    if theory.provenance.startswith("mat("):
        gen_arity = max(max_arity, AFFINE_GENERATOR_ARITY)

    def gens(t):
        out = []
        for k in range(1, gen_arity + 1):
            out.extend(t.slice(k))
        return out

    if theory.provenance.startswith("mat("):
        prov = f"mat_aff({theory.rig.name})"
    else:
        prov = f"aff({theory.provenance})"
    return ConcreteTheory(theory.carrier_size, prov, lambda n: affine_core_slice(theory, n),
                          generators=gens, max_arity=max_arity, rig=theory.rig,
                          generators_exact=False, parent=theory)


def mat_aff_theory(rig: FiniteRig, max_arity=None):
    return affine_core(mat_theory(rig, max_arity), max_arity)


def clone_closure(carrier_size, generators, max_arity=None, guard=CLOSURE_GUARD):
    gens = list(generators)
    for g in gens:
        if g.carrier_size != carrier_size:
            raise InputError("generator carrier does not match")
    t = ConcreteTheory(carrier_size, "closure-of-generators",
                       lambda n: clone_closure_slice(carrier_size, gens, n, guard),
                       generators=gens, max_arity=max_arity)
    for n in range(t.max_arity + 1):
        t.slice(n)
    return t


# ----------------------------------------------------------------------------
# comparison and counts

@dataclass
class Comparison:
    relation: str                 # equal | left-subset | right-subset | incomparable
    left_only: list = field(default_factory=list)
    right_only: list = field(default_factory=list)

    def to_json(self, max_witnesses=4):
        return {
            "relation": self.relation,
            "left_only": [list(op.table) for op in self.left_only[:max_witnesses]],
            "right_only": [list(op.table) for op in self.right_only[:max_witnesses]],
        }


def slice_compare(a: TheorySlice, b: TheorySlice) -> Comparison:
    if a.carrier_size != b.carrier_size or a.arity != b.arity:
        raise InputError("slices differ in carrier or arity")
    sa, sb = a.as_set(), b.as_set()
    left = [OpTable(a.carrier_size, a.arity, t) for t in sorted(sa - sb)]
    right = [OpTable(a.carrier_size, a.arity, t) for t in sorted(sb - sa)]
    if not left and not right:
        rel = "equal"
    elif not left:
        rel = "left-subset"
    elif not right:
        rel = "right-subset"
    else:
        rel = "incomparable"
    return Comparison(rel, left, right)


def free_algebra_size(theory: ConcreteTheory, n) -> int:
    return len(theory.slice(n))


# ----------------------------------------------------------------------------
# algebra structures

@dataclass
class AlgebraStructure:
    """An interpretation of a theory's generators on some carrier."""

    theory: ConcreteTheory
    carrier_size: int
    interpretation: dict  # generator OpTable -> OpTable on carrier_size

    def __post_init__(self):
        for g, op in self.interpretation.items():
            if g.arity != op.arity:
                raise InputError("interpretation changes arity")
            if op.carrier_size != self.carrier_size:
                raise InputError("interpreted operation on wrong carrier")

    def signature(self):
        keys = list(self.interpretation)
        return keys, [self.interpretation[k] for k in keys]


def tautological_algebra(theory: ConcreteTheory) -> AlgebraStructure:
    return AlgebraStructure(theory, theory.carrier_size,
                            {g: g for g in theory.generators})


def cotensor_ops(ops, exponent):
    """Pointwise action of each op on ``carrier ** exponent``.

    The function space is encoded with the tuple convention: a function
    ``f: range(exponent) -> S`` is the cell ``encode(f(0), ..., f(exponent-1))``.
    """
    out = []
    for op in ops:
        s, k = op.carrier_size, op.arity
        big = s ** exponent
        d = digits(s, exponent)
        table = op.array()
        if k == 0:
            cell = int((np.full(exponent, op.table[0]) @ powers(s, exponent)) if exponent else 0)
            out.append(OpTable(big, 0, (cell,)))
            continue
        args = digits(big, k)
        coords = d[args]                        # (big^k, k, exponent)
        idx = np.tensordot(coords, powers(s, k), axes=([1], [0]))
        vals = table[idx]
        cells = vals @ powers(s, exponent) if exponent else np.zeros(args.shape[0], dtype=np.int64)
        out.append(OpTable.from_array(big, k, cells))
    return out
