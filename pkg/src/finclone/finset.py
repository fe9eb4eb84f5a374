"""Operation tables on finite carriers and the constrained table enumerator.

Tuples over a carrier of size ``s`` are encoded big-endian:
``(x1, ..., xn) -> sum(x_i * s**(n - i))``, so ``x1`` is most significant.
``itertools.product(range(s), repeat=n)`` walks tuples in exactly this order.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from finclone import kernels


class InputError(ValueError):
    """Malformed or out-of-range input to a finite-set primitive."""


class ResourceError(RuntimeError):
    """A size guard refused a computation."""


def encode_tuple(carrier_size: int, tup: Sequence[int]) -> int:
    idx = 0
    for pos, x in enumerate(tup):
        if not 0 <= x < carrier_size:
            raise InputError(
                f"entry {x} at position {pos} outside carrier of size {carrier_size}")
        idx = idx * carrier_size + x
    return idx


def decode_tuple(carrier_size: int, arity: int, index: int) -> tuple:
    if not 0 <= index < carrier_size ** arity:
        raise InputError(f"index {index} outside {carrier_size}^{arity}")
    out = []
    for _ in range(arity):
        index, r = divmod(index, carrier_size)
        out.append(r)
    return tuple(reversed(out))


@lru_cache(maxsize=64)
def digits(carrier_size: int, arity: int) -> np.ndarray:
    """Row ``i`` is the decoded tuple with index ``i``; shape (s**n, n)."""
    n_rows = carrier_size ** arity
    if arity == 0:
        d = np.zeros((1, 0), dtype=np.int64)
    else:
        d = np.indices((carrier_size,) * arity).reshape(arity, n_rows).T.astype(np.int64)
    d.setflags(write=False)
    return d


def powers(carrier_size: int, arity: int) -> np.ndarray:
    """Place values for big-endian encoding of ``arity`` digits."""
    return carrier_size ** np.arange(arity - 1, -1, -1, dtype=np.int64)


@dataclass(frozen=True, order=True)
class OpTable:
    """A total operation ``A^n -> A`` stored as a flat table."""

    carrier_size: int
    arity: int
    table: tuple

    def __post_init__(self):
        if self.carrier_size < 1:
            raise InputError("carrier_size must be positive")
        if self.arity < 0:
            raise InputError("arity must be non-negative")
        t = tuple(int(v) for v in self.table)
        object.__setattr__(self, "table", t)
        if len(t) != self.carrier_size ** self.arity:
            raise InputError(
                f"table length {len(t)} != {self.carrier_size}^{self.arity}")
        for i, v in enumerate(t):
            if not 0 <= v < self.carrier_size:
                raise InputError(f"table entry {v} at cell {i} outside carrier")

    @classmethod
    def from_function(cls, carrier_size, arity, fn):
        rows = digits(carrier_size, arity)
        return cls(carrier_size, arity, tuple(fn(*r) for r in rows.tolist()))

    @classmethod
    def from_array(cls, carrier_size, arity, arr):
        return cls(carrier_size, arity, tuple(np.asarray(arr).tolist()))

    def array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64)

    def __call__(self, *args):
        return self.table[encode_tuple(self.carrier_size, args)]

    def __repr__(self):
        return f"OpTable(s={self.carrier_size}, n={self.arity}, {list(self.table)})"


@dataclass(frozen=True)
class MultiOpTable:
    """A map ``A^n -> A^m`` given by its ``m`` component operations."""

    components: tuple = field(default_factory=tuple)
    carrier_size: int = 0
    arity: int = 0

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            if self.carrier_size < 1:
                raise InputError("empty MultiOpTable needs an explicit carrier_size")
            return
        s, n = comps[0].carrier_size, comps[0].arity
        for c in comps:
            if c.carrier_size != s or c.arity != n:
                raise InputError("components must share carrier_size and arity")
        object.__setattr__(self, "carrier_size", s)
        object.__setattr__(self, "arity", n)

    @property
    def coarity(self):
        return len(self.components)


def projection(carrier_size: int, n: int, i: int) -> OpTable:
    """The ``i``-th projection (1-based) of arity ``n``."""
    if not 1 <= i <= n:
        raise InputError(f"projection index {i} outside 1..{n}")
    return OpTable.from_array(carrier_size, n, digits(carrier_size, n)[:, i - 1])


def projections(carrier_size: int, n: int) -> list:
    return [projection(carrier_size, n, i) for i in range(1, n + 1)]


def constant(carrier_size: int, n: int, value: int) -> OpTable:
    if not 0 <= value < carrier_size:
        raise InputError(f"constant {value} outside carrier")
    return OpTable(carrier_size, n, (value,) * carrier_size ** n)


def superpose_arrays(carrier_size, outer, inner_rows):
    """Vectorised superposition. ``inner_rows`` has shape (..., k, s**n)."""
    k = inner_rows.shape[-2]
    idx = np.tensordot(powers(carrier_size, k), inner_rows, axes=([0], [-2])) \
        if k else np.zeros(inner_rows.shape[:-2] + (inner_rows.shape[-1],), dtype=np.int64)
    return np.asarray(outer)[idx]


def superpose(outer: OpTable, inners: Sequence[OpTable], arity: int | None = None) -> OpTable:
    """``x -> outer(inner_1(x), ..., inner_k(x))``.

    With a nullary ``outer`` there are no inners, so the result arity must be
    given explicitly (it defaults to 0).
    """
    s = outer.carrier_size
    if len(inners) != outer.arity:
        raise InputError(f"outer arity {outer.arity} but {len(inners)} inner operations")
    if inners:
        n = inners[0].arity
        for w in inners:
            if w.carrier_size != s:
                raise InputError("carrier mismatch between outer and inner operations")
            if w.arity != n:
                raise InputError("inner operations must share an arity")
        if arity is not None and arity != n:
            raise InputError(f"requested arity {arity} but inners have arity {n}")
        rows = np.stack([w.array() for w in inners])
        return OpTable.from_array(s, n, superpose_arrays(s, outer.array(), rows))
    n = 0 if arity is None else arity
    return constant(s, n, outer.table[0])


# ----------------------------------------------------------------------------
# componentwise structure and constraint instances

def lift_componentwise(op: OpTable, n: int):
    """Componentwise action of ``op`` on ``A^n``.

    Returns ``(arg_cells, out_cells)``: every ``k``-tuple of cells of ``A^n``
    and the cell that ``op`` sends it to, coordinate by coordinate.
    """
    s, k = op.carrier_size, op.arity
    n_cells = s ** n
    table = op.array()
    if k == 0:
        out = np.array([encode_tuple(s, (op.table[0],) * n)], dtype=np.int64)
        return np.zeros((1, 0), dtype=np.int64), out
    args = digits(n_cells, k)
    d = digits(s, n)
    # coordinate values: (tuples, k, n)
    coords = d[args]
    idx = np.tensordot(coords, powers(s, k), axes=([1], [0]))
    out_digits = table[idx]
    out = out_digits @ powers(s, n) if n else np.zeros(args.shape[0], dtype=np.int64)
    return args, out.astype(np.int64)


def _dedupe_ops(ops):
    seen, out = set(), []
    for op in ops:
        key = (op.arity, op.table)
        if key not in seen:
            seen.add(key)
            out.append(op)
    return out


def naive_candidate_count(carrier_size, n):
    return carrier_size ** (carrier_size ** n)


def constraint_problem(carrier_size: int, n: int, constraints: Sequence[OpTable]):
    """Search problem for tables ``A^n -> A`` preserving every constraint op."""
    ops = _dedupe_ops(constraints)
    n_cells = carrier_size ** n
    op_list, instances = [], []
    for op_id, op in enumerate(ops):
        if op.carrier_size != carrier_size:
            raise InputError("constraint carrier does not match")
        args, out = lift_componentwise(op, n)
        op_list.append((op.arity, op.array()))
        instances.append((op_id, out, args))
    return kernels.build_problem(n_cells, carrier_size, op_list, instances)


def enumerate_constrained(carrier_size: int, n: int, constraints: Sequence[OpTable],
                          backend=None, limit=0) -> np.ndarray:
    """All tables ``h: A^n -> A`` commuting with every op in ``constraints``.

    Returns a (count, s**n) array in lexicographic order. An empty result is
    a valid answer.
    """
    problem = constraint_problem(carrier_size, n, constraints)
    return kernels.solve(problem, backend=backend, limit=limit)


def hom_problem(src_size, src_ops, tgt_size, tgt_ops):
    """Search problem for homomorphisms between two algebras of one signature.

    ``src_ops`` and ``tgt_ops`` are parallel lists of OpTables on the source
    and target carriers.
    """
    if len(src_ops) != len(tgt_ops):
        raise InputError("source and target interpret different signatures")
    op_list, instances = [], []
    for op_id, (a, b) in enumerate(zip(src_ops, tgt_ops)):
        if a.arity != b.arity:
            raise InputError("arity mismatch between source and target operation")
        if a.carrier_size != src_size or b.carrier_size != tgt_size:
            raise InputError("operation carrier does not match its algebra")
        args = digits(src_size, a.arity)
        op_list.append((b.arity, b.array()))
        instances.append((op_id, a.array(), args))
    return kernels.build_problem(src_size, tgt_size, op_list, instances)


def enumerate_homs(src_size, src_ops, tgt_size, tgt_ops, backend=None, limit=0):
    return kernels.solve(hom_problem(src_size, src_ops, tgt_size, tgt_ops),
                         backend=backend, limit=limit)


def canonical_rows(rows: np.ndarray, width: int) -> np.ndarray:
    """Deduplicate and sort table rows lexicographically."""
    rows = np.asarray(rows, dtype=np.int64).reshape(-1, width)
    if rows.shape[0] == 0:
        return rows
    return np.unique(rows, axis=0)
