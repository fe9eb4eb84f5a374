"""Search kernels for function tables constrained by operation-preservation.

A problem is a set of ``n_cells`` unknowns ``h[c]`` with values in
``range(size)`` and a list of constraint instances, each saying

    h[out] == op(h[arg_0], ..., h[arg_{k-1}])

where ``op`` is a flat table over ``size`` (big-endian index of the argument
tuple).  Instances are bucketed by trigger cell, the largest cell they touch,
and are checked the moment that cell gets a value.  Solutions come back as
rows of a 2-D array in lexicographic order.
"""
from dataclasses import dataclass

import numpy as np

from finclone._accel import default_backend, njit


@dataclass(frozen=True)
class SearchProblem:
    n_cells: int
    size: int
    op_data: np.ndarray      # concatenated op tables
    op_offset: np.ndarray    # start of each op in op_data
    op_arity: np.ndarray
    inst_op: np.ndarray      # (I,) op id, sorted by trigger
    inst_out: np.ndarray     # (I,)
    inst_args: np.ndarray    # (I, max_arity) padded with 0
    trig_start: np.ndarray   # (n_cells + 1,) CSR pointer into instances

    @property
    def n_instances(self):
        return int(self.inst_op.shape[0])


def build_problem(n_cells, size, ops, instances):
    """Assemble a :class:`SearchProblem`.

    ``ops`` is a list of (arity, flat table) pairs over ``size``;
    ``instances`` is a list of (op_id, out_cells, arg_cells) with
    ``out_cells`` shape (m,) and ``arg_cells`` shape (m, arity).
    """
    op_arity = np.array([a for a, _ in ops], dtype=np.int64)
    tables = [np.asarray(t, dtype=np.int64).ravel() for _, t in ops]
    op_offset = np.zeros(len(ops), dtype=np.int64)
    if tables:
        op_offset[1:] = np.cumsum([t.size for t in tables])[:-1]
        op_data = np.concatenate(tables)
    else:
        op_data = np.zeros(0, dtype=np.int64)
    max_k = int(op_arity.max()) if len(ops) else 0
    max_k = max(max_k, 1)

    ids, outs, args = [], [], []
    for op_id, out_cells, arg_cells in instances:
        out_cells = np.asarray(out_cells, dtype=np.int64).ravel()
        m = out_cells.size
        k = int(op_arity[op_id])
        padded = np.zeros((m, max_k), dtype=np.int64)
        if k:
            padded[:, :k] = np.asarray(arg_cells, dtype=np.int64).reshape(m, k)
        ids.append(np.full(m, op_id, dtype=np.int64))
        outs.append(out_cells)
        args.append(padded)
    if ids:
        inst_op = np.concatenate(ids)
        inst_out = np.concatenate(outs)
        inst_args = np.concatenate(args)
    else:
        inst_op = np.zeros(0, dtype=np.int64)
        inst_out = np.zeros(0, dtype=np.int64)
        inst_args = np.zeros((0, max_k), dtype=np.int64)

    # trigger = largest cell referenced; padding zeros never raise the max
    trig = inst_out.copy()
    if inst_args.size:
        trig = np.maximum(trig, inst_args.max(axis=1))
    order = np.argsort(trig, kind="stable")
    trig = trig[order]
    trig_start = np.searchsorted(trig, np.arange(n_cells + 1)).astype(np.int64)
    return SearchProblem(
        n_cells=int(n_cells),
        size=int(size),
        op_data=op_data,
        op_offset=op_offset,
        op_arity=op_arity,
        inst_op=inst_op[order],
        inst_out=inst_out[order],
        inst_args=inst_args[order],
        trig_start=trig_start,
    )


@njit
def _dfs(n_cells, size, op_data, op_offset, op_arity,
         inst_op, inst_out, inst_args, trig_start, limit):
    cap = 64
    out = np.empty((cap, max(n_cells, 1)), dtype=np.int64)
    count = 0
    if n_cells == 0:
        return out[:1, :0].copy(), 1
    h = np.full(n_cells, -1, dtype=np.int64)
    c = 0
    while c >= 0:
        h[c] += 1
        if h[c] >= size:
            h[c] = -1
            c -= 1
            continue
        ok = True
        for t in range(trig_start[c], trig_start[c + 1]):
            o = inst_op[t]
            k = op_arity[o]
            idx = 0
            for j in range(k):
                idx = idx * size + h[inst_args[t, j]]
            if op_data[op_offset[o] + idx] != h[inst_out[t]]:
                ok = False
                break
        if not ok:
            continue
        if c == n_cells - 1:
            if count == cap:
                grown = np.empty((cap * 2, n_cells), dtype=np.int64)
                grown[:cap] = out
                out = grown
                cap *= 2
            out[count] = h
            count += 1
            if limit > 0 and count >= limit:
                break
        else:
            c += 1
    return out[:count].copy(), count


def _solve_numba(p, limit):
    rows, _ = _dfs(p.n_cells, p.size, p.op_data, p.op_offset, p.op_arity,
                   p.inst_op, p.inst_out, p.inst_args, p.trig_start, limit)
    return rows


_CHUNK = 1 << 22


def _solve_numpy(p, limit):
    """Breadth-first frontier filtering; same answer set and order as DFS."""
    size = p.size
    frontier = np.zeros((1, 0), dtype=np.int64)
    vals = np.arange(size, dtype=np.int64)
    for c in range(p.n_cells):
        m = frontier.shape[0]
        if m == 0:
            break
        grown = np.empty((m * size, c + 1), dtype=np.int64)
        grown[:, :c] = np.repeat(frontier, size, axis=0)
        grown[:, c] = np.tile(vals, m)
        keep = np.ones(grown.shape[0], dtype=bool)
        lo, hi = p.trig_start[c], p.trig_start[c + 1]
        if hi > lo:
            ops = p.inst_op[lo:hi]
            for k in np.unique(p.op_arity[ops]):
                sel = np.flatnonzero(p.op_arity[ops] == k) + lo
                step = max(1, _CHUNK // max(1, grown.shape[0] * max(int(k), 1)))
                for s0 in range(0, sel.size, step):
                    part = sel[s0:s0 + step]
                    idx = np.zeros((grown.shape[0], part.size), dtype=np.int64)
                    for j in range(int(k)):
                        idx = idx * size + grown[:, p.inst_args[part, j]]
                    want = p.op_data[p.op_offset[p.inst_op[part]] + idx]
                    keep &= (want == grown[:, p.inst_out[part]]).all(axis=1)
        frontier = grown[keep]
    if limit > 0:
        frontier = frontier[:limit]
    return frontier


def solve(problem, backend=None, limit=0):
    """All solutions of ``problem`` as an (count, n_cells) int64 array.

    ``limit > 0`` stops after that many solutions (in lexicographic order).
    """
    backend = backend or default_backend()
    if backend == "numba":
        return _solve_numba(problem, limit)
    if backend == "numpy":
        return _solve_numpy(problem, limit)
    raise ValueError(f"unknown backend {backend!r}")
