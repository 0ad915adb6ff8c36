"""Triangle counting kernels: whole-graph baselines and per-task block kernels.

The inner loops are numba-compiled with ``nogil=True`` so worker threads in
the scheduler run them in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .bcsr import SubgraphBlock
from .graph import ID_DTYPE, GraphCsr

UNMARKED = -1
DEFAULT_LATAPY_K = 32

_jit = numba.njit(nogil=True, cache=True)


class ScratchMap:
    """Dense marker array for hashmap counting.

    Each marking source gets a fresh key from a monotone counter, so slots
    never need clearing between tasks: a stale slot can never equal a key
    that has not been issued yet.
    """

    def __init__(self, size: int):
        self.slots = np.full(max(int(size), 0), UNMARKED, dtype=ID_DTYPE)
        self._next_key = 0

    def __len__(self):
        return self.slots.size

    def reserve(self, count: int) -> int:
        base = self._next_key
        self._next_key += int(count)
        return base


@dataclass(frozen=True)
class LatapyConfig:
    """Degree threshold K: vertices with full degree > K use the hashmap path."""

    k_threshold: float = DEFAULT_LATAPY_K

    def __post_init__(self):
        if self.k_threshold < 0:
            raise ValueError("K must be >= 0")


@_jit
def _merge_count(a, a_lo, a_hi, b, b_lo, b_hi):
    c = 0
    while a_lo < a_hi and b_lo < b_hi:
        x = a[a_lo]
        y = b[b_lo]
        if x == y:
            c += 1
            a_lo += 1
            b_lo += 1
        elif x < y:
            a_lo += 1
        else:
            b_lo += 1
    return c


@_jit
def _merge_count_ops(a, a_lo, a_hi, b, b_lo, b_hi):
    c = 0
    ops = 0
    while a_lo < a_hi and b_lo < b_hi:
        ops += 1
        x = a[a_lo]
        y = b[b_lo]
        if x == y:
            c += 1
            a_lo += 1
            b_lo += 1
        elif x < y:
            a_lo += 1
        else:
            b_lo += 1
    return c, ops


def intersect_count(a, b) -> int:
    """|a & b| for two strictly increasing sequences (sorted merge)."""
    a = np.asarray(a, dtype=ID_DTYPE)
    b = np.asarray(b, dtype=ID_DTYPE)
    return int(_merge_count(a, 0, a.size, b, 0, b.size))


@_jit
def _tc_list(n, offs, nbrs):
    tau = 0
    for u in range(n):
        for e in range(offs[u], offs[u + 1]):
            v = nbrs[e]
            tau += _merge_count(nbrs, offs[u], offs[u + 1], nbrs, offs[v], offs[v + 1])
    return tau


@_jit
def _hash_vertex(u, key, offs, nbrs, slots):
    for e in range(offs[u], offs[u + 1]):
        slots[nbrs[e]] = key
    tau = 0
    for e in range(offs[u], offs[u + 1]):
        v = nbrs[e]
        for f in range(offs[v], offs[v + 1]):
            if slots[nbrs[f]] == key:
                tau += 1
    return tau


@_jit
def _tc_hash(n, offs, nbrs, slots, base):
    tau = 0
    for u in range(n):
        tau += _hash_vertex(u, base + u, offs, nbrs, slots)
    return tau


@_jit
def _tc_latapy(n, offs, nbrs, full_deg, k, slots, base):
    tau = 0
    for u in range(n):
        if full_deg[u] > k:
            tau += _hash_vertex(u, base + u, offs, nbrs, slots)
        else:
            for e in range(offs[u], offs[u + 1]):
                v = nbrs[e]
                tau += _merge_count(nbrs, offs[u], offs[u + 1], nbrs, offs[v], offs[v + 1])
    return tau


def _graph_scratch(g: GraphCsr, scratch: ScratchMap | None) -> ScratchMap:
    if scratch is None:
        return ScratchMap(g.n)
    if len(scratch) < g.n:
        raise ValueError(f"scratch map of size {len(scratch)} cannot hold {g.n} vertices")
    return scratch


def tc_list(g: GraphCsr) -> int:
    return int(_tc_list(g.n, g.row_offsets, g.neighbors))


def tc_hash(g: GraphCsr, scratch: ScratchMap | None = None) -> int:
    scratch = _graph_scratch(g, scratch)
    return int(_tc_hash(g.n, g.row_offsets, g.neighbors, scratch.slots, scratch.reserve(g.n)))


def tc_latapy(g: GraphCsr, cfg: LatapyConfig | float = DEFAULT_LATAPY_K, scratch: ScratchMap | None = None) -> int:
    """Hybrid count: hashmap for vertices of full degree above K, merge otherwise."""
    k = cfg.k_threshold if isinstance(cfg, LatapyConfig) else cfg
    if k < 0:
        raise ValueError("K must be >= 0")
    # K = inf must survive the int64 comparison in the compiled loop
    k = np.iinfo(ID_DTYPE).max if math.isinf(k) else int(k)
    scratch = _graph_scratch(g, scratch)
    return int(
        _tc_latapy(
            g.n, g.row_offsets, g.neighbors, g.full_degrees(), k, scratch.slots, scratch.reserve(g.n)
        )
    )


@_jit
def _task_list(a_offs, a_nbrs, b_offs, b_nbrs, c_offs, c_nbrs, src_count):
    tau = 0
    for r in range(src_count):
        c_lo = c_offs[r]
        c_hi = c_offs[r + 1]
        if c_lo == c_hi:
            continue
        for e in range(a_offs[r], a_offs[r + 1]):
            v = a_nbrs[e]
            tau += _merge_count(c_nbrs, c_lo, c_hi, b_nbrs, b_offs[v], b_offs[v + 1])
    return tau


@_jit
def _task_list_ops(a_offs, a_nbrs, b_offs, b_nbrs, c_offs, c_nbrs, src_count):
    tau = 0
    ops = 0
    for r in range(src_count):
        c_lo = c_offs[r]
        c_hi = c_offs[r + 1]
        for e in range(a_offs[r], a_offs[r + 1]):
            v = a_nbrs[e]
            t, o = _merge_count_ops(c_nbrs, c_lo, c_hi, b_nbrs, b_offs[v], b_offs[v + 1])
            tau += t
            ops += o
    return tau, ops


@_jit
def _task_hash(a_offs, a_nbrs, b_offs, b_nbrs, c_offs, c_nbrs, src_count, slots, base):
    tau = 0
    for r in range(src_count):
        c_lo = c_offs[r]
        c_hi = c_offs[r + 1]
        if c_lo == c_hi:
            continue
        key = base + r
        for e in range(c_lo, c_hi):
            slots[c_nbrs[e]] = key
        for e in range(a_offs[r], a_offs[r + 1]):
            v = a_nbrs[e]
            for f in range(b_offs[v], b_offs[v + 1]):
                if slots[b_nbrs[f]] == key:
                    tau += 1
    return tau


def _check_geometry(a: SubgraphBlock, b: SubgraphBlock, c: SubgraphBlock):
    if not (a.i == c.i and a.j == b.i and b.j == c.j and a.i <= a.j <= b.j):
        raise ValueError(
            f"blocks ({a.i},{a.j}), ({b.i},{b.j}), ({c.i},{c.j}) do not form a task"
        )


def _arrays(a, b, c):
    return a.row_offsets, a.neighbors, b.row_offsets, b.neighbors, c.row_offsets, c.neighbors


def task_count_list(a: SubgraphBlock, b: SubgraphBlock, c: SubgraphBlock) -> int:
    """Triangles with edges in G_ij (a), G_jk (b), G_ik (c), by sorted merge.

    For each edge (u, v) of a, intersect N(G_ik, u) with N(G_jk, v); both
    lists hold part-k local ids, and a's local destination id for v is b's
    local source row.
    """
    _check_geometry(a, b, c)
    return int(_task_list(*_arrays(a, b, c), a.src_count))


def task_count_list_ops(a: SubgraphBlock, b: SubgraphBlock, c: SubgraphBlock) -> tuple[int, int]:
    """Like :func:`task_count_list`, also returning the merge-step count."""
    _check_geometry(a, b, c)
    tau, ops = _task_list_ops(*_arrays(a, b, c), a.src_count)
    return int(tau), int(ops)


def task_count_hash(a: SubgraphBlock, b: SubgraphBlock, c: SubgraphBlock, scratch: ScratchMap) -> int:
    _check_geometry(a, b, c)
    if len(scratch) < c.dst_count:
        raise ValueError(f"scratch map of size {len(scratch)} smaller than part size {c.dst_count}")
    base = scratch.reserve(a.src_count)
    return int(_task_hash(*_arrays(a, b, c), a.src_count, scratch.slots, base))
