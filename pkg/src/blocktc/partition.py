"""Symmetric rectilinear partitioning of the ordered adjacency matrix."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .graph import GraphCsr

DEFAULT_P_MIN = 4
DEFAULT_P_MAX = 64


@dataclass(frozen=True)
class PartitionVector:
    """One cut vector shared by rows and columns; part i is [cuts[i], cuts[i+1])."""

    cuts: np.ndarray

    def __post_init__(self):
        cuts = np.asarray(self.cuts, dtype=np.int64)
        if cuts.ndim != 1 or cuts.size < 2 or cuts[0] != 0 or np.any(np.diff(cuts) < 0):
            raise ValueError(f"invalid cut vector {cuts.tolist()}")
        object.__setattr__(self, "cuts", cuts)

    @property
    def p(self) -> int:
        return self.cuts.size - 1

    @property
    def n(self) -> int:
        return int(self.cuts[-1])

    def part_size(self, i: int) -> int:
        return int(self.cuts[i + 1] - self.cuts[i])

    def part_of(self, ids) -> np.ndarray:
        return np.searchsorted(self.cuts, ids, side="right") - 1

    def to_list(self) -> list[int]:
        return self.cuts.tolist()


@dataclass(frozen=True)
class PartitionStats:
    m_max: int
    m_avg: float
    lam: float
    d_max: int
    d_max_blk: int
    c_max: float
    d_avg: float
    d_avg_blk: float
    c_avg: float

    def as_dict(self) -> dict:
        return {
            "m_max": self.m_max,
            "m_avg": self.m_avg,
            "lambda": self.lam,
            "d_max": self.d_max,
            "d_max_blk": self.d_max_blk,
            "c_max": self.c_max,
            "d_avg": self.d_avg,
            "d_avg_blk": self.d_avg_blk,
            "c_avg": self.c_avg,
        }


def default_part_count(g: GraphCsr) -> int:
    """Part count near the average degree, clamped to [4, 64] and to n."""
    avg = 2.0 * g.m / g.n if g.n else 0.0
    p = int(np.clip(round(avg), DEFAULT_P_MIN, DEFAULT_P_MAX))
    return max(1, min(p, g.n))


def block_nnz(g: GraphCsr, pv: PartitionVector) -> np.ndarray:
    """p x p matrix of edge counts; only the upper triangle is populated."""
    p = pv.p
    src, dst = g.edge_arrays()
    flat = pv.part_of(src) * p + pv.part_of(dst)
    return np.bincount(flat, minlength=p * p).reshape(p, p)


def _symmetric_csr(g: GraphCsr):
    src, dst = g.edge_arrays()
    a = np.concatenate([src, dst])
    b = np.concatenate([dst, src])
    order = np.argsort(a, kind="stable")
    offs = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(a, minlength=g.n), out=offs[1:])
    return offs, b[order]


def _greedy_cuts(weights: np.ndarray, p: int) -> np.ndarray:
    n = weights.size
    total = float(weights.sum())
    if total == 0:
        return np.linspace(0, n, p + 1).round().astype(np.int64)
    prefix = np.concatenate([[0.0], np.cumsum(weights, dtype=np.float64)])
    targets = total * np.arange(1, p) / p
    inner = np.searchsorted(prefix, targets, side="left")
    return np.concatenate([[0], inner, [n]]).astype(np.int64)


def _upper_max(counts: np.ndarray) -> int:
    return int(np.triu(counts).max()) if counts.size else 0


def _move_vertex(counts, x, old_part, new_part, cuts, nbrs):
    """Update block counts when vertex x changes part. Cuts must already reflect the move."""
    if nbrs.size == 0:
        return
    parts = np.searchsorted(cuts, nbrs, side="right") - 1
    below = nbrs < x
    # edges (y, x) with y < x sit at (part(y), part(x)); edges (x, y) at (part(x), part(y))
    np.subtract.at(counts, (parts[below], old_part), 1)
    np.add.at(counts, (parts[below], new_part), 1)
    np.subtract.at(counts, (old_part, parts[~below]), 1)
    np.add.at(counts, (new_part, parts[~below]), 1)


def _refine(g: GraphCsr, cuts: np.ndarray) -> np.ndarray:
    p = cuts.size - 1
    if p < 2 or g.m == 0:
        return cuts
    cuts = cuts.copy()
    offs, adj = _symmetric_csr(g)
    counts = block_nnz(g, PartitionVector(cuts)).astype(np.int64)
    best = _upper_max(counts)

    def try_move(i, step):
        nonlocal best
        c = int(cuts[i])
        new = c + step
        if new < cuts[i - 1] or new > cuts[i + 1]:
            return False
        # +1: vertex c leaves part i for i-1; -1: vertex c-1 leaves part i-1 for i
        x, old_part, new_part = (c, i, i - 1) if step == 1 else (c - 1, i - 1, i)
        nbrs = adj[offs[x]:offs[x + 1]]
        cuts[i] = new
        _move_vertex(counts, x, old_part, new_part, cuts, nbrs)
        cand = _upper_max(counts)
        if cand < best:
            best = cand
            return True
        cuts[i] = c
        _move_vertex(counts, x, new_part, old_part, cuts, nbrs)
        return False

    for _ in range(2 * p):
        improved = False
        for i in range(1, p):
            for step in (1, -1):
                moved = False
                while try_move(i, step):
                    moved = True
                if moved:
                    improved = True
                    break
        if not improved:
            break
    return cuts


def partition_symmetric(g: GraphCsr, p: int | None = None) -> PartitionVector:
    """Cut the vertex range into p contiguous parts of similar nonzero mass.

    Greedy prefix-sum chunking of the full-degree marginal, then a bounded
    sweep nudging interior cuts by one while the heaviest block shrinks.
    """
    if p is None:
        p = default_part_count(g)
    if p < 1:
        raise ValueError("part count must be >= 1")
    if g.n and p > g.n:
        warnings.warn(f"part count {p} exceeds vertex count {g.n}; clamped", stacklevel=2)
        p = g.n
    if g.n == 0:
        return PartitionVector(np.zeros(p + 1, dtype=np.int64))
    cuts = _greedy_cuts(g.full_degrees(), p)
    cuts = _refine(g, cuts)
    return PartitionVector(cuts)


def partition_stats(g: GraphCsr, pv: PartitionVector) -> PartitionStats:
    p = pv.p
    counts = block_nnz(g, pv)
    iu = np.triu_indices(p)
    upper = counts[iu]
    m_max = int(upper.max())
    m_avg = 2.0 * g.m / (p * (p + 1))
    lam = m_max / m_avg if m_avg > 0 else 1.0

    out_deg = g.out_degrees()
    d_max = int(out_deg.max()) if g.n else 0
    d_max_blk = 0
    if g.m:
        src, dst = g.edge_arrays()
        # partial degree of u in block (part(u), part(v)) = multiplicity of (u, part(v))
        key = src * p + pv.part_of(dst)
        d_max_blk = int(np.unique(key, return_counts=True)[1].max())
    sizes = np.diff(pv.cuts)[iu[0]]
    delta = np.divide(upper, sizes, out=np.zeros(upper.size), where=sizes > 0)
    d_avg = g.m / g.n if g.n else 0.0
    d_avg_blk = float(delta.mean())
    return PartitionStats(
        m_max=m_max,
        m_avg=m_avg,
        lam=lam,
        d_max=d_max,
        d_max_blk=d_max_blk,
        c_max=d_max / d_max_blk if d_max_blk else 1.0,
        d_avg=d_avg,
        d_avg_blk=d_avg_blk,
        c_avg=d_avg / d_avg_blk if d_avg_blk else 1.0,
    )
