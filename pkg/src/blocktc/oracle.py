"""Brute-force triangle enumeration, used as an independent check."""

from __future__ import annotations

import numpy as np

from .graph import GraphCsr

DEFAULT_ORACLE_BOUND = 500


def brute_force_count(g: GraphCsr, bound: int = DEFAULT_ORACLE_BOUND) -> int:
    """Count triples u < v < w that are pairwise adjacent, via a dense matrix.

    O(n^3); refuses graphs with more than ``bound`` vertices.
    """
    if g.n > bound:
        raise ValueError(f"brute-force oracle limited to {bound} vertices, graph has {g.n}")
    adj = np.zeros((g.n, g.n), dtype=bool)
    src, dst = g.edge_arrays()
    adj[src, dst] = True
    adj[dst, src] = True
    total = 0
    for u in range(g.n):
        for v in range(u + 1, g.n):
            if adj[u, v]:
                total += int(np.count_nonzero(adj[u, v + 1:] & adj[v, v + 1:]))
    return total


def enumerate_triangles(g: GraphCsr, bound: int = DEFAULT_ORACLE_BOUND) -> list[tuple[int, int, int]]:
    """All triangles (u, v, w), u < v < w, in lexicographic order."""
    if g.n > bound:
        raise ValueError(f"brute-force oracle limited to {bound} vertices, graph has {g.n}")
    adj = np.zeros((g.n, g.n), dtype=bool)
    src, dst = g.edge_arrays()
    adj[src, dst] = True
    adj[dst, src] = True
    out = []
    for u in range(g.n):
        for v in range(u + 1, g.n):
            if adj[u, v]:
                for w in np.flatnonzero(adj[u, v + 1:] & adj[v, v + 1:]):
                    out.append((u, v, v + 1 + int(w)))
    return out
