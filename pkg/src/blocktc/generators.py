"""Seeded synthetic graphs: Erdos-Renyi G(n, q) and R-MAT."""

from __future__ import annotations

import numpy as np

from .graph import ID_DTYPE, RawEdgeList

RMAT_DEFAULT = (0.57, 0.19, 0.19, 0.05)


def gnp(n: int, q: float, seed: int = 0) -> RawEdgeList:
    """Each of the n(n-1)/2 pairs present independently with probability q."""
    if n < 0 or not 0.0 <= q <= 1.0:
        raise ValueError("need n >= 0 and 0 <= q <= 1")
    rng = np.random.default_rng(seed)
    rows = []
    for u in range(n - 1):
        hit = np.flatnonzero(rng.random(n - u - 1) < q) + u + 1
        if hit.size:
            rows.append(np.stack([np.full(hit.size, u, dtype=ID_DTYPE), hit.astype(ID_DTYPE)], axis=1))
    edges = np.concatenate(rows) if rows else np.zeros((0, 2), dtype=ID_DTYPE)
    return RawEdgeList(edges, n)


def rmat(
    scale: int,
    edge_factor: float = 8,
    probs: tuple[float, float, float, float] = RMAT_DEFAULT,
    seed: int = 0,
) -> RawEdgeList:
    """Recursive-matrix generator over 2**scale vertices.

    Draws ``edge_factor * 2**scale`` edges quadrant by quadrant; self-loops
    and duplicates are removed, so the result has at most that many edges.
    """
    a, b, c, d = probs
    if scale < 0 or min(probs) < 0 or abs(a + b + c + d - 1.0) > 1e-9:
        raise ValueError("need scale >= 0 and probabilities summing to 1")
    rng = np.random.default_rng(seed)
    n = 1 << scale
    m = int(edge_factor * n)
    src = np.zeros(m, dtype=ID_DTYPE)
    dst = np.zeros(m, dtype=ID_DTYPE)
    for bit in range(scale):
        r = rng.random(m)
        # quadrants: a = (0,0), b = (0,1), c = (1,0), d = (1,1)
        down = r >= a + b
        right = ((r >= a) & (r < a + b)) | (r >= a + b + c)
        src |= down.astype(ID_DTYPE) << bit
        dst |= right.astype(ID_DTYPE) << bit
    keep = src != dst
    lo = np.minimum(src[keep], dst[keep])
    hi = np.maximum(src[keep], dst[keep])
    pairs = np.unique(np.stack([lo, hi], axis=1), axis=0) if lo.size else np.zeros((0, 2), dtype=ID_DTYPE)
    return RawEdgeList(pairs, n)


def write_raw(raw: RawEdgeList, path) -> None:
    with open(path, "w") as fh:
        for u, v in raw.edges.tolist():
            fh.write(f"{u} {v}\n")
