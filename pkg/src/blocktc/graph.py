"""Graph ingestion and the canonical upper-triangular CSR."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ID_DTYPE = np.int64
_ID_MAX = np.iinfo(ID_DTYPE).max


class GraphFormatError(ValueError):
    """Raised when an input file cannot be parsed."""

    def __init__(self, path, lineno, msg):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.path = path
        self.lineno = lineno


@dataclass
class RawEdgeList:
    """Edges as read from disk: may hold duplicates, loops, both orientations."""

    edges: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=ID_DTYPE))
    n_hint: int = 0

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=ID_DTYPE).reshape(-1, 2)


@dataclass(frozen=True)
class GraphCsr:
    """Upper-triangular CSR: every stored edge (u, v) has u < v.

    ``orig_ids[new] = old`` maps relabeled vertices back to input ids.
    """

    n: int
    row_offsets: np.ndarray
    neighbors: np.ndarray
    orig_ids: np.ndarray

    @property
    def m(self) -> int:
        return int(self.row_offsets[self.n]) if self.n else 0

    def neighbors_of(self, u: int) -> np.ndarray:
        return self.neighbors[self.row_offsets[u]:self.row_offsets[u + 1]]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def full_degrees(self) -> np.ndarray:
        """Degree in the undirected graph (row plus column nonzeros)."""
        deg = self.out_degrees().astype(ID_DTYPE)
        if self.m:
            deg = deg + np.bincount(self.neighbors, minlength=self.n)
        return deg

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        src = np.repeat(np.arange(self.n, dtype=ID_DTYPE), self.out_degrees())
        return src, self.neighbors.copy()

    def export(self) -> RawEdgeList:
        src, dst = self.edge_arrays()
        return RawEdgeList(np.stack([src, dst], axis=1), self.n)


def _parse_id(tok, path, lineno):
    try:
        val = int(tok)
    except ValueError:
        raise GraphFormatError(path, lineno, f"bad vertex id {tok!r}") from None
    if val < 0:
        raise GraphFormatError(path, lineno, f"negative vertex id {val}")
    if val > _ID_MAX:
        raise GraphFormatError(path, lineno, f"vertex id {val} overflows 64-bit id")
    return val


def _read_edge_list(path):
    flat = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0][0] in "#%":
                continue
            if len(parts) < 2:
                raise GraphFormatError(path, lineno, "expected 'u v'")
            a, b = parts[0], parts[1]
            if a.isdigit() and b.isdigit() and len(a) < 19 and len(b) < 19:
                flat.append(int(a))
                flat.append(int(b))
            else:
                flat.append(_parse_id(a, path, lineno))
                flat.append(_parse_id(b, path, lineno))
    return RawEdgeList(np.array(flat, dtype=ID_DTYPE))


def _read_matrix_market(path):
    edges = []
    n_hint = 0
    size_seen = False
    with open(path) as fh:
        header = fh.readline()
        toks = header.lower().split()
        if len(toks) < 4 or toks[0] != "%%matrixmarket" or toks[1] != "matrix":
            raise GraphFormatError(path, 1, "missing %%MatrixMarket matrix header")
        if toks[2] != "coordinate":
            raise GraphFormatError(path, 1, f"unsupported layout {toks[2]!r}")
        for lineno, line in enumerate(fh, 2):
            s = line.strip()
            if not s or s.startswith("%"):
                continue
            parts = s.split()
            if not size_seen:
                if len(parts) != 3:
                    raise GraphFormatError(path, lineno, "expected 'rows cols nnz'")
                rows, cols = (_parse_id(t, path, lineno) for t in parts[:2])
                n_hint = max(rows, cols)
                size_seen = True
                continue
            if len(parts) < 2:
                raise GraphFormatError(path, lineno, "expected 'row col [value]'")
            u = _parse_id(parts[0], path, lineno)
            v = _parse_id(parts[1], path, lineno)
            if u == 0 or v == 0:
                raise GraphFormatError(path, lineno, "matrix-market ids are 1-based")
            edges.append((u - 1, v - 1))
    return RawEdgeList(edges, n_hint)


def load_edge_list(path: str | os.PathLike, format: str = "edge-list") -> RawEdgeList:
    """Read a graph file into a :class:`RawEdgeList` with 0-based ids.

    ``format`` is ``"edge-list"`` (one ``u v`` pair per line, ``#``/``%``
    comments) or ``"matrix-market"`` (coordinate, 1-based).
    """
    if format == "edge-list":
        return _read_edge_list(path)
    if format == "matrix-market":
        return _read_matrix_market(path)
    raise ValueError(f"unknown graph format {format!r}")


def guess_format(path) -> str:
    return "matrix-market" if str(path).endswith(".mtx") else "edge-list"


def write_edge_list(g: GraphCsr, path) -> None:
    src, dst = g.edge_arrays()
    with open(path, "w") as fh:
        for u, v in zip(src.tolist(), dst.tolist()):
            fh.write(f"{u} {v}\n")


def _from_arrays(n, src, dst, orig_ids=None) -> GraphCsr:
    """Build a canonical CSR from arbitrary (src, dst) arrays."""
    src = np.asarray(src, dtype=ID_DTYPE)
    dst = np.asarray(dst, dtype=ID_DTYPE)
    keep = src != dst
    lo = np.minimum(src[keep], dst[keep])
    hi = np.maximum(src[keep], dst[keep])
    if lo.size:
        pairs = np.unique(np.stack([lo, hi], axis=1), axis=0)
        lo, hi = pairs[:, 0], pairs[:, 1]
    counts = np.bincount(lo, minlength=n) if n else np.zeros(0, dtype=ID_DTYPE)
    offsets = np.zeros(n + 1, dtype=ID_DTYPE)
    np.cumsum(counts, out=offsets[1:])
    if orig_ids is None:
        orig_ids = np.arange(n, dtype=ID_DTYPE)
    return GraphCsr(n, offsets, np.ascontiguousarray(hi, dtype=ID_DTYPE), orig_ids)


def canonicalize(raw: RawEdgeList | Iterable[Sequence[int]]) -> GraphCsr:
    """Drop self-loops and duplicates, orient every edge as (min, max)."""
    if not isinstance(raw, RawEdgeList):
        raw = RawEdgeList(list(raw))
    arr = raw.edges
    n = int(arr.max()) + 1 if arr.size else 0
    n = max(n, raw.n_hint)
    return _from_arrays(n, arr[:, 0], arr[:, 1])


def degree_order(g: GraphCsr) -> GraphCsr:
    """Relabel vertices by non-decreasing full degree (stable on ties)."""
    perm = np.argsort(g.full_degrees(), kind="stable")  # new -> old
    rank = np.empty(g.n, dtype=ID_DTYPE)
    rank[perm] = np.arange(g.n, dtype=ID_DTYPE)
    src, dst = g.edge_arrays()
    return _from_arrays(g.n, rank[src], rank[dst], g.orig_ids[perm])


def from_edges(edges, n: int = 0) -> GraphCsr:
    """Canonical, degree-ordered graph from an edge iterable."""
    return degree_order(canonicalize(RawEdgeList(list(edges), n)))
