"""Block CSR storage of the upper-triangular blocks of a partitioned graph."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .graph import ID_DTYPE, GraphCsr
from .partition import PartitionVector

MAGIC = b"BBTCBCSR"
VERSION = 1
_HEADER = struct.Struct("<8sIQQQ")


@dataclass(frozen=True)
class SubgraphBlock:
    """Edges from part i to part j. Neighbor ids are local to part j."""

    i: int
    j: int
    src_base: int
    src_count: int
    dst_base: int
    dst_count: int
    row_offsets: np.ndarray
    neighbors: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.row_offsets[self.src_count])

    def local_neighbors(self, r: int) -> np.ndarray:
        return self.neighbors[self.row_offsets[r]:self.row_offsets[r + 1]]

    @property
    def avg_degree(self) -> float:
        return self.nnz / self.src_count if self.src_count else 0.0

    @property
    def nbytes(self) -> int:
        return self.row_offsets.nbytes + self.neighbors.nbytes


class BlockGraph:
    """The p(p+1)/2 blocks (i <= j) in row-major order, plus the cut vector."""

    def __init__(self, pv: PartitionVector, blocks: dict[tuple[int, int], SubgraphBlock], m: int):
        self.pv = pv
        self.blocks = blocks
        self.m = m

    @property
    def p(self) -> int:
        return self.pv.p

    @property
    def n(self) -> int:
        return self.pv.n

    def block(self, i: int, j: int) -> SubgraphBlock:
        return self.blocks[(i, j)]

    def __iter__(self) -> Iterator[SubgraphBlock]:
        return iter(self.blocks.values())

    def block_id(self, i: int, j: int) -> int:
        """Row-major position of block (i, j) among the upper-triangular blocks."""
        p = self.p
        return i * p - i * (i - 1) // 2 + (j - i)

    def max_part_size(self) -> int:
        return int(np.diff(self.pv.cuts).max()) if self.p else 0

    def summary(self) -> list[dict]:
        return [
            {"i": b.i, "j": b.j, "nnz": b.nnz, "delta": b.avg_degree}
            for b in self.blocks.values()
        ]

    def edges(self) -> np.ndarray:
        """All edges with global ids, re-assembled from the blocks."""
        out = []
        for b in self.blocks.values():
            rows = np.repeat(np.arange(b.src_count, dtype=ID_DTYPE), np.diff(b.row_offsets))
            out.append(np.stack([rows + b.src_base, b.neighbors + b.dst_base], axis=1))
        return np.concatenate(out) if out else np.zeros((0, 2), dtype=ID_DTYPE)


def build_block_graph(g: GraphCsr, pv: PartitionVector) -> BlockGraph:
    if pv.n != g.n:
        raise ValueError(f"cut vector covers {pv.n} vertices, graph has {g.n}")
    p = pv.p
    cuts = pv.cuts
    src, dst = g.edge_arrays()
    bi = pv.part_of(src)
    bj = pv.part_of(dst)
    key = bi * p + bj
    order = np.argsort(key, kind="stable")
    src, dst, key = src[order], dst[order], key[order]
    bounds = np.searchsorted(key, np.arange(p * p + 1))

    blocks = {}
    for i in range(p):
        src_base = int(cuts[i])
        src_count = int(cuts[i + 1] - cuts[i])
        for j in range(i, p):
            lo, hi = bounds[i * p + j], bounds[i * p + j + 1]
            dst_base = int(cuts[j])
            rows = src[lo:hi] - src_base
            offs = np.zeros(src_count + 1, dtype=ID_DTYPE)
            if hi > lo:
                np.cumsum(np.bincount(rows, minlength=src_count), out=offs[1:])
            blocks[(i, j)] = SubgraphBlock(
                i=i,
                j=j,
                src_base=src_base,
                src_count=src_count,
                dst_base=dst_base,
                dst_count=int(cuts[j + 1] - cuts[j]),
                row_offsets=offs,
                neighbors=np.ascontiguousarray(dst[lo:hi] - dst_base),
            )
    return BlockGraph(pv, blocks, g.m)


def partial_neighbors(bg: BlockGraph, i: int, j: int, u: int) -> np.ndarray:
    """N(G_ij, u) as ascending global ids."""
    b = bg.block(i, j)
    r = u - b.src_base
    if not 0 <= r < b.src_count:
        raise IndexError(f"vertex {u} is not in part {i}")
    return b.local_neighbors(r) + b.dst_base


def block_avg_degree(bg: BlockGraph, i: int, j: int) -> float:
    return bg.block(i, j).avg_degree


def save_block_graph(bg: BlockGraph, path) -> None:
    """Binary dump: header, cuts, then per block (row-major) src_count, nnz, offsets, neighbors.

    All integers are little-endian; arrays are int64.
    """
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, bg.n, bg.m, bg.p))
        fh.write(bg.pv.cuts.astype("<i8").tobytes())
        for b in bg.blocks.values():
            fh.write(struct.pack("<QQ", b.src_count, b.nnz))
            fh.write(b.row_offsets.astype("<i8").tobytes())
            fh.write(b.neighbors.astype("<i8").tobytes())


def load_block_graph(path) -> BlockGraph:
    with open(path, "rb") as fh:
        data = fh.read()
    magic, version, n, m, p = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a block graph dump")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported dump version {version}")
    pos = _HEADER.size

    def take(count):
        nonlocal pos
        arr = np.frombuffer(data, dtype="<i8", count=count, offset=pos).astype(ID_DTYPE)
        pos += 8 * count
        return arr

    cuts = take(p + 1)
    pv = PartitionVector(cuts)
    blocks = {}
    for i in range(p):
        for j in range(i, p):
            src_count, nnz = struct.unpack_from("<QQ", data, pos)
            pos += 16
            offs = take(src_count + 1)
            nbrs = take(nnz)
            blocks[(i, j)] = SubgraphBlock(
                i, j, int(cuts[i]), src_count, int(cuts[j]), int(cuts[j + 1] - cuts[j]), offs, nbrs
            )
    if cuts[-1] != n:
        raise ValueError(f"{path}: cut vector does not cover n={n}")
    return BlockGraph(pv, blocks, m)
