"""Block-triplet tasks: composition, workload estimates, ordering."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .bcsr import BlockGraph
from .kernels import task_count_list_ops

ESTIMATORS = ("bbtc", "nnz", "density", "degree")
DEFAULT_DENSE_THRESHOLD = 4.0


@dataclass(frozen=True)
class Task:
    i: int
    j: int
    k: int
    est_weight: float = 0.0
    dense: bool = False

    @property
    def triplet(self) -> tuple[int, int, int]:
        return (self.i, self.j, self.k)

    def block_keys(self) -> tuple[tuple[int, int], tuple[int, int], tuple[int, int]]:
        """(i,j), (j,k), (i,k): first-edge, second-edge and closing blocks."""
        return (self.i, self.j), (self.j, self.k), (self.i, self.k)

    def blocks(self, bg: BlockGraph):
        return tuple(bg.block(*key) for key in self.block_keys())


@dataclass(frozen=True)
class TaskList:
    tasks: tuple[Task, ...]
    p: int

    def __len__(self):
        return len(self.tasks)

    def __iter__(self):
        return iter(self.tasks)

    def __getitem__(self, idx) -> Task:
        return self.tasks[idx]


def task_count_formula(p: int) -> int:
    return p * (p + 1) * (p + 2) // 6


def compose_tasks(bg: BlockGraph | int) -> TaskList:
    """One task per triplet i <= j <= k, in nested-loop order."""
    p = bg if isinstance(bg, int) else bg.p
    tasks = tuple(Task(i, j, k) for i in range(p) for j in range(i, p) for k in range(j, p))
    return TaskList(tasks, p)


def estimate_weight(bg: BlockGraph, t: Task, fn: str = "bbtc") -> float:
    ij, jk, ik = t.block_keys()
    a, b, c = bg.block(*ij), bg.block(*jk), bg.block(*ik)
    if fn == "bbtc":
        return float(a.nnz * max(c.avg_degree, b.avg_degree))
    if fn == "nnz":
        return float(a.nnz + b.nnz + c.nnz)
    if fn == "density":
        total = 0.0
        for blk in (a, b, c):
            area = blk.src_count * blk.dst_count
            total += blk.nnz / area if area else 0.0
        return total
    if fn == "degree":
        return a.avg_degree + b.avg_degree + c.avg_degree
    raise ValueError(f"unknown estimator {fn!r}; choose from {ESTIMATORS}")


def classify_dense(bg: BlockGraph, t: Task, threshold: float = DEFAULT_DENSE_THRESHOLD) -> bool:
    """Dense when either destination-side block averages >= threshold neighbors."""
    _, jk, ik = t.block_keys()
    return max(bg.block(*jk).avg_degree, bg.block(*ik).avg_degree) >= threshold


def annotate_tasks(
    bg: BlockGraph, tl: TaskList, fn: str = "bbtc", dense_threshold: float = DEFAULT_DENSE_THRESHOLD
) -> TaskList:
    tasks = tuple(
        replace(t, est_weight=estimate_weight(bg, t, fn), dense=classify_dense(bg, t, dense_threshold))
        for t in tl
    )
    return TaskList(tasks, tl.p)


def order_tasks(tl: TaskList) -> TaskList:
    """Stable sort by non-increasing weight."""
    return TaskList(tuple(sorted(tl.tasks, key=lambda t: -t.est_weight)), tl.p)


def build_task_queue(
    bg: BlockGraph, fn: str = "bbtc", dense_threshold: float = DEFAULT_DENSE_THRESHOLD
) -> TaskList:
    return order_tasks(annotate_tasks(bg, compose_tasks(bg), fn, dense_threshold))


def task_operation_counts(bg: BlockGraph, tl: TaskList) -> np.ndarray:
    """Merge steps the list kernel performs per task; the reference workload."""
    return np.array([task_count_list_ops(*t.blocks(bg))[1] for t in tl], dtype=np.int64)


def top_coverage(true_work: np.ndarray, order: list[int] | np.ndarray, top_x: int) -> float:
    """Fraction of the queue, from its head, needed to cover the top_x heaviest tasks.

    ``order`` lists composition indices in queue order; ``true_work`` is
    indexed by composition index.
    """
    n = len(order)
    if n == 0 or top_x <= 0:
        return 0.0
    heaviest = np.argsort(-np.asarray(true_work), kind="stable")[: min(top_x, n)]
    pos = np.empty(n, dtype=np.int64)
    pos[np.asarray(order)] = np.arange(n)
    return float((pos[heaviest].max() + 1) / n)


def top_hit_fraction(true_work: np.ndarray, order: list[int] | np.ndarray, top_x: int, head_frac: float) -> float:
    """Share of the top_x heaviest tasks placed in the first head_frac of the queue."""
    n = len(order)
    if n == 0 or top_x <= 0:
        return 1.0
    heaviest = np.argsort(-np.asarray(true_work), kind="stable")[: min(top_x, n)]
    head = set(np.asarray(order)[: max(1, int(np.ceil(head_frac * n)))].tolist())
    return sum(int(h) in head for h in heaviest) / len(heaviest)


def estimator_order(bg: BlockGraph, fn: str) -> list[int]:
    """Composition indices sorted by non-increasing estimate (stable)."""
    tl = compose_tasks(bg)
    weights = [estimate_weight(bg, t, fn) for t in tl]
    return sorted(range(len(tl)), key=lambda idx: -weights[idx])
