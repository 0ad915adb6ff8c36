"""End-to-end wiring: order, partition, block, compose, run."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .bcsr import BlockGraph, build_block_graph
from .graph import GraphCsr, RawEdgeList, canonicalize, degree_order
from .partition import PartitionVector, default_part_count, partition_stats, partition_symmetric
from .scheduler import RunReport, SchedulerConfig, count_sequential, run
from .tasking import DEFAULT_DENSE_THRESHOLD, TaskList, build_task_queue


@dataclass
class Prepared:
    graph: GraphCsr
    pv: PartitionVector
    bg: BlockGraph
    tasks: TaskList
    warnings: list[str]


def prepare(
    g: GraphCsr | RawEdgeList,
    p: int | None = None,
    estimator: str = "bbtc",
    dense_threshold: float = DEFAULT_DENSE_THRESHOLD,
    ordered: bool = False,
) -> Prepared:
    """Degree-order ``g`` (unless ``ordered``), partition it and build the task queue."""
    if isinstance(g, RawEdgeList):
        g = canonicalize(g)
    if not ordered:
        g = degree_order(g)
    if p is None:
        p = default_part_count(g)
    notes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pv = partition_symmetric(g, p)
    notes.extend(str(w.message) for w in caught)
    bg = build_block_graph(g, pv)
    tl = build_task_queue(bg, estimator, dense_threshold)
    return Prepared(g, pv, bg, tl, notes)


def count_triangles(
    g: GraphCsr | RawEdgeList,
    p: int | None = None,
    config: SchedulerConfig | None = None,
    estimator: str = "bbtc",
    dense_threshold: float = DEFAULT_DENSE_THRESHOLD,
) -> RunReport:
    prep = prepare(g, p, estimator, dense_threshold)
    report = run(prep.bg, prep.tasks, config)
    report.partition = {"p": prep.pv.p, "cuts": prep.pv.to_list(), **partition_stats(prep.graph, prep.pv).as_dict()}
    report.warnings.extend(prep.warnings)
    return report


def block_count(g: GraphCsr, p: int, dense_threshold: float = DEFAULT_DENSE_THRESHOLD) -> int:
    """Single-threaded block-based count of an already canonical graph."""
    prep = prepare(g, p, dense_threshold=dense_threshold)
    return count_sequential(prep.bg, prep.tasks)
