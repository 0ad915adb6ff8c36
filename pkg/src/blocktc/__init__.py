"""Block-based triangle counting on symmetric rectilinear partitions."""

from .bcsr import BlockGraph, SubgraphBlock, build_block_graph
from .graph import GraphCsr, RawEdgeList, canonicalize, degree_order, load_edge_list
from .kernels import tc_hash, tc_latapy, tc_list
from .partition import PartitionVector, partition_stats, partition_symmetric
from .pipeline import count_triangles, prepare
from .scheduler import RunReport, SchedulerConfig, run
from .tasking import Task, TaskList, build_task_queue, compose_tasks

__all__ = [
    "BlockGraph",
    "GraphCsr",
    "PartitionVector",
    "RawEdgeList",
    "RunReport",
    "SchedulerConfig",
    "SubgraphBlock",
    "Task",
    "TaskList",
    "build_block_graph",
    "build_task_queue",
    "canonicalize",
    "compose_tasks",
    "count_triangles",
    "degree_order",
    "load_edge_list",
    "partition_stats",
    "partition_symmetric",
    "prepare",
    "run",
    "tc_hash",
    "tc_latapy",
    "tc_list",
]
