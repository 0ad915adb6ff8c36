"""Dual-ended execution of the ordered task queue.

Fast lanes (streams of a fast device) take heavy tasks from the head of the
queue in a fixed round-robin until the cut-off, then claim leftovers past it.
Host workers walk the queue from the tail with a shared cursor and never go
below the cut-off. Every task is claimed through a test-and-set flag, so
each one runs exactly once.

Device memory is not real: each device keeps a residency set, and block
copies are charged on a per-device copy engine in virtual time. Fast-lane
compute also advances a virtual clock, which lets the run report how much
transfer time was hidden behind compute.
"""

from __future__ import annotations

import logging
import threading
import time
from collections import Counter, OrderedDict
from dataclasses import asdict, dataclass, field
from typing import Callable

from .bcsr import BlockGraph
from .kernels import ScratchMap, task_count_hash, task_count_list
from .tasking import Task, TaskList

log = logging.getLogger(__name__)

DEFAULT_LANES_PER_DEVICE = 4


@dataclass(frozen=True)
class TransferModel:
    bytes_per_second: float
    latency: float = 0.0

    def __post_init__(self):
        if self.bytes_per_second <= 0 or self.latency < 0:
            raise ValueError("transfer model needs positive bandwidth and non-negative latency")

    def duration(self, nbytes: int) -> float:
        return self.latency + nbytes / self.bytes_per_second

    @classmethod
    def parse(cls, text: str) -> TransferModel | None:
        """``none`` or ``simulated:BPS,LAT``."""
        if text in ("", "none"):
            return None
        kind, _, params = text.partition(":")
        if kind != "simulated":
            raise ValueError(f"unknown transfer model {text!r}")
        bps, _, lat = params.partition(",")
        return cls(float(bps), float(lat or 0.0))


@dataclass
class SchedulerConfig:
    n_host_workers: int = 1
    n_fast_devices: int = 0
    lanes_per_device: int = DEFAULT_LANES_PER_DEVICE
    cutoff_index: int | None = None
    transfer: TransferModel | None = None
    fast_speedup: float = 1.0
    # bytes per device; None keeps every copied block resident
    residency_capacity: int | None = None
    # virtual seconds per fast-lane task; None uses measured time / fast_speedup
    compute_cost: Callable[[Task], float] | None = None

    @property
    def n_lanes(self) -> int:
        return self.n_fast_devices * self.lanes_per_device

    def validate(self, n_tasks: int) -> None:
        if self.n_host_workers < 0 or self.n_fast_devices < 0 or self.lanes_per_device < 1:
            raise ValueError("worker counts must be non-negative and lanes_per_device >= 1")
        if self.n_host_workers == 0 and self.n_fast_devices == 0:
            raise ValueError("need at least one host worker or fast device")
        if self.cutoff_index is not None and not 0 <= self.cutoff_index <= n_tasks:
            raise ValueError(f"cutoff {self.cutoff_index} outside [0, {n_tasks}]")
        if self.fast_speedup <= 0:
            raise ValueError("fast_speedup must be positive")

    def describe(self) -> dict:
        d = asdict(self)
        d["compute_cost"] = None if self.compute_cost is None else "custom"
        d["transfer"] = None if self.transfer is None else asdict(self.transfer)
        return d


def default_cutoff(tl: TaskList | int, n_fast_devices: int = 1) -> int:
    """Middle of the queue; 0 when there is no fast device to reserve work for."""
    if n_fast_devices == 0:
        return 0
    return (tl if isinstance(tl, int) else len(tl)) // 2


class TaskQueueState:
    """Claim flags, the host cursor, and the fixed cut-off."""

    def __init__(self, n_tasks: int, cutoff: int):
        self.claim_flags = bytearray(n_tasks)
        self.host_cursor = n_tasks
        self.cutoff = cutoff
        self._lock = threading.Lock()

    def claim(self, idx: int) -> bool:
        """Test-and-set; True when the caller won the task."""
        with self._lock:
            if self.claim_flags[idx]:
                return False
            self.claim_flags[idx] = 1
            return True

    def decrement_cursor(self) -> int:
        with self._lock:
            self.host_cursor -= 1
            return self.host_cursor


@dataclass
class TransferRecord:
    block: tuple[int, int]
    nbytes: int
    start: float
    end: float


class DeviceResidency:
    """Blocks resident on one device, with their copy-completion times."""

    def __init__(self, device: int, transfer: TransferModel | None, capacity: int | None = None):
        self.device = device
        self.transfer = transfer
        self.capacity = capacity
        self.ready_at: OrderedDict[tuple[int, int], float] = OrderedDict()
        self.sizes: dict[tuple[int, int], int] = {}
        self.transfers: list[TransferRecord] = []
        self.compute_intervals: list[tuple[float, float]] = []
        self.engine_free = 0.0
        self.lock = threading.Lock()

    def is_copied(self, key) -> bool:
        return key in self.ready_at

    def ensure(self, key: tuple[int, int], nbytes: int, issue_time: float, pinned=()) -> float:
        """Make ``key`` resident, issuing a copy at ``issue_time`` if needed. Returns ready time."""
        with self.lock:
            if key in self.ready_at:
                self.ready_at.move_to_end(key)
                return self.ready_at[key]
            start = max(issue_time, self.engine_free)
            end = start + (self.transfer.duration(nbytes) if self.transfer else 0.0)
            self.engine_free = end
            self.transfers.append(TransferRecord(key, nbytes, start, end))
            self.ready_at[key] = end
            self.sizes[key] = nbytes
            self._evict(keep=set(pinned) | {key})
            return end

    def _evict(self, keep):
        if self.capacity is None:
            return
        used = sum(self.sizes.values())
        for key in list(self.ready_at):
            if used <= self.capacity:
                break
            if key in keep:
                continue
            used -= self.sizes.pop(key)
            del self.ready_at[key]

    def add_compute(self, start: float, end: float):
        with self.lock:
            self.compute_intervals.append((start, end))

    def overlap(self) -> dict:
        total = sum(t.end - t.start for t in self.transfers)
        busy = _merge([(t.start, t.end) for t in self.transfers])
        compute = _merge(self.compute_intervals)
        hidden = _intersection_length(busy, compute)
        exposed = _length(busy) - hidden
        return {
            "device": self.device,
            "transfers": len(self.transfers),
            "bytes": sum(t.nbytes for t in self.transfers),
            "total_transfer": total,
            "exposed_transfer": max(exposed, 0.0),
            "hidden_transfer": total - max(exposed, 0.0),
            "makespan": max((e for _, e in self.compute_intervals), default=0.0),
        }


def _merge(intervals):
    out = []
    for s, e in sorted(intervals):
        if e <= s:
            continue
        if out and s <= out[-1][1]:
            out[-1][1] = max(out[-1][1], e)
        else:
            out.append([s, e])
    return out


def _length(merged) -> float:
    return sum(e - s for s, e in merged)


def _intersection_length(a, b) -> float:
    i = j = 0
    total = 0.0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if hi > lo:
            total += hi - lo
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return total


@dataclass
class TaskEvent:
    index: int
    triplet: tuple[int, int, int]
    worker: str
    kind: str
    phase: int
    dense: bool
    count: int
    wall_start: float
    wall_end: float
    ready_at: float | None = None
    sim_start: float | None = None
    sim_end: float | None = None
    device: int | None = None


@dataclass
class RunReport:
    tau: int
    n_tasks: int
    cutoff: int
    elapsed: float
    m: int
    events: list[TaskEvent]
    workers: dict[str, dict]
    devices: list[dict]
    config: dict
    partition: dict | None = None
    warnings: list[str] = field(default_factory=list)
    transfer_log: dict[int, list[TransferRecord]] = field(default_factory=dict)

    @property
    def rate(self) -> float:
        """Edges per second."""
        return self.m / self.elapsed if self.elapsed > 0 else 0.0

    def overlap_totals(self) -> dict:
        total = sum(d["total_transfer"] for d in self.devices)
        exposed = sum(d["exposed_transfer"] for d in self.devices)
        return {"total_transfer": total, "exposed_transfer": exposed, "hidden_transfer": total - exposed}

    def to_dict(self, include_events: bool = True) -> dict:
        d = {
            "tau": self.tau,
            "n_tasks": self.n_tasks,
            "cutoff": self.cutoff,
            "elapsed": self.elapsed,
            "m": self.m,
            "rate": self.rate,
            "workers": self.workers,
            "devices": self.devices,
            "overlap": self.overlap_totals(),
            "config": self.config,
            "partition": self.partition,
            "warnings": self.warnings,
        }
        if include_events:
            d["events"] = [asdict(e) for e in self.events]
        return d


class _Lane:
    def __init__(self, lane_id: int, n_devices: int, residency: DeviceResidency, scratch_size: int):
        self.lane_id = lane_id
        self.device = lane_id % n_devices
        self.stream = lane_id // n_devices
        self.name = f"lane{lane_id}"
        self.residency = residency
        self.scratch = ScratchMap(scratch_size)
        self.clock = 0.0
        # copies for the next task are issued once the current one starts computing
        self.issue_time = 0.0


class _Run:
    def __init__(self, bg: BlockGraph, tl: TaskList, cfg: SchedulerConfig, cutoff: int):
        self.bg = bg
        self.tl = tl
        self.cfg = cfg
        self.state = TaskQueueState(len(tl), cutoff)
        self.events: list[TaskEvent] = []
        self.scratch_size = bg.max_part_size()
        self.devices = [
            DeviceResidency(d, cfg.transfer, cfg.residency_capacity) for d in range(cfg.n_fast_devices)
        ]
        self.t0 = time.perf_counter()

    def _kernel(self, task: Task, scratch: ScratchMap) -> int:
        a, b, c = task.blocks(self.bg)
        if task.dense:
            return task_count_hash(a, b, c, scratch)
        return task_count_list(a, b, c)

    def _prefetch(self, lane: _Lane, idx: int) -> float:
        if idx >= len(self.tl):
            return 0.0
        keys = self.tl[idx].block_keys()
        ready = 0.0
        for key in keys:
            nbytes = self.bg.block(*key).nbytes
            ready = max(ready, lane.residency.ensure(key, nbytes, lane.issue_time, pinned=keys))
        return ready

    def _lane_execute(self, lane: _Lane, idx: int, phase: int):
        task = self.tl[idx]
        ready = self._prefetch(lane, idx)
        sim_start = max(lane.clock, ready)
        lane.issue_time = sim_start
        w0 = time.perf_counter()
        count = self._kernel(task, lane.scratch)
        w1 = time.perf_counter()
        if self.cfg.compute_cost is not None:
            dur = float(self.cfg.compute_cost(task))
        else:
            dur = (w1 - w0) / self.cfg.fast_speedup
        lane.clock = sim_start + dur
        lane.residency.add_compute(sim_start, lane.clock)
        self.events.append(TaskEvent(
            idx, task.triplet, lane.name, "fast", phase, task.dense, count,
            w0 - self.t0, w1 - self.t0, ready, sim_start, lane.clock, lane.device,
        ))

    def fast_lane_loop(self, lane: _Lane):
        n = len(self.tl)
        stride = self.cfg.n_lanes
        idx = lane.lane_id
        while idx < self.state.cutoff:
            self.state.claim(idx)
            self._lane_execute(lane, idx, 1)
            idx += stride
        self._prefetch(lane, idx)
        while idx < n and self.state.claim(idx):
            self._lane_execute(lane, idx, 2)
            idx += stride
            self._prefetch(lane, idx)

    def host_worker_loop(self, name: str):
        scratch = ScratchMap(self.scratch_size)
        while True:
            idx = self.state.decrement_cursor()
            if idx < self.state.cutoff:
                break
            if not self.state.claim(idx):
                continue
            task = self.tl[idx]
            w0 = time.perf_counter()
            count = self._kernel(task, scratch)
            w1 = time.perf_counter()
            self.events.append(
                TaskEvent(idx, task.triplet, name, "host", 0, task.dense, count, w0 - self.t0, w1 - self.t0)
            )


def run(bg: BlockGraph, tl: TaskList, cfg: SchedulerConfig | None = None) -> RunReport:
    """Execute every task once across fast lanes and host workers; sum the counts."""
    cfg = cfg or SchedulerConfig()
    cfg.validate(len(tl))
    if cfg.n_fast_devices == 0:
        cutoff = 0
    elif cfg.cutoff_index is None:
        cutoff = default_cutoff(tl, cfg.n_fast_devices)
    else:
        cutoff = cfg.cutoff_index

    state = _Run(bg, tl, cfg, cutoff)
    errors: list[BaseException] = []

    def guard(fn, *args):
        try:
            fn(*args)
        except BaseException as exc:  # surfaced after join
            errors.append(exc)

    threads = []
    for lane_id in range(cfg.n_lanes):
        lane = _Lane(lane_id, cfg.n_fast_devices, state.devices[lane_id % cfg.n_fast_devices], state.scratch_size)
        threads.append(threading.Thread(target=guard, args=(state.fast_lane_loop, lane), name=lane.name))
    for h in range(cfg.n_host_workers):
        threads.append(threading.Thread(target=guard, args=(state.host_worker_loop, f"host{h}"), name=f"host{h}"))
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    elapsed = time.perf_counter() - state.t0
    if errors:
        raise RuntimeError("worker failed") from errors[0]

    events = sorted(state.events, key=lambda ev: ev.index)
    if [ev.index for ev in events] != list(range(len(tl))):
        seen = Counter(ev.index for ev in events)
        bad = [i for i in range(len(tl)) if seen[i] != 1]
        raise RuntimeError(f"tasks not executed exactly once: {bad[:10]}")

    workers: dict[str, dict] = {}
    for ev in events:
        w = workers.setdefault(ev.worker, {"kind": ev.kind, "tasks": 0, "time": 0.0, "tau": 0})
        w["tasks"] += 1
        w["time"] += ev.wall_end - ev.wall_start
        w["tau"] += ev.count
    tau = sum(w["tau"] for w in workers.values())
    log.debug("run: tau=%d tasks=%d cutoff=%d elapsed=%.4fs", tau, len(tl), cutoff, elapsed)
    return RunReport(
        tau=tau,
        n_tasks=len(tl),
        cutoff=cutoff,
        elapsed=elapsed,
        m=bg.m,
        events=events,
        workers=workers,
        devices=[d.overlap() for d in state.devices],
        config=cfg.describe(),
        transfer_log={d.device: list(d.transfers) for d in state.devices},
    )


def count_sequential(bg: BlockGraph, tl: TaskList) -> int:
    """Sum of per-task counts in queue order, one thread."""
    scratch = ScratchMap(bg.max_part_size())
    total = 0
    for t in tl:
        a, b, c = t.blocks(bg)
        total += task_count_hash(a, b, c, scratch) if t.dense else task_count_list(a, b, c)
    return total
