"""Experiment tables: estimator quality, cut-off sweep, worker scaling."""

from __future__ import annotations

import statistics
from dataclasses import replace

from .pipeline import Prepared
from .scheduler import SchedulerConfig, run
from .tasking import ESTIMATORS, compose_tasks, estimator_order, task_operation_counts, top_coverage, top_hit_fraction

TOP_X = (1, 2, 4, 8, 16, 32)
CUTOFF_STEPS = 8


def estimator_table(prep: Prepared, top_x=TOP_X, head_frac: float = 0.10, hit_top: int = 16) -> dict:
    """Per estimator: queue fraction needed to cover the x heaviest tasks, and head hit rate.

    Heaviness is the exact merge-step count of the list kernel per task.
    """
    work = task_operation_counts(prep.bg, compose_tasks(prep.bg))
    rows = {}
    for fn in ESTIMATORS:
        order = estimator_order(prep.bg, fn)
        rows[fn] = {
            "coverage": {str(x): top_coverage(work, order, x) for x in top_x if x <= len(order)},
            f"top{hit_top}_in_head": top_hit_fraction(work, order, hit_top, head_frac),
        }
    return {"n_tasks": int(work.size), "total_ops": int(work.sum()), "head_frac": head_frac, "estimators": rows}


def _timed(prep: Prepared, cfg: SchedulerConfig, repeat: int) -> dict:
    reports = [run(prep.bg, prep.tasks, cfg) for _ in range(repeat)]
    taus = {r.tau for r in reports}
    if len(taus) != 1:
        raise RuntimeError(f"non-deterministic triangle count across repeats: {sorted(taus)}")
    elapsed = statistics.median(r.elapsed for r in reports)
    last = reports[-1]
    kinds = {"fast": 0, "host": 0}
    for w in last.workers.values():
        kinds[w["kind"]] += w["tasks"]
    return {
        "tau": last.tau,
        "elapsed": elapsed,
        "rate": prep.bg.m / elapsed if elapsed > 0 else 0.0,
        "cutoff": last.cutoff,
        "fast_tasks": kinds["fast"],
        "host_tasks": kinds["host"],
        "fast_makespan": max((d["makespan"] for d in last.devices), default=0.0),
        **last.overlap_totals(),
    }


def cutoff_sweep(prep: Prepared, cfg: SchedulerConfig, repeat: int = 1) -> list[dict]:
    """Cut-off at every multiple of |T|/8, from 0 to |T| (9 points)."""
    if cfg.n_fast_devices == 0:
        cfg = replace(cfg, n_fast_devices=1)
    n = len(prep.tasks)
    rows = []
    for step in range(CUTOFF_STEPS + 1):
        cut = step * n // CUTOFF_STEPS
        rows.append({"step": step, **_timed(prep, replace(cfg, cutoff_index=cut), repeat)})
    return rows


def worker_scaling(prep: Prepared, cfg: SchedulerConfig, repeat: int = 1) -> list[dict]:
    top = max(cfg.n_host_workers, 1)
    counts = [1]
    while counts[-1] * 2 <= top:
        counts.append(counts[-1] * 2)
    if counts[-1] != top:
        counts.append(top)
    rows = []
    for hosts in counts:
        rows.append({"hosts": hosts, **_timed(prep, replace(cfg, n_host_workers=hosts, cutoff_index=None), repeat)})
    return rows


def bench(prep: Prepared, cfg: SchedulerConfig, repeat: int = 1) -> dict:
    sweep = cutoff_sweep(prep, cfg, repeat)
    scaling = worker_scaling(prep, cfg, repeat)
    taus = {row["tau"] for row in sweep + scaling}
    return {
        "estimators": estimator_table(prep),
        "cutoff_sweep": sweep,
        "worker_scaling": scaling,
        "tau_consistent": len(taus) == 1,
        "tau": taus.pop() if len(taus) == 1 else sorted(taus),
    }
