"""Command-line front end.

    blocktc count --input g.txt --p 8 --hosts 4 --devices 1
    blocktc verify --input g.txt
    blocktc bench --input g.txt --devices 1 --transfer simulated:1e9,1e-5
    blocktc gen rmat --scale 12 --edge-factor 8 --seed 7 --out rmat12.txt
    blocktc partition --input g.txt --p 8
    blocktc tasks --input g.txt --p 4 --out tasks.csv
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass

from . import bench as bench_mod
from .generators import gnp, rmat, write_raw
from .graph import GraphFormatError, canonicalize, degree_order, guess_format, load_edge_list
from .kernels import DEFAULT_LATAPY_K, tc_hash, tc_latapy, tc_list
from .oracle import DEFAULT_ORACLE_BOUND, brute_force_count
from .partition import partition_stats
from .pipeline import prepare
from .scheduler import DEFAULT_LANES_PER_DEVICE, SchedulerConfig, TransferModel, run
from .tasking import DEFAULT_DENSE_THRESHOLD, ESTIMATORS

SCHEMA = "blocktc.report/1"
VERIFY_P_GRID = (1, 2, 4, 8, 16)

log = logging.getLogger("blocktc")


class CliError(Exception):
    pass


@dataclass
class RunSpec:
    command: str
    input: str | None = None
    format: str | None = None
    p: int | None = None
    estimator: str = "bbtc"
    dense_threshold: float = DEFAULT_DENSE_THRESHOLD
    hosts: int = 1
    devices: int = 0
    lanes: int = DEFAULT_LANES_PER_DEVICE
    cutoff: int | None = None
    transfer: str = "none"
    fast_speedup: float = 1.0
    baseline: str | None = None
    seed: int = 0
    out: str | None = None
    repeat: int = 1
    oracle_bound: int = DEFAULT_ORACLE_BOUND

    def scheduler_config(self) -> SchedulerConfig:
        return SchedulerConfig(
            n_host_workers=self.hosts,
            n_fast_devices=self.devices,
            lanes_per_device=self.lanes,
            cutoff_index=self.cutoff,
            transfer=TransferModel.parse(self.transfer),
            fast_speedup=self.fast_speedup,
        )


def _default_hosts() -> int:
    hosts = os.cpu_count() or 1
    cap = os.environ.get("BBTC_THREADS")
    if cap:
        try:
            hosts = min(hosts, int(cap))
        except ValueError:
            raise CliError(f"BBTC_THREADS must be an integer, got {cap!r}") from None
    return max(hosts, 1)


def _parse_p(text: str) -> int | None:
    if text == "auto":
        return None
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--p expects an integer or 'auto', got {text!r}") from None
    if p < 1:
        raise argparse.ArgumentTypeError("--p must be >= 1")
    return p


def _parse_cutoff(text: str) -> int | None:
    return None if text == "auto" else int(text)


def _spec_from_args(args) -> RunSpec:
    spec = RunSpec(command=args.command)
    for key in asdict(spec):
        if key != "command" and hasattr(args, key):
            setattr(spec, key, getattr(args, key))
    if getattr(args, "hosts", None) is None:
        spec.hosts = _default_hosts()
    elif os.environ.get("BBTC_THREADS"):
        spec.hosts = min(spec.hosts, _default_hosts())
    if spec.input and not spec.format:
        spec.format = guess_format(spec.input)
    return spec


def _load(spec: RunSpec):
    if not spec.input:
        raise CliError("--input is required")
    if not os.path.exists(spec.input):
        raise CliError(f"input file not found: {spec.input}")
    return canonicalize(load_edge_list(spec.input, spec.format))


def _run_baseline(name: str, g, bound: int) -> dict:
    t0 = time.perf_counter()
    if name == "list":
        tau = tc_list(g)
    elif name == "hash":
        tau = tc_hash(g)
    elif name.startswith("latapy"):
        _, _, k = name.partition(":")
        k_val = float(k) if k else DEFAULT_LATAPY_K
        tau = tc_latapy(g, k_val)
    elif name == "brute":
        tau = brute_force_count(g, bound)
    else:
        raise CliError(f"unknown baseline {name!r}")
    return {"method": name, "tau": tau, "elapsed": time.perf_counter() - t0}


def _emit(payload: dict, spec: RunSpec, stdout) -> None:
    text = json.dumps(payload, indent=2, default=_json_default)
    if spec.out:
        with open(spec.out, "w") as fh:
            fh.write(text + "\n")
    else:
        stdout.write(text + "\n")


def _json_default(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, float) and math.isinf(obj):
        return str(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _envelope(spec: RunSpec, **body) -> dict:
    return {"schema": SCHEMA, "spec": asdict(spec), **body}


def cmd_count(spec: RunSpec, stdout) -> int:
    g = _load(spec)
    prep = prepare(g, spec.p, spec.estimator, spec.dense_threshold)
    report = run(prep.bg, prep.tasks, spec.scheduler_config())
    report.partition = {"p": prep.pv.p, "cuts": prep.pv.to_list(), **partition_stats(prep.graph, prep.pv).as_dict()}
    report.warnings.extend(prep.warnings)
    body = {"tau": report.tau, "n": g.n, "m": g.m, "report": report.to_dict(include_events=False)}
    status = 0
    if spec.baseline:
        base = _run_baseline(spec.baseline, g, spec.oracle_bound)
        body["baseline"] = base
        if base["tau"] != report.tau:
            sys.stderr.write(f"mismatch: bbtc={report.tau} {spec.baseline}={base['tau']}\n")
            status = 1
    _emit(_envelope(spec, **body), spec, stdout)
    return status


def cmd_verify(spec: RunSpec, stdout) -> int:
    g = _load(spec)
    if g.n > spec.oracle_bound:
        raise CliError(f"graph has {g.n} vertices; brute-force oracle bound is {spec.oracle_bound}")
    results = [("brute", brute_force_count(g, spec.oracle_bound))]
    results.append(("list", tc_list(g)))
    results.append(("hash", tc_hash(g)))
    for k in (0, 2, DEFAULT_LATAPY_K, math.inf):
        results.append((f"latapy:{k}", tc_latapy(g, k)))
    ordered = degree_order(g)
    cfg = spec.scheduler_config()
    grid = [spec.p] if spec.p else VERIFY_P_GRID
    for p in grid:
        if g.n and p > g.n:
            continue
        prep = prepare(ordered, p, spec.estimator, spec.dense_threshold, ordered=True)
        results.append((f"bbtc:p={p}", run(prep.bg, prep.tasks, cfg).tau))
    ref_name, ref = results[0]
    status = 0
    for name, tau in results[1:]:
        if tau != ref:
            sys.stderr.write(f"mismatch: {ref_name}={ref} {name}={tau}\n")
            status = 1
            break
    _emit(_envelope(spec, ok=status == 0, n=g.n, m=g.m, counts=dict(results)), spec, stdout)
    return status


def cmd_bench(spec: RunSpec, stdout) -> int:
    g = _load(spec)
    prep = prepare(g, spec.p, spec.estimator, spec.dense_threshold)
    body = bench_mod.bench(prep, spec.scheduler_config(), spec.repeat)
    body["partition"] = {"p": prep.pv.p, **partition_stats(prep.graph, prep.pv).as_dict()}
    _emit(_envelope(spec, n=g.n, m=g.m, **body), spec, stdout)
    return 0 if body["tau_consistent"] else 1


def cmd_gen(args, stdout) -> int:
    if args.kind == "gnp":
        raw = gnp(args.n, args.q, args.seed)
    else:
        raw = rmat(args.scale, args.edge_factor, tuple(args.probs), args.seed)
    if args.out:
        write_raw(raw, args.out)
    else:
        for u, v in raw.edges.tolist():
            stdout.write(f"{u} {v}\n")
    return 0


def cmd_partition(spec: RunSpec, stdout) -> int:
    g = _load(spec)
    prep = prepare(g, spec.p, spec.estimator, spec.dense_threshold)
    stats = partition_stats(prep.graph, prep.pv)
    _emit(_envelope(spec, p=prep.pv.p, cuts=prep.pv.to_list(), stats=stats.as_dict(), warnings=prep.warnings), spec, stdout)
    return 0


def cmd_tasks(spec: RunSpec, stdout, as_csv: bool = False) -> int:
    g = _load(spec)
    prep = prepare(g, spec.p, spec.estimator, spec.dense_threshold)
    rows = []
    for pos, t in enumerate(prep.tasks):
        a, b, c = t.blocks(prep.bg)
        rows.append({
            "position": pos, "i": t.i, "j": t.j, "k": t.k,
            "weight": t.est_weight, "dense": t.dense,
            "nnz_ij": a.nnz, "nnz_jk": b.nnz, "nnz_ik": c.nnz,
        })
    if as_csv or (spec.out or "").endswith(".csv"):
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else ["position"])
        writer.writeheader()
        writer.writerows(rows)
        if spec.out:
            with open(spec.out, "w", newline="") as fh:
                fh.write(buf.getvalue())
        else:
            stdout.write(buf.getvalue())
    else:
        _emit(_envelope(spec, p=prep.pv.p, tasks=rows), spec, stdout)
    return 0


def _add_common(sp):
    sp.add_argument("--input", required=True)
    sp.add_argument("--format", choices=["edge-list", "matrix-market"])
    sp.add_argument("--p", type=_parse_p, default=None, help="part count or 'auto'")
    sp.add_argument("--estimator", choices=ESTIMATORS, default="bbtc")
    sp.add_argument("--dense-threshold", type=float, default=DEFAULT_DENSE_THRESHOLD)
    sp.add_argument("--hosts", type=int, default=None)
    sp.add_argument("--devices", type=int, default=0)
    sp.add_argument("--lanes", type=int, default=DEFAULT_LANES_PER_DEVICE)
    sp.add_argument("--cutoff", type=_parse_cutoff, default=None, help="queue index or 'auto'")
    sp.add_argument("--transfer", default="none", help="none | simulated:BPS,LAT")
    sp.add_argument("--fast-speedup", type=float, default=1.0)
    sp.add_argument("--baseline", default=None, help="list | hash | latapy:K | brute")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.add_argument("--oracle-bound", type=int, default=DEFAULT_ORACLE_BOUND)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blocktc", description="Block-based parallel triangle counting.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("count", "count triangles with the block scheduler"),
        ("verify", "compare every counting method against brute force"),
        ("bench", "estimator, cut-off and scaling tables"),
        ("partition", "print the cut vector and balance statistics"),
        ("tasks", "dump the ordered task queue"),
    ):
        sp = sub.add_parser(name, help=help_text)
        _add_common(sp)
        if name == "bench":
            sp.add_argument("--repeat", type=int, default=1)
        if name == "tasks":
            sp.add_argument("--csv", action="store_true")

    gen = sub.add_parser("gen", help="write a seeded synthetic edge list")
    gen.add_argument("kind", choices=["gnp", "rmat"])
    gen.add_argument("--n", type=int, default=100)
    gen.add_argument("--q", type=float, default=0.1)
    gen.add_argument("--scale", type=int, default=10)
    gen.add_argument("--edge-factor", type=float, default=8)
    gen.add_argument("--probs", type=float, nargs=4, default=[0.57, 0.19, 0.19, 0.05], metavar=("A", "B", "C", "D"))
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default=None)
    return parser


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "gen":
            return cmd_gen(args, stdout)
        spec = _spec_from_args(args)
        if args.command == "count":
            return cmd_count(spec, stdout)
        if args.command == "verify":
            return cmd_verify(spec, stdout)
        if args.command == "bench":
            return cmd_bench(spec, stdout)
        if args.command == "partition":
            return cmd_partition(spec, stdout)
        return cmd_tasks(spec, stdout, as_csv=args.csv)
    except (CliError, GraphFormatError, ValueError) as exc:
        sys.stderr.write(f"blocktc: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
