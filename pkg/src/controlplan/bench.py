"""Benchmark runner: one search per (instance, heuristic), results as CSV."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Optional

from .compilation import compile_stats
from .heuristics import INFINITY, make_heuristic
from .io import parse_problem
from .search import SearchConfig, dpex


@dataclass
class BenchRecord:
    instance: str
    domain: str
    heuristic: str
    seed: int
    status: str
    wall_time_ms: float
    expansions: int
    partial_expansions: int
    plan_length: int
    h_at_init: str
    n_actions: int
    n_sigma: int
    n_optimistic: int
    error: str = ""


COLUMNS = [f.name for f in fields(BenchRecord)]


def _run_one(job) -> BenchRecord:
    instance, domain, document, heuristic, config = job
    blank = dict(expansions=0, partial_expansions=0, plan_length=0, h_at_init="", n_actions=0, n_sigma=0, n_optimistic=0)
    start = time.perf_counter()
    try:
        problem = parse_problem(document)
        stats = compile_stats(problem)
        result = dpex(problem, make_heuristic(heuristic, problem), config)
        h0 = result.h_init
        return BenchRecord(
            instance, domain, heuristic, config.seed, result.status,
            round(result.stats.wall_time * 1000, 3),
            result.stats.expansions, result.stats.partial_expansions, result.stats.plan_length,
            "inf" if h0 == INFINITY else str(h0),
            stats.actions, stats.sigma, stats.optimistic,
        )
    except Exception as err:  # a crashing instance must not abort the suite
        return BenchRecord(
            instance, domain, heuristic, config.seed, "Error",
            round((time.perf_counter() - start) * 1000, 3), error=f"{type(err).__name__}: {err}", **blank,
        )


def run_benchmark(
    suite: Iterable[tuple[str, str, object]],
    heuristics: Iterable[str],
    config: Optional[SearchConfig] = None,
    csv_path=None,
    workers: int = 1,
) -> list[BenchRecord]:
    """Run every heuristic on every ``(instance_id, domain, document)`` of ``suite``.

    Documents are JSON strings or decoded dicts; they are parsed inside the
    worker so that parallel runs share nothing mutable.
    """
    config = config or SearchConfig()
    config.check()
    jobs = [(iid, dom, doc, h, config) for iid, dom, doc in suite for h in heuristics]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [_run_one(job) for job in jobs]
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            fh.write(to_csv(records))
    return records


def to_csv(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(asdict(r))
    return buf.getvalue()


def coverage(records: Iterable[BenchRecord]) -> dict[str, int]:
    out: dict[str, int] = {}
    for r in records:
        out.setdefault(r.heuristic, 0)
        if r.status == "Solved":
            out[r.heuristic] += 1
    return out
