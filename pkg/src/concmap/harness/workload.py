"""Throughput benchmark and recorded stress runs.

Readers issue uniform-random gets; writers split uniform-random operations
50/50 between insert and remove, which keeps the map size near the prefill
level.  With ``read_fraction`` set, every thread instead runs a mixed stream
with that share of gets.

Throughput is the sum of per-thread counters, collected after join, over
the window between the start barrier and the stop signal.
"""
from __future__ import annotations

import csv
import os
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Optional

from ..api import UsageError
from ..coarse import CoarseMap
from ..lockfree_map import new_map
from ..striped import StripedMap
from .history import OpRecord, group_by_key

IMPLS: dict[str, Callable] = {
    "coarse": CoarseMap,
    "striped": StripedMap,
    "lockfree": new_map,
}

CSV_COLUMNS = ("impl", "readers", "writers", "duration_s", "reads_per_sec", "writes_per_sec", "seed")

MAX_RECORDED_KEYSPACE = 256


def make_map(impl: str, nbuckets: int, **kwargs):
    try:
        factory = IMPLS[impl]
    except KeyError:
        raise UsageError(f"unknown impl {impl!r}; choose from {', '.join(IMPLS)}") from None
    return factory(nbuckets, **kwargs)


@dataclass
class BenchConfig:
    impl: str = "lockfree"
    readers: int = 1
    writers: int = 0
    duration: float = 1.0
    keyspace: int = 1024
    prefill: int = 512
    nbuckets: int = 1024
    seed: int = 0
    csv_path: Optional[str] = None
    read_fraction: Optional[float] = None

    def validate(self) -> "BenchConfig":
        if self.impl not in IMPLS:
            raise UsageError(f"unknown impl {self.impl!r}; choose from {', '.join(IMPLS)}")
        if self.readers < 0 or self.writers < 0 or self.readers + self.writers < 1:
            raise UsageError("need readers + writers >= 1")
        if self.keyspace < 1:
            raise UsageError("keyspace must be >= 1")
        if not 0 <= self.prefill <= self.keyspace:
            raise UsageError("prefill must be between 0 and keyspace")
        if self.nbuckets < 1:
            raise UsageError("nbuckets must be >= 1")
        if self.duration <= 0:
            raise UsageError("duration must be positive")
        if self.read_fraction is not None and not 0 <= self.read_fraction <= 1:
            raise UsageError("read_fraction must be within [0, 1]")
        return self

    @property
    def threads(self) -> int:
        return self.readers + self.writers


@dataclass
class BenchRow:
    impl: str
    readers: int
    writers: int
    duration_s: float
    reads_per_sec: float
    writes_per_sec: float
    seed: int

    def as_row(self) -> list[str]:
        return [
            self.impl, str(self.readers), str(self.writers), f"{self.duration_s:.6f}",
            f"{self.reads_per_sec:.3f}", f"{self.writes_per_sec:.3f}", str(self.seed),
        ]


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    notes: dict[str, str] = field(default_factory=dict)

    @property
    def reads_per_sec(self) -> float:
        return sum(r.reads_per_sec for r in self.rows)

    @property
    def writes_per_sec(self) -> float:
        return sum(r.writes_per_sec for r in self.rows)


def worker_rng(seed: int, index: int) -> random.Random:
    return random.Random(f"{seed}/{index}")


def op_stream(
    seed: int, index: int, role: str, keyspace: int, read_fraction: Optional[float] = None
) -> Iterator[tuple[str, int, int]]:
    """Endless ``(kind, key, value)`` stream for worker ``index``.

    ``role`` is ``"reader"`` or ``"writer"``; it is ignored when
    ``read_fraction`` is given.
    """
    rng = worker_rng(seed, index)
    randrange = rng.randrange
    rand = rng.random
    bits = rng.getrandbits
    if read_fraction is not None:
        while True:
            key = randrange(keyspace)
            r = rand()
            if r < read_fraction:
                yield "get", key, 0
            elif r < read_fraction + (1 - read_fraction) / 2:
                yield "insert", key, bits(64)
            else:
                yield "remove", key, 0
    elif role == "reader":
        while True:
            yield "get", randrange(keyspace), 0
    else:
        while True:
            key = randrange(keyspace)
            if rand() < 0.5:
                yield "insert", key, bits(64)
            else:
                yield "remove", key, 0


PREFILL_THREAD = -1


def prefill_map(m, c: BenchConfig, record: bool = False) -> list[OpRecord]:
    """Insert ``c.prefill`` distinct random keys; optionally log them as thread -1."""
    rng = random.Random(f"{c.seed}/prefill")
    log = []
    clock = time.perf_counter_ns
    for key in rng.sample(range(c.keyspace), c.prefill):
        value = rng.getrandbits(64)
        t0 = clock()
        rep = m.insert(key, value)
        if record:
            log.append(OpRecord(PREFILL_THREAD, key, "insert", value, t0, max(clock(), t0 + 1), rep))
    return log


def _roles(c: BenchConfig) -> list[str]:
    return ["reader"] * c.readers + ["writer"] * c.writers


def run_bench(c: BenchConfig, m=None) -> BenchReport:
    c.validate()
    if c.csv_path:
        # fail before the run, not after it
        open(c.csv_path, "a").close()
    if m is None:
        m = make_map(c.impl, c.nbuckets)
        prefill_map(m, c)
    roles = _roles(c)
    n = len(roles)
    reads = [0] * n
    writes = [0] * n
    ended = [0.0] * n
    running = [True]
    barrier = threading.Barrier(n + 1)

    def work(i: int, role: str) -> None:
        get, insert, remove = m.get, m.insert, m.remove
        stream = op_stream(c.seed, i, role, c.keyspace, c.read_fraction)
        r = w = 0
        barrier.wait()
        for kind, key, value in stream:
            if not running[0]:
                break
            if kind == "get":
                get(key)
                r += 1
            elif kind == "insert":
                insert(key, value)
                w += 1
            else:
                remove(key)
                w += 1
        ended[i] = time.perf_counter()
        reads[i] = r
        writes[i] = w

    threads = [threading.Thread(target=work, args=(i, role), daemon=True) for i, role in enumerate(roles)]
    for t in threads:
        t.start()
    barrier.wait()
    start = time.perf_counter()
    time.sleep(c.duration)
    running[0] = False
    for t in threads:
        t.join()
    elapsed = max(ended) - start
    row = BenchRow(
        c.impl, c.readers, c.writers, elapsed,
        sum(reads) / elapsed, sum(writes) / elapsed, c.seed,
    )
    report = BenchReport([row])
    if isinstance(m, CoarseMap):
        report.notes["lock_policy"] = m.lock_policy
    if c.csv_path:
        append_csv(c.csv_path, report)
    return report


def append_csv(path: str | os.PathLike, report: BenchReport) -> None:
    p = Path(path)
    fresh = not p.exists() or p.stat().st_size == 0
    with open(p, "a", newline="") as fh:
        w = csv.writer(fh)
        if fresh:
            w.writerow(CSV_COLUMNS)
        for row in report.rows:
            w.writerow(row.as_row())


@dataclass
class StressResult:
    snapshot: dict[int, int]
    records: list[OpRecord]

    @property
    def history(self) -> dict[int, list[OpRecord]]:
        return group_by_key(self.records)


def run_stress(
    c: BenchConfig,
    ops: int,
    record: bool = False,
    *,
    m=None,
    wrap: Optional[Callable] = None,
) -> StressResult:
    """Run ``ops`` operations split across the configured threads.

    With ``record=True`` every operation is logged with invocation and
    response timestamps; keyspace must then be at most 256.  ``wrap`` lets a
    test interpose a shim around the map.
    """
    c.validate()
    if record and c.keyspace > MAX_RECORDED_KEYSPACE:
        raise UsageError(f"recorded runs need keyspace <= {MAX_RECORDED_KEYSPACE}")
    prefill_log: list[OpRecord] = []
    if m is None:
        m = make_map(c.impl, c.nbuckets)
        prefill_log = prefill_map(m, c, record)
    if wrap is not None:
        m = wrap(m)
    roles = _roles(c)
    n = len(roles)
    quotas = [ops // n + (1 if i < ops % n else 0) for i in range(n)]
    logs: list[list[OpRecord]] = [[] for _ in range(n)]
    barrier = threading.Barrier(n)
    clock = time.perf_counter_ns

    def work(i: int, role: str) -> None:
        get, insert, remove = m.get, m.insert, m.remove
        stream = op_stream(c.seed, i, role, c.keyspace, c.read_fraction)
        log = logs[i]
        barrier.wait()
        for _ in range(quotas[i]):
            kind, key, value = next(stream)
            t0 = clock() if record else 0
            if kind == "get":
                rep = get(key)
                arg = None
            elif kind == "insert":
                rep = insert(key, value)
                arg = value
            else:
                rep = remove(key)
                arg = None
            if record:
                log.append(OpRecord(i, key, kind, arg, t0, max(clock(), t0 + 1), rep))

    threads = [threading.Thread(target=work, args=(i, role), daemon=True) for i, role in enumerate(roles)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    records = prefill_log + [rec for log in logs for rec in log]
    return StressResult(m.snapshot(), records)
