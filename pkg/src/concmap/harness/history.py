"""Operation records and the line-delimited history file format.

One record per line, comma separated::

    thread,key,kind,arg,invoke_ns,respond_ns,report

``arg`` is empty for ``get`` and ``remove``; ``report`` uses the textual
form of :class:`~concmap.api.MapReport`, e.g. ``Replaced(42)``.  A leading
header line is written and tolerated on read.
"""
from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path
from typing import Iterable, NamedTuple, Optional

from ..api import MapReport, UsageError, check_word

FIELDS = ("thread", "key", "kind", "arg", "invoke_ns", "respond_ns", "report")
KINDS = ("insert", "get", "remove")


class OpRecord(NamedTuple):
    thread: int
    key: int
    kind: str
    arg: Optional[int]
    invoke_ns: int
    respond_ns: int
    report: MapReport

    def to_row(self) -> list[str]:
        return [
            str(self.thread), str(self.key), self.kind,
            "" if self.arg is None else str(self.arg),
            str(self.invoke_ns), str(self.respond_ns), str(self.report),
        ]

    @classmethod
    def from_row(cls, row: list[str]) -> "OpRecord":
        if len(row) != len(FIELDS):
            raise UsageError(f"expected {len(FIELDS)} fields, got {row!r}")
        thread, key, kind, arg, inv, resp, report = (f.strip() for f in row)
        if kind not in KINDS:
            raise UsageError(f"unknown operation kind {kind!r}")
        if (kind == "insert") != (arg != ""):
            raise UsageError(f"argument mismatch for {kind}: {arg!r}")
        rec = cls(
            int(thread), check_word("key", int(key)), kind,
            check_word("value", int(arg)) if arg else None,
            int(inv), int(resp), MapReport.parse(report),
        )
        if rec.respond_ns < rec.invoke_ns:
            raise UsageError(f"response precedes invocation: {row!r}")
        return rec


def write_history(path: str | Path, records: Iterable[OpRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FIELDS)
        for rec in records:
            w.writerow(rec.to_row())


def read_history(path: str | Path) -> list[OpRecord]:
    out = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or (i == 0 and row[0].strip() == "thread"):
                continue
            out.append(OpRecord.from_row(row))
    return out


def group_by_key(records: Iterable[OpRecord]) -> dict[int, list[OpRecord]]:
    groups: dict[int, list[OpRecord]] = defaultdict(list)
    for rec in records:
        groups[rec.key].append(rec)
    return dict(groups)
