"""Shared map contract: reports, hashing and bucket placement.

Every map tier in this package stores 64-bit unsigned keys and values and
answers each operation with a :class:`MapReport`.  Bucket placement is
FNV-1a/64 over the key's little-endian bytes, reduced modulo the bucket
count, so placement is identical across tiers.
"""
from __future__ import annotations

import enum
import re
from typing import NamedTuple, Optional, Protocol

FNV_OFFSET_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x00000100000001B3
MASK64 = (1 << 64) - 1


class UsageError(ValueError):
    """Raised when an API is called outside its contract."""


class Outcome(enum.Enum):
    INSERTED = "Inserted"
    REPLACED = "Replaced"
    FOUND = "Found"
    NOT_FOUND = "NotFound"
    REMOVED = "Removed"


class MapReport(NamedTuple):
    """Result of one map operation.

    ``value`` carries the prior value for ``REPLACED``/``REMOVED`` and the
    observed value for ``FOUND``; it is ``None`` otherwise.
    """

    outcome: Outcome
    value: Optional[int] = None

    def __str__(self) -> str:
        if self.value is None:
            return self.outcome.value
        return f"{self.outcome.value}({self.value})"

    @classmethod
    def parse(cls, text: str) -> "MapReport":
        m = _REPORT_RE.fullmatch(text.strip())
        if m is None:
            raise UsageError(f"unparseable report {text!r}")
        outcome = Outcome(m.group(1))
        arg = m.group(2)
        carries = outcome in (Outcome.REPLACED, Outcome.FOUND, Outcome.REMOVED)
        if carries != (arg is not None):
            raise UsageError(f"malformed report {text!r}")
        return cls(outcome, None if arg is None else int(arg))


_REPORT_RE = re.compile(r"(Inserted|Replaced|Found|NotFound|Removed)(?:\((\d+)\))?")

INSERTED = MapReport(Outcome.INSERTED)
NOT_FOUND = MapReport(Outcome.NOT_FOUND)


def replaced(prior: int) -> MapReport:
    return MapReport(Outcome.REPLACED, prior)


def found(value: int) -> MapReport:
    return MapReport(Outcome.FOUND, value)


def removed(value: int) -> MapReport:
    return MapReport(Outcome.REMOVED, value)


class ConcurrentMap(Protocol):
    """What every tier (and the sequential oracle) provides."""

    nbuckets: int

    def insert(self, key: int, value: int) -> MapReport: ...

    def get(self, key: int) -> MapReport: ...

    def remove(self, key: int) -> MapReport: ...

    def snapshot(self) -> dict[int, int]: ...


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET_BASIS
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & MASK64
    return h


def hash_key(key: int) -> int:
    """FNV-1a/64 digest of ``key`` taken as 8 little-endian bytes."""
    h = FNV_OFFSET_BASIS
    # Same as fnv1a_64(key.to_bytes(8, "little")), without the bytes object.
    for shift in (0, 8, 16, 24, 32, 40, 48, 56):
        h = ((h ^ ((key >> shift) & 0xFF)) * FNV_PRIME) & MASK64
    return h


def bucket_index(digest: int, nbuckets: int) -> int:
    if nbuckets < 1:
        raise UsageError("nbuckets must be >= 1")
    return digest % nbuckets


def check_nbuckets(nbuckets: int) -> int:
    if not isinstance(nbuckets, int) or nbuckets < 1:
        raise UsageError(f"nbuckets must be a positive integer, got {nbuckets!r}")
    return nbuckets


def check_word(name: str, x: int) -> int:
    if not 0 <= x <= MASK64:
        raise UsageError(f"{name} {x!r} is outside the unsigned 64-bit range")
    return x
