"""Fine-grained tier: one exclusive lock per bucket, sorted chains."""
from __future__ import annotations

import threading
from typing import Optional

from .api import (
    INSERTED,
    NOT_FOUND,
    MapReport,
    check_nbuckets,
    found,
    hash_key,
    removed,
    replaced,
)


class _Entry:
    __slots__ = ("key", "value", "next")

    def __init__(self, key: int, value: int, next: Optional["_Entry"]) -> None:
        self.key = key
        self.value = value
        self.next = next


class _Bucket:
    __slots__ = ("lock", "head")

    def __init__(self) -> None:
        self.lock = threading.Lock()
        self.head: Optional[_Entry] = None


def _locate(bucket: _Bucket, key: int) -> tuple[Optional[_Entry], Optional[_Entry], int]:
    """Return ``(prev, node, probes)``: node is the first entry with key >= ``key``."""
    prev = None
    node = bucket.head
    probes = 0
    while node is not None:
        probes += 1
        if node.key >= key:
            break
        prev = node
        node = node.next
    return prev, node, probes


class StripedMap:
    """Hashmap whose buckets are each guarded by their own lock.

    No operation holds more than one bucket lock, so the map cannot deadlock.
    Removed entries are unlinked and dropped under the bucket lock; nothing
    else can be reading that chain at the time, so reclamation is immediate.

    Pass ``check_invariants=True`` to assert chain ordering after every
    mutation (slow; meant for tests).
    """

    def __init__(self, nbuckets: int = 1 << 16, *, check_invariants: bool = False) -> None:
        self.nbuckets = check_nbuckets(nbuckets)
        self._buckets = [_Bucket() for _ in range(nbuckets)]
        self._check = check_invariants

    def _bucket(self, key: int) -> _Bucket:
        return self._buckets[hash_key(key) % self.nbuckets]

    def insert(self, key: int, value: int) -> MapReport:
        b = self._bucket(key)
        with b.lock:
            prev, node, _ = _locate(b, key)
            if node is not None and node.key == key:
                prior = node.value
                node.value = value
                return replaced(prior)
            entry = _Entry(key, value, node)
            if prev is None:
                b.head = entry
            else:
                prev.next = entry
            if self._check:
                self._assert_sorted(b)
            return INSERTED

    def get(self, key: int) -> MapReport:
        b = self._bucket(key)
        with b.lock:
            node = b.head
            while node is not None and node.key < key:
                node = node.next
            if node is not None and node.key == key:
                return found(node.value)
            return NOT_FOUND

    def remove(self, key: int) -> MapReport:
        b = self._bucket(key)
        with b.lock:
            prev, node, _ = _locate(b, key)
            if node is None or node.key != key:
                return NOT_FOUND
            if prev is None:
                b.head = node.next
            else:
                prev.next = node.next
            node.next = None
            if self._check:
                self._assert_sorted(b)
            return removed(node.value)

    def snapshot(self) -> dict[int, int]:
        out = {}
        for b in self._buckets:
            with b.lock:
                node = b.head
                while node is not None:
                    out[node.key] = node.value
                    node = node.next
        return out

    # test hooks

    def chain(self, index: int) -> list[tuple[int, int]]:
        """Snapshot of bucket ``index`` as ``(key, value)`` pairs, taken under its lock."""
        b = self._buckets[index]
        with b.lock:
            out = []
            node = b.head
            while node is not None:
                out.append((node.key, node.value))
                node = node.next
            return out

    def probe_count(self, key: int) -> int:
        """Number of chain entries a lookup of ``key`` compares against."""
        b = self._bucket(key)
        with b.lock:
            return _locate(b, key)[2]

    @staticmethod
    def _assert_sorted(b: _Bucket) -> None:
        node = b.head
        while node is not None and node.next is not None:
            assert node.key < node.next.key, "bucket chain out of order"
            node = node.next
