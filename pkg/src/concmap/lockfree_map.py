"""Lock-free hashmap: a fixed array of :class:`LockFreeList` buckets.

Each public operation pins the map's epoch registry, runs the list
operation on the key's bucket and unpins.  The bucket array is never
resized; expected chain length is ``len / nbuckets``.
"""
from __future__ import annotations

from typing import Optional

from .api import MapReport, check_nbuckets, hash_key
from .ebr import EpochRegistry
from .lockfree_list import LockFreeList, NodePool

DEFAULT_NBUCKETS = 1 << 16


class LockFreeMap:
    """Shared state behind one or more :class:`MapHandle` objects."""

    def __init__(
        self,
        nbuckets: int = DEFAULT_NBUCKETS,
        *,
        cadence: Optional[int] = None,
        poison: bool = False,
    ) -> None:
        self.nbuckets = check_nbuckets(nbuckets)
        self.pool = NodePool(poison=poison)
        self.registry = EpochRegistry(cadence)
        self.buckets: tuple[LockFreeList, ...] = tuple(
            LockFreeList(self.pool) for _ in range(nbuckets)
        )

    def bucket_of(self, key: int) -> int:
        return hash_key(key) % self.nbuckets


class MapHandle:
    """Thread-safe entry point to a :class:`LockFreeMap`.

    Handles may be shared or cloned freely across threads; each calling
    thread pins through its own participant record.
    """

    __slots__ = ("_map", "_buckets", "_registry", "_local", "nbuckets")

    def __init__(self, core: LockFreeMap) -> None:
        self._map = core
        self._buckets = core.buckets
        self._registry = core.registry
        self._local = core.registry._local
        self.nbuckets = core.nbuckets

    def clone(self) -> "MapHandle":
        return MapHandle(self._map)

    @property
    def core(self) -> LockFreeMap:
        return self._map

    def insert(self, key: int, value: int) -> MapReport:
        bucket = self._buckets[hash_key(key) % self.nbuckets]
        try:
            p = self._local.lease.participant
        except AttributeError:
            p = self._registry.participant()
        p._enter()
        try:
            return bucket._insert(key, value, p)
        finally:
            p.active = False

    def get(self, key: int) -> MapReport:
        bucket = self._buckets[hash_key(key) % self.nbuckets]
        try:
            p = self._local.lease.participant
        except AttributeError:
            p = self._registry.participant()
        p._enter()
        try:
            return bucket._get(key)
        finally:
            p.active = False

    def remove(self, key: int) -> MapReport:
        bucket = self._buckets[hash_key(key) % self.nbuckets]
        try:
            p = self._local.lease.participant
        except AttributeError:
            p = self._registry.participant()
        p._enter()
        try:
            return bucket._remove(key, p)
        finally:
            p.active = False

    def snapshot(self) -> dict[int, int]:
        """Contents as a dict.  Exact only when no writer is running."""
        out = {}
        with self._registry.pin():
            for bucket in self._buckets:
                out.update(bucket.items())
        return out

    def placement(self) -> dict[int, int]:
        """``key -> bucket index`` for every live key, read from the buckets themselves."""
        out = {}
        with self._registry.pin():
            for i, bucket in enumerate(self._buckets):
                for key in bucket.keys():
                    out[key] = i
        return out

    def drain(self) -> int:
        """Free all retired nodes.  Call only when no operation is in flight."""
        return self._registry.drain()

    def stats(self) -> dict[str, int]:
        pool = self._map.pool
        reg = self._registry
        live = sum(len(b.keys()) for b in self._buckets)
        return {
            "allocated": pool.allocated,
            "freed": pool.freed,
            "live": live,
            "retired": reg.retired_count,
            "reclaimed": reg.freed_count,
            "pending": reg.pending_count,
            "canary_hits": pool.canary_hits,
            "epoch": reg.epoch,
        }


def new_map(
    nbuckets: int = DEFAULT_NBUCKETS,
    *,
    cadence: Optional[int] = None,
    poison: bool = False,
) -> MapHandle:
    return MapHandle(LockFreeMap(nbuckets, cadence=cadence, poison=poison))
