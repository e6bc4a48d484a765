"""Concurrent hashmaps of increasing sophistication.

* :class:`CoarseMap` - chained buckets under one reader-writer lock
* :class:`StripedMap` - one lock per bucket
* :func:`new_map` - lock-free buckets (Harris lists) with epoch-based reclamation
"""
from .api import (
    MapReport,
    Outcome,
    UsageError,
    bucket_index,
    fnv1a_64,
    hash_key,
)
from .coarse import CoarseMap, RWLock
from .ebr import EpochGuard, EpochRegistry, Participant, RetireBag
from .lockfree_list import ListNode, LockFreeList, NodePool
from .lockfree_map import LockFreeMap, MapHandle, new_map
from .striped import StripedMap

__all__ = [
    "CoarseMap", "EpochGuard", "EpochRegistry", "ListNode", "LockFreeList",
    "LockFreeMap", "MapHandle", "MapReport", "NodePool", "Outcome",
    "Participant", "RWLock", "RetireBag", "StripedMap", "UsageError",
    "bucket_index", "fnv1a_64", "hash_key", "new_map",
]
