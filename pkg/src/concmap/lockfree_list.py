"""Harris-style sorted lock-free linked list.

Links are integer words: ``(slot << 1) | mark``.  Nodes live in a
:class:`NodePool` and are addressed by slot, so every real address is even
and the low bit is free to carry the logical-deletion mark.  A node whose
outgoing link is marked is deleted; its link is frozen from then on, since
every CAS on a link expects an unmarked word.

Deletion is two-phase: mark the victim's link (the linearization point),
then CAS the predecessor's link past it.  If that second CAS loses a race,
the next ``search`` passing through unlinks the node instead.  Whoever
physically unlinks a node retires it, exactly once, through the caller's
epoch guard.  Freed nodes go back to the pool and are reused, which is what
makes the epoch scheme necessary.

Every operation needs a live :class:`~concmap.ebr.EpochGuard`.
"""
from __future__ import annotations

import collections
import threading
from typing import Optional

from .api import INSERTED, NOT_FOUND, MapReport, UsageError, found, removed, replaced
from .atomics import EventCounter
from .ebr import EpochGuard, Participant

MARK = 1

DATA, HEAD, TAIL = 0, 1, 2


class DoubleRetireError(RuntimeError):
    pass


class ListNode:
    """Key, value cell and outgoing link word.

    ``next`` and ``value`` are updated only inside ``lock``, which stands in
    for a double-width CAS: the mark check and the value swap (or the mark
    and the value read) happen as one atomic step.
    """

    __slots__ = (
        "key", "value", "next", "addr", "kind", "lock",
        "generation", "retire_count", "poisoned",
    )

    def __init__(self, addr: int, kind: int = DATA) -> None:
        self.key = 0
        self.value = 0
        self.next = 0
        self.addr = addr
        self.kind = kind
        self.lock = threading.Lock()
        self.generation = 0
        self.retire_count = 0
        self.poisoned = False

    def cas_next(self, expected: int, new: int) -> bool:
        with self.lock:
            if self.next != expected:
                return False
            self.next = new
            return True

    def try_mark(self, expected: int) -> Optional[int]:
        """Set the mark on ``next`` if it still equals ``expected``; return the value.

        ``None`` means the CAS failed.
        """
        with self.lock:
            if self.next != expected:
                return None
            self.next = expected | MARK
            return self.value

    def replace_value(self, value: int) -> Optional[int]:
        """Swap the value if the node is not deleted; ``None`` if it is."""
        with self.lock:
            if self.next & MARK:
                return None
            prior = self.value
            self.value = value
            return prior

    @property
    def marked(self) -> bool:
        return bool(self.next & MARK)

    def __repr__(self) -> str:
        if self.kind == HEAD:
            return "ListNode(head)"
        if self.kind == TAIL:
            return "ListNode(tail)"
        return f"ListNode(key={self.key}, value={self.value}, marked={self.marked})"


class NodePool:
    """Slot-addressed node storage with reuse.

    Slot 0 is reserved so that word 0 never names a node.  With
    ``poison=True`` freed nodes are quarantined and flagged instead of being
    reused; traversals that land on a flagged node count a canary hit.
    """

    def __init__(self, poison: bool = False) -> None:
        self.poison = poison
        self._slots: list[Optional[ListNode]] = [None]
        self._free: collections.deque[ListNode] = collections.deque()
        self._grow = threading.Lock()
        self._allocated = EventCounter()
        self._freed = EventCounter()
        self._canary_hits = EventCounter()
        self.quarantine: list[ListNode] = []
        self.tail = self._new_node(TAIL)

    def _new_node(self, kind: int) -> ListNode:
        with self._grow:
            node = ListNode(len(self._slots) << 1, kind)
            self._slots.append(node)
        return node

    def head(self, next_word: int) -> ListNode:
        node = self._new_node(HEAD)
        node.next = next_word
        return node

    def alloc(self, key: int, value: int) -> ListNode:
        try:
            node = self._free.pop()
        except IndexError:
            node = self._new_node(DATA)
        node.key = key
        node.value = value
        node.next = 0
        node.retire_count = 0
        node.generation += 1
        self._allocated.incr()
        return node

    def free(self, node: ListNode) -> None:
        self._freed.incr()
        if self.poison:
            node.poisoned = True
            self.quarantine.append(node)
        else:
            self._free.append(node)

    def deref(self, word: int) -> ListNode:
        node = self._slots[word >> 1]
        if node is None:
            raise UsageError(f"link word {word:#x} names no node")
        return node

    def canary_hit(self, node: ListNode) -> None:
        self._canary_hits.incr()

    @property
    def allocated(self) -> int:
        return self._allocated.value

    @property
    def freed(self) -> int:
        return self._freed.value

    @property
    def canary_hits(self) -> int:
        return self._canary_hits.value

    @property
    def capacity(self) -> int:
        return len(self._slots) - 1


class LockFreeList:
    """Sorted set of ``key -> value`` with lock-free insert/remove and read-only get.

    ``restarts`` counts CAS failures that sent an operation back to search.
    It is a plain counter, so concurrent updates may occasionally be lost.
    """

    def __init__(self, pool: Optional[NodePool] = None) -> None:
        self.pool = pool if pool is not None else NodePool()
        self.tail = self.pool.tail
        self.head = self.pool.head(self.tail.addr)
        self.restarts = 0

    # Public operations check the guard.  The underscored versions take the
    # pinned participant itself; the map calls them directly to skip
    # building a guard per operation.

    def search(self, key: int, guard: EpochGuard) -> tuple[ListNode, ListNode]:
        return self._search(key, _require(guard))

    def insert(self, key: int, value: int, guard: EpochGuard) -> MapReport:
        return self._insert(key, value, _require(guard))

    def remove(self, key: int, guard: EpochGuard) -> MapReport:
        return self._remove(key, _require(guard))

    def get(self, key: int, guard: EpochGuard) -> MapReport:
        _require(guard)
        return self._get(key)

    def _search(self, key: int, pinned: Participant) -> tuple[ListNode, ListNode]:
        """Return ``(left, right)`` with ``left.key < key <= right.key``, adjacent
        and both unmarked at some instant during the call."""
        pool = self.pool
        slots = pool._slots
        head = self.head
        tail = self.tail
        while True:
            t = head
            t_next = head.next
            left = head
            left_next = t_next
            while True:
                if not t_next & MARK:
                    left = t
                    left_next = t_next
                t = slots[t_next >> 1]
                if t.poisoned:
                    pool.canary_hit(t)
                if t is tail:
                    break
                t_next = t.next
                if not t_next & MARK and t.key >= key:
                    break
            right = t

            if left_next == right.addr:
                if right is not tail and right.next & MARK:
                    self.restarts += 1
                    continue
                return left, right

            if left.cas_next(left_next, right.addr):
                self._retire_run(left_next, right, pinned)
                if right is not tail and right.next & MARK:
                    self.restarts += 1
                    continue
                return left, right
            self.restarts += 1

    def _retire_run(self, word: int, stop: ListNode, pinned: Participant) -> None:
        # The run between left and right is all marked, so its links are frozen.
        slots = self.pool._slots
        node = slots[word >> 1]
        while node is not stop:
            nxt = node.next
            self._retire(node, pinned)
            node = slots[nxt >> 1]

    def _retire(self, node: ListNode, pinned: Participant) -> None:
        node.retire_count += 1
        if node.retire_count != 1:
            raise DoubleRetireError(f"{node!r} retired {node.retire_count} times")
        pinned._retire(node, self.pool.free)

    def _insert(self, key: int, value: int, pinned: Participant) -> MapReport:
        tail = self.tail
        node = None
        while True:
            left, right = self._search(key, pinned)
            if right is not tail and right.key == key:
                prior = right.replace_value(value)
                if prior is None:
                    self.restarts += 1
                    continue
                if node is not None:
                    # never published, so nobody else can hold it
                    self.pool.free(node)
                return replaced(prior)
            if node is None:
                node = self.pool.alloc(key, value)
            node.next = right.addr
            if left.cas_next(right.addr, node.addr):
                return INSERTED
            self.restarts += 1

    def _remove(self, key: int, pinned: Participant) -> MapReport:
        tail = self.tail
        while True:
            left, right = self._search(key, pinned)
            if right is tail or right.key != key:
                return NOT_FOUND
            succ = right.next
            if succ & MARK:
                self.restarts += 1
                continue
            value = right.try_mark(succ)
            if value is not None:
                break
            self.restarts += 1
        if left.cas_next(right.addr, succ):
            self._retire(right, pinned)
        else:
            self._search(key, pinned)
        return removed(value)

    def _get(self, key: int) -> MapReport:
        pool = self.pool
        slots = pool._slots
        tail = self.tail
        word = self.head.next
        while True:
            node = slots[word >> 1]
            if node.poisoned:
                pool.canary_hit(node)
            if node is tail:
                return NOT_FOUND
            word = node.next
            if node.key >= key:
                break
        if node.key == key and not word & MARK:
            return found(node.value)
        return NOT_FOUND

    # test hooks; only meaningful while no other thread mutates the list

    def snapshot(self) -> list[tuple[int, bool]]:
        """``(key, marked)`` for every node reachable from head, marked or not."""
        out = []
        node = self.pool.deref(self.head.next)
        while node is not self.tail:
            out.append((node.key, node.marked))
            node = self.pool.deref(node.next)
        return out

    def nodes(self) -> list[ListNode]:
        out = []
        node = self.pool.deref(self.head.next)
        while node is not self.tail:
            out.append(node)
            node = self.pool.deref(node.next)
        return out

    def keys(self) -> list[int]:
        return [k for k, marked in self.snapshot() if not marked]

    def items(self) -> list[tuple[int, int]]:
        return [(n.key, n.value) for n in self.nodes() if not n.marked]

    def find_node(self, key: int) -> Optional[ListNode]:
        for node in self.nodes():
            if node.key == key:
                return node
        return None

    def mark(self, key: int) -> ListNode:
        """Logically delete ``key`` without unlinking it."""
        node = self.find_node(key)
        if node is None:
            raise KeyError(key)
        while True:
            word = node.next
            if word & MARK or node.try_mark(word) is not None:
                return node


def _require(guard: EpochGuard) -> Participant:
    if not isinstance(guard, EpochGuard) or not guard.live:
        raise UsageError("list operations require a live epoch guard")
    return guard.owner
