"""Epoch-based memory reclamation.

Threads *pin* the global epoch before touching shared nodes and unpin when
done.  Unlinked nodes are *retired* into a bag tagged with the global epoch
observed at retirement; a bag tagged ``e`` is destroyed only once the global
epoch reaches ``e + 2``.  The epoch advances only when every pinned
participant has announced the current epoch, so by the time it has moved
twice past ``e`` every thread that could have reached a node retired at
``e`` has unpinned.

Each participant keeps three bags indexed by ``epoch % 3``.  Participants
belonging to threads that have exited are marked inactive and their
leftover bags handed to the registry, where any later ``collect`` can free
them.

Usage::

    reg = EpochRegistry()
    with reg.pin() as guard:
        ...                      # read shared nodes
        guard.retire(node, free)  # after unlinking node
"""
from __future__ import annotations

import os
import threading
from typing import Any, Callable, Optional

from .api import UsageError
from .atomics import AtomicCell

Destructor = Callable[[Any], None]

DEFAULT_CADENCE = 64
CADENCE_ENV = "CONCMAP_EBR_CADENCE"


class RetireBag:
    __slots__ = ("epoch_tag", "nodes")

    def __init__(self) -> None:
        self.epoch_tag = 0
        self.nodes: list[tuple[Any, Destructor]] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def drain(self) -> int:
        nodes, self.nodes = self.nodes, []
        for node, destroy in nodes:
            destroy(node)
        return len(nodes)


class Participant:
    """One thread's view of the registry: its pin state and retire bags.

    Everything except ``active`` and ``announced_epoch`` is touched only by
    the owning thread (or by the registry once the owner has exited).
    """

    __slots__ = (
        "registry", "active", "announced_epoch", "bags", "retired", "freed",
        "exited", "_pin_seq", "_countdown", "_epoch", "__weakref__",
    )

    def __init__(self, registry: "EpochRegistry") -> None:
        self.registry = registry
        self.active = False
        self.announced_epoch = 0
        self.bags = (RetireBag(), RetireBag(), RetireBag())
        self._epoch = registry._epoch
        self._countdown = registry.cadence
        self.retired = 0
        self.freed = 0
        self.exited = False
        self._pin_seq = 0

    def pin(self) -> "EpochGuard":
        self._enter()
        return EpochGuard(self, self.announced_epoch, self._pin_seq)

    def _enter(self) -> None:
        # Pin without materializing a guard; the map's hot paths use this
        # and clear ``active`` themselves.
        if self.active or self.exited:
            raise UsageError("participant is already pinned" if self.active else "participant has been closed")
        # active must be published before the global epoch is read
        self.active = True
        self.announced_epoch = self._epoch.value
        self._pin_seq += 1
        self._countdown -= 1
        if not self._countdown:
            self._countdown = self.registry.cadence
            self.registry.try_advance()
            self._collect()

    @property
    def pins(self) -> int:
        return self._pin_seq

    def try_advance(self) -> bool:
        return self.registry.try_advance()

    def _collect(self) -> int:
        reg = self.registry
        limit = reg._epoch.value - 2
        freed = 0
        for bag in self.bags:
            if bag.nodes and bag.epoch_tag <= limit:
                freed += bag.drain()
        self.freed += freed
        if reg._orphans:
            freed += reg._collect_orphans(limit)
        return freed

    def _retire(self, node: Any, destroy: Destructor) -> None:
        epoch = self.registry._epoch.value
        bag = self.bags[epoch % 3]
        if bag.epoch_tag != epoch:
            # whatever is left here is tagged <= epoch - 3, already expired
            if bag.nodes:
                self.freed += bag.drain()
            bag.epoch_tag = epoch
        bag.nodes.append((node, destroy))
        self.retired += 1

    @property
    def pending(self) -> int:
        return sum(len(b) for b in self.bags)

    def close(self) -> None:
        """Mark permanently inactive and hand leftover garbage to the registry."""
        if self.exited:
            return
        self.active = False
        self.exited = True
        self.registry._adopt(self)


class EpochGuard:
    """Proof that the owner is pinned.  Unpins on ``unpin()``, on ``with`` exit,
    or when the last reference is dropped."""

    __slots__ = ("owner", "epoch_at_pin", "_seq")

    def __init__(self, owner: Participant, epoch: int, seq: int) -> None:
        self.owner = owner
        self.epoch_at_pin = epoch
        self._seq = seq

    @property
    def live(self) -> bool:
        o = self.owner
        return o.active and o._pin_seq == self._seq

    def unpin(self) -> None:
        o = self.owner
        if not (o.active and o._pin_seq == self._seq):
            raise UsageError("guard is not live (double unpin?)")
        o.active = False

    def retire(self, node: Any, destroy: Destructor) -> None:
        """Defer ``destroy(node)`` until no pinned thread can still reach ``node``.

        ``node`` must already be unreachable for new traversals.
        """
        o = self.owner
        if not (o.active and o._pin_seq == self._seq):
            raise UsageError("retire requires a live guard")
        o._retire(node, destroy)

    def collect(self) -> int:
        o = self.owner
        if not (o.active and o._pin_seq == self._seq):
            raise UsageError("collect requires a live guard")
        return o._collect()

    def __enter__(self) -> "EpochGuard":
        return self

    def __exit__(self, *exc: object) -> None:
        self.unpin()

    def __del__(self) -> None:
        o = self.owner
        if o.active and o._pin_seq == self._seq:
            o.active = False


class _Lease:
    # Lives in the owning thread's thread-local storage; dropped at thread exit.
    __slots__ = ("participant",)

    def __init__(self, participant: Participant) -> None:
        self.participant = participant

    def __del__(self) -> None:
        self.participant.close()


class EpochRegistry:
    """Global epoch plus the set of participants.

    ``cadence`` is how many pins a participant performs between attempts to
    advance the epoch and free expired garbage.  It defaults to the
    ``CONCMAP_EBR_CADENCE`` environment variable, else 64.
    """

    def __init__(self, cadence: Optional[int] = None) -> None:
        if cadence is None:
            cadence = int(os.environ.get(CADENCE_ENV, DEFAULT_CADENCE))
        if cadence < 1:
            raise UsageError("cadence must be >= 1")
        self.cadence = cadence
        self._epoch = AtomicCell(0)
        self._participants: list[Participant] = []
        self._lock = threading.Lock()
        self._local = threading.local()
        self._orphans: list[RetireBag] = []
        self._orphan_freed = 0

    @property
    def epoch(self) -> int:
        return self._epoch.value

    @property
    def participants(self) -> tuple[Participant, ...]:
        return tuple(self._participants)

    def register(self) -> Participant:
        """A new, inactive participant not tied to any thread."""
        p = Participant(self)
        with self._lock:
            self._participants.append(p)
        return p

    def participant(self) -> Participant:
        """The calling thread's participant, registered on first use."""
        try:
            return self._local.lease.participant
        except AttributeError:
            p = self.register()
            self._local.lease = _Lease(p)
            return p

    def pin(self) -> EpochGuard:
        try:
            p = self._local.lease.participant
        except AttributeError:
            p = self.participant()
        return p.pin()

    def try_advance(self) -> bool:
        """Bump the epoch if every pinned participant has announced the current one."""
        epoch = self._epoch.value
        for p in self._snapshot():
            if p.active and p.announced_epoch != epoch:
                return False
        return self._epoch.compare_and_swap(epoch, epoch + 1)

    def _snapshot(self) -> list[Participant]:
        return list(self._participants)

    def _adopt(self, p: Participant) -> None:
        with self._lock:
            for bag in p.bags:
                if bag.nodes:
                    orphan = RetireBag()
                    orphan.epoch_tag = bag.epoch_tag
                    orphan.nodes, bag.nodes = bag.nodes, []
                    self._orphans.append(orphan)

    def _collect_orphans(self, limit: int) -> int:
        if not self._lock.acquire(blocking=False):
            return 0
        try:
            freed = 0
            keep = []
            for bag in self._orphans:
                if bag.epoch_tag <= limit:
                    freed += bag.drain()
                else:
                    keep.append(bag)
            self._orphans = keep
            self._orphan_freed += freed
            return freed
        finally:
            self._lock.release()

    def drain(self) -> int:
        """Free all retired garbage.  Only legal while no participant is pinned."""
        if any(p.active for p in self._participants):
            raise UsageError("drain requires every participant to be unpinned")
        self.try_advance()
        self.try_advance()
        limit = self._epoch.value - 2
        freed = 0
        for p in list(self._participants):
            n = 0
            for bag in p.bags:
                if bag.nodes and bag.epoch_tag <= limit:
                    n += bag.drain()
            p.freed += n
            freed += n
        freed += self._collect_orphans(limit)
        return freed

    @property
    def retired_count(self) -> int:
        return sum(p.retired for p in self._participants)

    @property
    def freed_count(self) -> int:
        return sum(p.freed for p in self._participants) + self._orphan_freed

    @property
    def pending_count(self) -> int:
        return self.retired_count - self.freed_count
