"""Word-sized atomic cells.

CPython exposes no compare-and-swap instruction, so CAS and swap run inside
a tiny critical section on a per-cell lock.  Plain loads read the attribute
directly; attribute reads are atomic under the interpreter lock.  Every
operation here is sequentially consistent and there is no way to ask for a
weaker ordering.
"""
from __future__ import annotations

import itertools
import threading


class AtomicCell:
    __slots__ = ("value", "_lock")

    def __init__(self, value: int = 0) -> None:
        self.value = value
        self._lock = threading.Lock()

    def load(self) -> int:
        return self.value

    def store(self, value: int) -> None:
        with self._lock:
            self.value = value

    def swap(self, value: int) -> int:
        with self._lock:
            old = self.value
            self.value = value
            return old

    def compare_and_swap(self, expected: int, new: int) -> bool:
        with self._lock:
            if self.value != expected:
                return False
            self.value = new
            return True

    def fetch_add(self, delta: int = 1) -> int:
        with self._lock:
            old = self.value
            self.value = old + delta
            return old

    def __repr__(self) -> str:
        return f"AtomicCell({self.value!r})"


class EventCounter:
    """Exact event counter that never blocks.

    ``itertools.count.__next__`` runs in C while holding the interpreter
    lock, so concurrent increments are never lost.  Reading parses the
    count's repr, which is cheap enough for stats but not for hot paths.
    """

    __slots__ = ("_it", "incr")

    def __init__(self) -> None:
        self._it = itertools.count()
        self.incr = self._it.__next__

    @property
    def value(self) -> int:
        return int(repr(self._it)[6:-1])
