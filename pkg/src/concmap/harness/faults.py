"""Deliberately broken map wrappers for checking that the checker catches bugs."""
from __future__ import annotations

import threading

from ..api import INSERTED, NOT_FOUND, MapReport, Outcome, found, removed, replaced


class _Shim:
    def __init__(self, inner, every: int = 7) -> None:
        self.inner = inner
        self.nbuckets = inner.nbuckets
        self.every = every
        self._n = 0
        self._lock = threading.Lock()

    def _due(self) -> bool:
        with self._lock:
            self._n += 1
            return self._n % self.every == 0

    def insert(self, key: int, value: int) -> MapReport:
        return self.inner.insert(key, value)

    def get(self, key: int) -> MapReport:
        return self.inner.get(key)

    def remove(self, key: int) -> MapReport:
        return self.inner.remove(key)

    def snapshot(self) -> dict[int, int]:
        return self.inner.snapshot()


class LostWriteMap(_Shim):
    """Every ``every``-th insert reports success but is never applied."""

    def insert(self, key: int, value: int) -> MapReport:
        if not self._due():
            return self.inner.insert(key, value)
        current = self.inner.get(key)
        if current.outcome is Outcome.FOUND:
            if current.value == value:
                return self.inner.insert(key, value)
            return replaced(current.value)
        return INSERTED


class StaleReadMap(_Shim):
    """Every ``every``-th get of a previously overwritten key returns the old value."""

    def __init__(self, inner, every: int = 7) -> None:
        super().__init__(inner, every)
        self._previous: dict[int, int] = {}

    def insert(self, key: int, value: int) -> MapReport:
        rep = self.inner.insert(key, value)
        if rep.outcome is Outcome.REPLACED and rep.value != value:
            self._previous[key] = rep.value
        return rep

    def get(self, key: int) -> MapReport:
        rep = self.inner.get(key)
        stale = self._previous.get(key)
        if stale is not None and rep.outcome is Outcome.FOUND and rep.value != stale and self._due():
            return found(stale)
        return rep


class DoubleRemoveMap(_Shim):
    """Every ``every``-th remove of an absent key claims to remove the last removed value."""

    def __init__(self, inner, every: int = 3) -> None:
        super().__init__(inner, every)
        self._last: dict[int, int] = {}

    def remove(self, key: int) -> MapReport:
        rep = self.inner.remove(key)
        if rep.outcome is Outcome.REMOVED:
            self._last[key] = rep.value
            return rep
        last = self._last.get(key)
        if last is not None and self._due():
            return removed(last)
        return NOT_FOUND


FAULTS = {
    "lost-write": LostWriteMap,
    "stale-read": StaleReadMap,
    "double-remove": DoubleRemoveMap,
}
