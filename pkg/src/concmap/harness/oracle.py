"""Single-threaded reference map used as ground truth."""
from __future__ import annotations

from ..api import INSERTED, NOT_FOUND, MapReport, found, removed, replaced


class OracleMap:
    """A plain dict with the same report semantics as the concurrent tiers."""

    nbuckets = 1

    def __init__(self) -> None:
        self._data: dict[int, int] = {}

    def insert(self, key: int, value: int) -> MapReport:
        prior = self._data.get(key)
        self._data[key] = value
        return INSERTED if prior is None else replaced(prior)

    def get(self, key: int) -> MapReport:
        v = self._data.get(key)
        return NOT_FOUND if v is None else found(v)

    def remove(self, key: int) -> MapReport:
        v = self._data.pop(key, None)
        return NOT_FOUND if v is None else removed(v)

    def snapshot(self) -> dict[int, int]:
        return dict(self._data)

    def __len__(self) -> int:
        return len(self._data)


def oracle_map() -> OracleMap:
    return OracleMap()
