"""Baseline tier: a sequential chained hashmap behind one reader-writer lock."""
from __future__ import annotations

import threading
from contextlib import contextmanager
from typing import Iterator

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


class RWLock:
    """Many readers or one writer.

    Writer-preferring: once a writer is waiting, new readers queue behind it,
    so a steady read load cannot starve writes.
    """

    policy = "writer-preferring"

    def __init__(self) -> None:
        self._cond = threading.Condition(threading.Lock())
        self._readers = 0
        self._writer = False
        self._waiting_writers = 0

    def acquire_read(self) -> None:
        with self._cond:
            while self._writer or self._waiting_writers:
                self._cond.wait()
            self._readers += 1

    def release_read(self) -> None:
        with self._cond:
            self._readers -= 1
            if self._readers == 0:
                self._cond.notify_all()

    def acquire_write(self) -> None:
        with self._cond:
            self._waiting_writers += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._waiting_writers -= 1
            self._writer = True

    def release_write(self) -> None:
        with self._cond:
            self._writer = False
            self._cond.notify_all()

    @contextmanager
    def read(self) -> Iterator[None]:
        self.acquire_read()
        try:
            yield
        finally:
            self.release_read()

    @contextmanager
    def write(self) -> Iterator[None]:
        self.acquire_write()
        try:
            yield
        finally:
            self.release_write()

    @property
    def readers(self) -> int:
        return self._readers

    @property
    def writer_active(self) -> bool:
        return self._writer


class CoarseMap:
    """Chained buckets (lists of ``[key, value]`` pairs) under a map-wide RWLock."""

    def __init__(self, nbuckets: int = 1 << 16) -> None:
        self.nbuckets = check_nbuckets(nbuckets)
        self._buckets: list[list[list[int]]] = [[] for _ in range(nbuckets)]
        self._lock = RWLock()
        self._size = 0

    @property
    def lock_policy(self) -> str:
        return self._lock.policy

    def _chain(self, key: int) -> list[list[int]]:
        return self._buckets[hash_key(key) % self.nbuckets]

    def insert(self, key: int, value: int) -> MapReport:
        chain = self._chain(key)
        lock = self._lock
        lock.acquire_write()
        try:
            for entry in chain:
                if entry[0] == key:
                    prior = entry[1]
                    entry[1] = value
                    return replaced(prior)
            chain.append([key, value])
            self._size += 1
            return INSERTED
        finally:
            lock.release_write()

    def get(self, key: int) -> MapReport:
        chain = self._chain(key)
        lock = self._lock
        lock.acquire_read()
        try:
            for entry in chain:
                if entry[0] == key:
                    return found(entry[1])
            return NOT_FOUND
        finally:
            lock.release_read()

    def remove(self, key: int) -> MapReport:
        chain = self._chain(key)
        lock = self._lock
        lock.acquire_write()
        try:
            for i, entry in enumerate(chain):
                if entry[0] == key:
                    del chain[i]
                    self._size -= 1
                    return removed(entry[1])
            return NOT_FOUND
        finally:
            lock.release_write()

    def snapshot(self) -> dict[int, int]:
        with self._lock.read():
            return {k: v for chain in self._buckets for k, v in chain}

    def __len__(self) -> int:
        with self._lock.read():
            return self._size
