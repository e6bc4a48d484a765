import random
import threading

import pytest

from concmap import new_map
from concmap.api import INSERTED, NOT_FOUND, UsageError, found, removed

from conftest import fnv_oracle


def test_zero_buckets_rejected():
    with pytest.raises(UsageError):
        new_map(0)


def test_single_bucket_map_starts_empty():
    assert new_map(1).get(5) == NOT_FOUND


def test_many_keys_in_few_buckets():
    m = new_map(128)
    for k in range(10_000):
        assert m.insert(k, k + 1) == INSERTED
    for k in range(10_000):
        assert m.get(k) == found(k + 1)
    assert len(m.snapshot()) == 10_000


@pytest.mark.parametrize("nbuckets", [1, 2, 8, 128])
def test_keys_land_in_the_fnv_bucket(nbuckets):
    m = new_map(nbuckets)
    rng = random.Random(nbuckets)
    keys = {rng.getrandbits(64) for _ in range(2000)}
    for k in keys:
        m.insert(k, 1)
    assert m.placement() == {k: fnv_oracle(k) % nbuckets for k in keys}


def test_one_bucket_behaves_like_one_list():
    m = new_map(1)
    for k in (5, 1, 3):
        m.insert(k, k)
    assert m.core.buckets[0].keys() == [1, 3, 5]
    assert m.remove(3) == removed(3)
    assert m.core.buckets[0].keys() == [1, 5]


def test_eight_writers_union():
    m = new_map(64)

    def fill(t):
        for k in range(t * 2000, (t + 1) * 2000):
            m.insert(k, t)

    ts = [threading.Thread(target=fill, args=(t,)) for t in range(8)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert m.snapshot() == {k: k // 2000 for k in range(16_000)}


def test_clones_share_state_across_threads():
    m = new_map(16)
    other = m.clone()
    t = threading.Thread(target=lambda: other.insert(1, 2))
    t.start()
    t.join()
    assert m.get(1) == found(2)
    assert other.core is m.core


def _churn(m, threads, ops, keyspace):
    def work(seed):
        rng = random.Random(seed)
        for i in range(ops):
            k = rng.randrange(keyspace)
            r = rng.random()
            if r < 0.4:
                m.get(k)
            elif r < 0.7:
                m.insert(k, i)
            else:
                m.remove(k)

    ts = [threading.Thread(target=work, args=(s,)) for s in range(threads)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()


def test_poisoned_nodes_are_never_reached():
    m = new_map(8, cadence=4, poison=True)
    _churn(m, 6, 4000, 64)
    s = m.stats()
    assert s["canary_hits"] == 0
    assert s["retired"] > 0


def test_counters_reconcile_after_drain():
    m = new_map(8, cadence=16)
    _churn(m, 4, 5000, 128)
    m.drain()
    s = m.stats()
    assert s["pending"] == 0
    assert s["retired"] == s["reclaimed"]
    assert s["allocated"] == s["freed"] + s["live"]
    assert s["live"] == len(m.snapshot())


def test_memory_is_recycled():
    m = new_map(4, cadence=8)
    for i in range(20_000):
        m.insert(i % 32, i)
        m.remove(i % 32)
    assert m.core.pool.capacity < 500
