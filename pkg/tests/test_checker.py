import pytest
from hypothesis import given, settings, strategies as st

from concmap.api import UsageError
from concmap.harness import BenchConfig, check_history, check_key_history, run_stress
from concmap.harness.checker import _search
from concmap.harness.faults import FAULTS

from conftest import naive_linearizable, rec


def test_sequential_write_then_read():
    h = [rec("insert", 5, "Inserted", 1, 2), rec("get", None, "Found(5)", 3, 4)]
    assert check_key_history(h).linearizable


def test_read_overlapping_write_may_miss_it():
    h = [rec("insert", 5, "Inserted", 1, 4), rec("get", None, "NotFound", 2, 3, thread=1)]
    assert check_key_history(h).linearizable


def test_read_overlapping_write_may_see_it():
    h = [rec("insert", 5, "Inserted", 1, 4), rec("get", None, "Found(5)", 2, 3, thread=1)]
    assert check_key_history(h).linearizable


def test_lost_write_is_rejected_with_counterexample():
    h = [rec("insert", 5, "Inserted", 1, 2), rec("get", None, "NotFound", 3, 4)]
    v = check_key_history(h)
    assert not v.linearizable
    assert list(v.counterexample) == h


def test_read_of_never_written_value_is_rejected():
    h = [rec("get", None, "Found(9)", 1, 2)]
    assert not check_key_history(h).linearizable


def test_touching_intervals_count_as_overlapping():
    h = [rec("insert", 5, "Inserted", 1, 3), rec("get", None, "NotFound", 3, 4, thread=1)]
    assert check_key_history(h).linearizable


def test_two_removers_cannot_both_win():
    h = [
        rec("insert", 1, "Inserted", 0, 1),
        rec("remove", None, "Removed(1)", 2, 5, thread=1),
        rec("remove", None, "Removed(1)", 2, 5, thread=2),
    ]
    assert not check_key_history(h).linearizable
    h[2] = rec("remove", None, "NotFound", 2, 5, thread=2)
    assert check_key_history(h).linearizable


def test_empty_history_is_linearizable():
    assert check_key_history([]).linearizable


def test_mixed_keys_rejected():
    with pytest.raises(UsageError):
        check_key_history([rec("get", None, "NotFound", 1, 2, key=1), rec("get", None, "NotFound", 1, 2, key=2)])


def test_check_history_groups_by_key():
    h = [
        rec("insert", 5, "Inserted", 1, 2, key=1),
        rec("get", None, "NotFound", 3, 4, key=2),
        rec("get", None, "NotFound", 5, 6, key=1),
    ]
    verdicts = check_history(h)
    assert verdicts[2].linearizable and not verdicts[1].linearizable


REPORTS = {
    "insert": ["Inserted", "Replaced(1)", "Replaced(2)"],
    "get": ["NotFound", "Found(1)", "Found(2)"],
    "remove": ["NotFound", "Removed(1)", "Removed(2)"],
}


@st.composite
def small_history(draw, max_ops=8):
    n = draw(st.integers(0, max_ops))
    ops = []
    for t in range(n):
        kind = draw(st.sampled_from(sorted(REPORTS)))
        inv = draw(st.integers(0, 12))
        resp = inv + draw(st.integers(0, 6))
        arg = draw(st.sampled_from([1, 2])) if kind == "insert" else None
        ops.append(rec(kind, arg, draw(st.sampled_from(REPORTS[kind])), inv, resp, thread=t))
    return ops


@settings(max_examples=400, deadline=None)
@given(h=small_history(max_ops=6))
def test_agrees_with_brute_force(h):
    assert check_key_history(h).linearizable == naive_linearizable(h)


@settings(max_examples=60, deadline=None)
@given(h=small_history(max_ops=8))
def test_agrees_with_brute_force_at_eight_ops(h):
    assert check_key_history(h).linearizable == naive_linearizable(h)


@settings(max_examples=200, deadline=None)
@given(h=small_history(max_ops=8))
def test_counterexamples_are_minimal_and_replayable(h):
    v = check_key_history(h)
    if v.linearizable:
        assert v.counterexample == ()
        return
    cx = list(v.counterexample)
    assert cx and all(r in h for r in cx)
    assert not check_key_history(cx).linearizable
    assert not naive_linearizable(cx)
    for i in range(len(cx)):
        assert _search(cx[:i] + cx[i + 1:])


def test_single_thread_stress_is_linearizable():
    c = BenchConfig(impl="lockfree", readers=0, writers=1, keyspace=16, prefill=8, nbuckets=4, read_fraction=0.5)
    verdicts = check_history(run_stress(c, 3000, record=True).records)
    assert all(v.linearizable for v in verdicts.values())


@pytest.mark.parametrize("impl", ["coarse", "striped", "lockfree"])
def test_concurrent_stress_is_linearizable(impl):
    c = BenchConfig(impl=impl, readers=2, writers=6, keyspace=64, prefill=32, nbuckets=16, seed=3)
    verdicts = check_history(run_stress(c, 20_000, record=True).records)
    assert all(v.linearizable for v in verdicts.values())


@pytest.mark.parametrize("fault", sorted(FAULTS))
def test_fault_shims_are_caught(fault):
    c = BenchConfig(impl="lockfree", readers=0, writers=4, keyspace=8, prefill=4, nbuckets=4, seed=1, read_fraction=0.4)
    verdicts = check_history(run_stress(c, 4000, record=True, wrap=FAULTS[fault]).records)
    bad = [v for v in verdicts.values() if not v.linearizable]
    assert bad
    for v in bad:
        assert not _search(list(v.counterexample))
