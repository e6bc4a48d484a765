import itertools

import pytest

from concmap import CoarseMap, StripedMap, new_map
from concmap.api import MapReport, Outcome
from concmap.harness.history import OpRecord

TIERS = {
    "coarse": CoarseMap,
    "striped": StripedMap,
    "lockfree": new_map,
}


@pytest.fixture(params=sorted(TIERS))
def tier(request):
    """Factory ``nbuckets -> map`` for each implementation."""
    return TIERS[request.param]


def fnv_oracle(key):
    """Straight-line FNV-1a/64 over 8 little-endian bytes, kept apart from the package."""
    h = 0xCBF29CE484222325
    for b in key.to_bytes(8, "little"):
        h ^= b
        h = (h * 0x100000001B3) % (1 << 64)
    return h


def rec(kind, arg, report, inv, resp, key=0, thread=0):
    if isinstance(report, str):
        report = MapReport.parse(report)
    return OpRecord(thread, key, kind, arg, inv, resp, report)


def naive_linearizable(ops):
    """Try every permutation; accept if one respects real time and register semantics."""
    ops = list(ops)
    for perm in itertools.permutations(range(len(ops))):
        pos = {i: n for n, i in enumerate(perm)}
        if any(
            ops[a].respond_ns < ops[b].invoke_ns and pos[a] > pos[b]
            for a in range(len(ops)) for b in range(len(ops))
        ):
            continue
        state = None
        ok = True
        for i in perm:
            op = ops[i]
            out, v = op.report
            if op.kind == "get":
                want = (Outcome.NOT_FOUND, None) if state is None else (Outcome.FOUND, state)
            elif op.kind == "insert":
                want = (Outcome.INSERTED, None) if state is None else (Outcome.REPLACED, state)
                state_after = op.arg
            else:
                want = (Outcome.NOT_FOUND, None) if state is None else (Outcome.REMOVED, state)
                state_after = None
            if (out, v) != want:
                ok = False
                break
            if op.kind != "get":
                state = state_after
        if ok:
            return True
    return False


def race_pair(setup, op, trials):
    """Run ``op(i, trial)`` on two long-lived threads released together each trial.

    ``setup(trial)`` runs alone before each trial.  Returns ``[(a, b), ...]``.
    """
    import threading

    start = threading.Barrier(3)
    done = threading.Barrier(3)
    got = [None, None]
    trial_box = [0]

    def worker(i):
        for _ in range(trials):
            start.wait()
            got[i] = op(i, trial_box[0])
            done.wait()

    ts = [threading.Thread(target=worker, args=(i,)) for i in range(2)]
    for t in ts:
        t.start()
    out = []
    for trial in range(trials):
        trial_box[0] = trial
        setup(trial)
        start.wait()
        done.wait()
        out.append((got[0], got[1]))
    for t in ts:
        t.join()
    return out
