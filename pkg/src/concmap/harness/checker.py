"""Per-key linearizability checking.

Map keys are independent, so a map history is linearizable iff each key's
sub-history is linearizable against a single register that is either empty
or holds a value: ``insert`` writes, ``remove`` writes empty, ``get`` reads,
and each operation's report must match the register state it is ordered
after.

The search is the Wing-Gong algorithm with Lowe's memoization: walk the
call/return events in time order, tentatively linearize any pending call
whose report fits the current state, and backtrack when a return is reached
before its call was linearized.  States already seen as
``(linearized-set, register)`` are pruned.
"""
from __future__ import annotations

from typing import Iterable, NamedTuple, Optional, Sequence

from ..api import Outcome, UsageError
from .history import OpRecord, group_by_key

_EMPTY = None


class Verdict(NamedTuple):
    linearizable: bool
    counterexample: tuple[OpRecord, ...] = ()


def apply(state: Optional[int], rec: OpRecord) -> tuple[bool, Optional[int]]:
    """Step the register model: ``(report consistent?, next state)``."""
    out, v = rec.report
    if rec.kind == "insert":
        if state is _EMPTY:
            return out is Outcome.INSERTED, rec.arg
        return out is Outcome.REPLACED and v == state, rec.arg
    if rec.kind == "remove":
        if state is _EMPTY:
            return out is Outcome.NOT_FOUND, _EMPTY
        return out is Outcome.REMOVED and v == state, _EMPTY
    if state is _EMPTY:
        return out is Outcome.NOT_FOUND, state
    return out is Outcome.FOUND and v == state, state


def _search(ops: Sequence[OpRecord], initial: Optional[int] = _EMPTY) -> bool:
    n = len(ops)
    if n == 0:
        return True
    # calls sort before returns at equal timestamps: touching intervals overlap
    events = sorted(
        [(op.invoke_ns, 0, i) for i, op in enumerate(ops)]
        + [(op.respond_ns, 1, i) for i, op in enumerate(ops)]
    )
    m = len(events)
    head = m
    is_call = [e[1] == 0 for e in events]
    op_of = [e[2] for e in events]
    ret_pos = [0] * n
    for pos, (_, kind, i) in enumerate(events):
        if kind == 1:
            ret_pos[i] = pos
    nxt = list(range(1, m + 1)) + [0]
    nxt[m - 1] = -1
    prv = list(range(-1, m))
    prv[0] = head

    def lift(pos: int) -> None:
        for p in (pos, ret_pos[op_of[pos]]):
            nxt[prv[p]] = nxt[p]
            if nxt[p] != -1:
                prv[nxt[p]] = prv[p]

    def unlift(pos: int) -> None:
        for p in (ret_pos[op_of[pos]], pos):
            nxt[prv[p]] = p
            if nxt[p] != -1:
                prv[nxt[p]] = p

    state = initial
    done = 0
    seen: set[tuple[int, Optional[int]]] = set()
    stack: list[tuple[int, Optional[int]]] = []
    entry = nxt[head]
    while nxt[head] != -1:
        if is_call[entry]:
            i = op_of[entry]
            ok, new_state = apply(state, ops[i])
            if ok:
                key = (done | (1 << i), new_state)
                if key not in seen:
                    seen.add(key)
                    stack.append((entry, state))
                    state = new_state
                    done |= 1 << i
                    lift(entry)
                    entry = nxt[head]
                    continue
            entry = nxt[entry]
        else:
            if not stack:
                return False
            entry, state = stack.pop()
            done &= ~(1 << op_of[entry])
            unlift(entry)
            entry = nxt[entry]
    return True


def _shrink(ops: list[OpRecord]) -> list[OpRecord]:
    # delta-debugging style: drop chunks while the rest stays non-linearizable
    chunk = max(1, len(ops) // 2)
    while True:
        before = len(ops)
        i = 0
        while i < len(ops):
            trial = ops[:i] + ops[i + chunk:]
            if trial and not _search(trial):
                ops = trial
            else:
                i += chunk
        if chunk == 1 and len(ops) == before:
            return ops
        chunk = max(1, chunk // 2)


def check_key_history(records: Iterable[OpRecord]) -> Verdict:
    """Decide linearizability of one key's history (register starts empty).

    A negative verdict carries a 1-minimal non-linearizable sub-history:
    removing any single record from it makes it linearizable.
    """
    ops = list(records)
    if len({r.key for r in ops}) > 1:
        raise UsageError("check_key_history needs records for a single key")
    if _search(ops):
        return Verdict(True)
    ops.sort(key=lambda r: (r.invoke_ns, r.respond_ns))
    return Verdict(False, tuple(_shrink(ops)))


def check_history(records: Iterable[OpRecord]) -> dict[int, Verdict]:
    return {k: check_key_history(v) for k, v in group_by_key(records).items()}
