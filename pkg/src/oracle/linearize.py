# src/oracle/linearize.py
"""Exhaustive linearization search for micro-histories.

Each batch contributes one atomic update per dependency DAG: every mover
sharing a ``dag_root`` switches from its old to its new level at once. Reads
must return the level their vertex holds at their linearization point. The
search tries every order that respects real time, memoized on the set of
operations already placed.
"""

from collections.abc import Mapping
from collections.abc import Sequence
from typing import NamedTuple

import structlog

from src.core.exceptions import HistoryFormatError
from src.models.history import BatchRecord
from src.models.history import ReadRecord

logger = structlog.get_logger(__name__)

MAX_OPERATIONS = 12


class Operation(NamedTuple):
    label: str
    invoke_ts: int
    return_ts: int
    # (vertex, expected level) for reads, (vertex, old, new) per mover for updates
    reads: tuple[tuple[int, int], ...] = ()
    writes: tuple[tuple[int, int, int], ...] = ()


class Linearization(NamedTuple):
    ok: bool
    order: list[str]
    explored: int


def operations(
    batches: Sequence[BatchRecord], reads: Sequence[ReadRecord]
) -> list[Operation]:
    """Split batches into per-DAG updates and turn reads into operations."""
    ops: list[Operation] = []
    for batch in batches:
        dags: dict[int, list[tuple[int, int, int]]] = {}
        for m in batch.movers:
            dags.setdefault(m.dag_root, []).append((m.vertex, m.old_level, m.new_level))
        ops.extend(
            Operation(
                label=f"batch{batch.batch_id}/dag{root}",
                invoke_ts=batch.begin_ts,
                return_ts=batch.end_ts,
                writes=tuple(writes),
            )
            for root, writes in sorted(dags.items())
        )
    ops.extend(
        Operation(
            label=f"read{i}(v{r.vertex})={r.returned_level}",
            invoke_ts=r.invoke_ts,
            return_ts=r.return_ts,
            reads=((r.vertex, r.returned_level),),
        )
        for i, r in enumerate(reads)
    )
    return ops


def linearize(
    ops: Sequence[Operation], initial: Mapping[int, int] | None = None
) -> Linearization:
    """Find a legal sequential order of ``ops`` or prove there is none.

    Raises:
        HistoryFormatError: If there are more than ``MAX_OPERATIONS`` reads and
            per-DAG updates together.
    """
    if len(ops) > MAX_OPERATIONS:
        raise HistoryFormatError(
            HistoryFormatError.TOO_LONG.format(limit=MAX_OPERATIONS, count=len(ops))
        )
    levels = dict(initial or {})
    full = (1 << len(ops)) - 1
    dead: set[int] = set()
    order: list[int] = []
    explored = 0

    def search(done: int) -> bool:
        nonlocal explored
        if done == full:
            return True
        if done in dead:
            return False
        explored += 1
        pending = [i for i in range(len(ops)) if not done >> i & 1]
        horizon = min(ops[i].return_ts for i in pending)
        for i in pending:
            op = ops[i]
            if op.invoke_ts > horizon:
                continue
            if any(levels.get(v, 0) != want for v, want in op.reads):
                continue
            if any(levels.get(v, 0) != old for v, old, _ in op.writes):
                continue
            for v, _, new in op.writes:
                levels[v] = new
            order.append(i)
            if search(done | 1 << i):
                return True
            order.pop()
            for v, old, _ in op.writes:
                levels[v] = old
        dead.add(done)
        return False

    ok = search(0)
    logger.debug("Linearization search", ops=len(ops), ok=ok, explored=explored)
    return Linearization(ok, [ops[i].label for i in order] if ok else [], explored)


def linearizable(
    batches: Sequence[BatchRecord],
    reads: Sequence[ReadRecord],
    initial: Mapping[int, int] | None = None,
) -> Linearization:
    return linearize(operations(batches, reads), initial)
