# src/lds/engine.py
"""Parallel batch-update passes over the level structure."""

import heapq
from collections.abc import Iterable
from collections.abc import Sequence
from typing import Protocol

import structlog
from pydantic import BaseModel
from pydantic import Field

from src.core.exceptions import ContractError
from src.graph.store import Graph
from src.lds.parallel import ParallelFor
from src.lds.state import LevelState
from src.models.batch import BatchKind
from src.models.batch import EdgeBatch

logger = structlog.get_logger(__name__)


class BatchHooks(Protocol):
    """Callbacks the passes use to publish level changes to readers."""

    def is_marked(self, v: int) -> bool: ...

    def mark(self, v: int, triggers: Sequence[int]) -> None: ...

    def merge(self, v: int, w: int) -> None: ...

    def settle(self, movers: Sequence[int]) -> None: ...

    def checkpoint(self, name: str) -> None: ...


class TriggerFinder(Protocol):
    def __call__(self, v: int) -> Iterable[int]: ...


class NullHooks:
    """Hooks for modes whose reads ignore descriptors."""

    def is_marked(self, v: int) -> bool:
        return False

    def mark(self, v: int, triggers: Sequence[int]) -> None:
        pass

    def merge(self, v: int, w: int) -> None:
        pass

    def settle(self, movers: Sequence[int]) -> None:
        pass

    def checkpoint(self, name: str) -> None:
        pass


class MoveReport(BaseModel):
    """Outcome of one insertion or deletion pass."""

    kind: BatchKind
    old_levels: dict[int, int] = Field(
        default_factory=dict, description="Level before the batch, per moved vertex"
    )
    moves: int = Field(default=0, description="Single-step level changes")
    steps: int = Field(default=0, description="Barrier-separated move steps")

    @property
    def moved(self) -> list[int]:
        return sorted(self.old_levels)


class _LevelQueue:
    """Pending vertices keyed by the level at which they are to be handled."""

    def __init__(self) -> None:
        self._heap: list[int] = []
        self._pending: dict[int, set[int]] = {}

    def push(self, level: int, v: int) -> None:
        bucket = self._pending.get(level)
        if bucket is None:
            self._pending[level] = bucket = set()
            heapq.heappush(self._heap, level)
        bucket.add(v)

    def pop(self) -> tuple[int, list[int]] | None:
        while self._heap:
            level = heapq.heappop(self._heap)
            bucket = self._pending.pop(level, None)
            if bucket:
                return level, sorted(bucket)
        return None


def _require(
    g: Graph, state: LevelState, batch: EdgeBatch, kind: BatchKind
) -> None:
    if state.graph is not g:
        raise ContractError(ContractError.GRAPH_MISMATCH)
    if batch.kind is not kind:
        raise ContractError(
            ContractError.WRONG_BATCH_KIND.format(
                expected=kind.value, actual=batch.kind.value
            )
        )


def _publish(
    state: LevelState,
    movers: list[int],
    report: MoveReport,
    hooks: BatchHooks,
    pool: ParallelFor,
    triggers_of: TriggerFinder,
) -> None:
    """Mark first-time movers and merge repeat movers with new triggers."""
    first = [v for v in movers if v not in report.old_levels]
    for v in first:
        report.old_levels[v] = state.get_level(v)
    first_set = set(first)

    def publish(v: int) -> None:
        triggers = [w for w in triggers_of(v) if hooks.is_marked(w)]
        if v in first_set:
            hooks.mark(v, triggers)
        else:
            for w in triggers:
                hooks.merge(v, w)

    pool.run(movers, publish)
    hooks.settle(movers)
    hooks.checkpoint("step.marked")


def _step(
    state: LevelState,
    movers: list[int],
    target: int,
    report: MoveReport,
    hooks: BatchHooks,
    pool: ParallelFor,
    triggers_of: TriggerFinder,
) -> dict[int, list[int]]:
    """Move ``movers`` to ``target`` and re-bucket every affected vertex."""
    _publish(state, movers, report, hooks, pool, triggers_of)

    before = {v: state.get_level(v) for v in movers}
    pool.run(movers, lambda v: state.set_level(v, target))
    hooks.checkpoint("step.moved")

    touched = state.touched_by(before)
    pool.run(list(touched), lambda x: state.refresh_vertex(x, touched[x], before))
    report.moves += len(movers)
    report.steps += 1
    return touched


def batch_insert(
    g: Graph,
    state: LevelState,
    batch: EdgeBatch,
    hooks: BatchHooks,
    pool: ParallelFor | None = None,
) -> MoveReport:
    """Restore invariant 1 after an insertion batch already applied to ``g``.

    Levels are visited in increasing order. At each level every vertex that
    violates invariant 1 moves up one level; the decisions at a level do not
    depend on each other, so the per-level outcome is schedule independent.
    """
    _require(g, state, batch, BatchKind.INSERT)
    pool = pool or ParallelFor()
    state.index_batch(batch)
    report = MoveReport(kind=BatchKind.INSERT)
    top = state.params.num_levels - 1
    queue = _LevelQueue()
    for v in sorted(batch.endpoints()):
        if not state.invariant1_holds(v):
            queue.push(state.get_level(v), v)

    while (item := queue.pop()) is not None:
        level, candidates = item
        if level >= top:
            logger.warning("Top level violates invariant 1", count=len(candidates))
            continue
        movers = pool.filter(
            candidates,
            lambda v, lvl=level: state.get_level(v) == lvl
            and not state.invariant1_holds(v),
        )
        if not movers:
            continue
        touched = _step(
            state, movers, level + 1, report, hooks, pool, state.up_neighbors
        )
        recheck = sorted(touched)
        for v in pool.filter(recheck, lambda x: not state.invariant1_holds(x)):
            queue.push(state.get_level(v), v)

    logger.debug(
        "Insertion pass done",
        edges=len(batch),
        moved=len(report.old_levels),
        moves=report.moves,
        steps=report.steps,
    )
    return report


def batch_delete(
    g: Graph,
    state: LevelState,
    batch: EdgeBatch,
    hooks: BatchHooks,
    pool: ParallelFor | None = None,
) -> MoveReport:
    """Restore invariant 2 after a deletion batch already applied to ``g``.

    Violators compute desire levels; target levels are processed in increasing
    order and every vertex desiring the current target moves there. Vertices
    whose up*-degree dropped because of a step recompute their desire level.
    """
    _require(g, state, batch, BatchKind.DELETE)
    pool = pool or ParallelFor()
    state.index_batch(batch)
    report = MoveReport(kind=BatchKind.DELETE)
    desire: dict[int, int] = {}
    queue = _LevelQueue()

    def refresh_desires(vertices: list[int]) -> None:
        violating = pool.filter(vertices, lambda x: not state.invariant2_holds(x))
        targets = pool.map(violating, state.desire_level)
        for v, target in zip(violating, targets, strict=True):
            if desire.get(v) != target:
                desire[v] = target
                queue.push(target, v)

    def below_trigger_band(v: int) -> Iterable[int]:
        return state.neighbors_below(v, state.get_level(v) - 1)

    refresh_desires(sorted(batch.endpoints()))

    while (item := queue.pop()) is not None:
        level, candidates = item
        movers = [
            v
            for v in candidates
            if desire.get(v) == level and state.get_level(v) > level
        ]
        if not movers:
            continue
        for v in movers:
            del desire[v]
        touched = _step(state, movers, level, report, hooks, pool, below_trigger_band)
        refresh_desires(sorted(touched))

    logger.debug(
        "Deletion pass done",
        edges=len(batch),
        moved=len(report.old_levels),
        moves=report.moves,
        steps=report.steps,
    )
    return report
