# src/concurrency/cplds.py
"""Level structure with batch updates and concurrent coreness reads."""

from collections.abc import Callable
from collections.abc import Sequence
from types import TracebackType
from typing import NamedTuple
from typing import Self

import structlog
from pydantic import BaseModel
from pydantic import Field

from src.concurrency.descriptors import I_AM_ROOT
from src.concurrency.descriptors import UNMARKED
from src.concurrency.descriptors import DagStatus
from src.concurrency.descriptors import Descriptor
from src.concurrency.descriptors import DescriptorTable
from src.graph.store import Graph
from src.graph.store import apply_batch
from src.graph.store import normalize_batch
from src.lds.engine import BatchHooks
from src.lds.engine import MoveReport
from src.lds.engine import NullHooks
from src.lds.engine import batch_delete
from src.lds.engine import batch_insert
from src.lds.parallel import ParallelFor
from src.lds.state import LevelState
from src.models.batch import BatchKind
from src.models.batch import EdgeBatch
from src.models.history import MoverRecord
from src.models.history import ReadMode
from src.models.params import LevelParams

logger = structlog.get_logger(__name__)


class ReadOutcome(NamedTuple):
    level: int
    retries: int
    from_descriptor: bool


class BatchOutcome(BaseModel):
    """What one applied batch did."""

    batch_id: int
    kind: BatchKind
    edges: int = Field(..., description="Edges applied after normalization")
    dropped: int = Field(default=0, description="No-op edges removed")
    moves: int = 0
    steps: int = 0
    movers: list[MoverRecord] = Field(default_factory=list)


class DescriptorHooks:
    """Publishes level changes through the descriptor table."""

    def __init__(self, table: DescriptorTable) -> None:
        self.table = table

    def is_marked(self, v: int) -> bool:
        return self.table.is_marked(v)

    def mark(self, v: int, triggers: Sequence[int]) -> None:
        self.table.mark(v, triggers)

    def merge(self, v: int, w: int) -> None:
        self.table.merge(v, w)

    def settle(self, movers: Sequence[int]) -> None:
        # movers marked in the same step cannot see each other while marking
        table = self.table
        for v in movers:
            for w in table.batch_neighbors(v):
                if table.is_marked(w):
                    table.merge(v, w)

    def checkpoint(self, name: str) -> None:
        self.table.checkpoint(name)


class _CheckpointHooks(NullHooks):
    def __init__(self, checkpoint: Callable[[str], None]) -> None:
        self._checkpoint = checkpoint

    def checkpoint(self, name: str) -> None:
        self._checkpoint(name)


class ConcurrentLDS:
    """Approximate k-core structure serving reads concurrently with batches.

    One update thread calls ``apply``; any number of reader threads call
    ``read``/``read_outcome`` (descriptor-synchronized) or ``get_level``
    (unsynchronized). With ``mode`` other than ``cplds`` no descriptors are
    published, which is how the baselines update.
    """

    def __init__(
        self,
        graph: Graph,
        params: LevelParams,
        *,
        mode: ReadMode = ReadMode.CPLDS,
        workers: int = 1,
        grain: int = 256,
        checkpoint: Callable[[str], None] | None = None,
    ) -> None:
        self.graph = graph
        self.params = params
        self.mode = mode
        self.state = LevelState(graph, params)
        self.table = DescriptorTable(graph.n, self.state.get_level, checkpoint)
        self.pool = ParallelFor(workers, grain)
        self._checkpoint = self.table.checkpoint
        self._estimates = self.state.thresholds.estimate
        self._hooks: BatchHooks = (
            DescriptorHooks(self.table)
            if mode is ReadMode.CPLDS
            else _CheckpointHooks(self._checkpoint)
        )
        self._logger = logger.bind(component="ConcurrentLDS", mode=mode.value)

    def __enter__(self) -> Self:
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self.close()

    def close(self) -> None:
        self.pool.close()

    # -- updates -------------------------------------------------------------

    def apply(self, raw: EdgeBatch) -> BatchOutcome:
        """Normalize, apply and settle one batch; returns after unmarking."""
        batch = normalize_batch(self.graph, raw)
        batch_id = self.table.begin_batch(batch)
        apply_batch(self.graph, batch)
        if batch.kind is BatchKind.INSERT:
            report = batch_insert(self.graph, self.state, batch, self._hooks, self.pool)
        else:
            report = batch_delete(self.graph, self.state, batch, self._hooks, self.pool)

        movers = self._movers(report)
        self._checkpoint("unmark.before")
        self.table.unmark_all(self.pool)
        self._checkpoint("unmark.after")

        self._logger.info(
            "Batch applied",
            batch_id=batch_id,
            kind=batch.kind.value,
            edges=len(batch),
            dropped=batch.dropped,
            moved=len(movers),
            steps=report.steps,
        )
        return BatchOutcome(
            batch_id=batch_id,
            kind=batch.kind,
            edges=len(batch),
            dropped=batch.dropped,
            moves=report.moves,
            steps=report.steps,
            movers=movers,
        )

    def _movers(self, report: MoveReport) -> list[MoverRecord]:
        roots = (
            self.table.roots(report.moved) if self.mode is ReadMode.CPLDS else {}
        )
        get_level = self.state.get_level
        return [
            MoverRecord.model_construct(
                vertex=v,
                old_level=old,
                new_level=get_level(v),
                dag_root=roots.get(v, v),
            )
            for v, old in sorted(report.old_levels.items())
        ]

    # -- reads ---------------------------------------------------------------

    def get_level(self, v: int) -> int:
        return self.state.levels.load(v)

    def check_dag(self, d: Descriptor, origin: int) -> DagStatus:
        return self.table.check_dag(d, origin)

    def read_outcome(self, v: int) -> ReadOutcome:
        """Sandwiched read: batch number, live level, descriptor, DAG check.

        Returns the descriptor's old level while ``v``'s DAG is marked, and the
        live level otherwise, retrying whenever the batch number or the live
        level changed around the check.
        """
        batch = self.table.batch_number
        levels = self.state.levels
        desc = self.table.desc
        old_level = self.table.old_level
        checkpoint = self._checkpoint
        retries = 0
        while True:
            b1 = batch.load()
            checkpoint("read.after_b1")
            l1 = levels.load(v)
            word = desc.load(v)
            old = old_level[v]
            if word == UNMARKED:
                status = DagStatus.UNMARKED
            elif word == I_AM_ROOT:
                status = DagStatus.MARKED
            else:
                status = self.table.check_dag(Descriptor(word, old), v)
            checkpoint("read.after_check")
            l2 = levels.load(v)
            b2 = batch.load()
            if b1 != b2:
                retries += 1
                continue
            if status is DagStatus.MARKED:
                return ReadOutcome(old, retries, from_descriptor=True)
            if l1 == l2:
                return ReadOutcome(l1, retries, from_descriptor=False)
            retries += 1

    def read_level(self, v: int) -> int:
        return self.read_outcome(v).level

    def read(self, v: int) -> float:
        """Linearizable coreness estimate of ``v``."""
        return self._estimates[self.read_outcome(v).level]

    def levels(self) -> list[int]:
        return self.state.snapshot()

    def estimates(self) -> list[float]:
        return [self._estimates[level] for level in self.state.snapshot()]
