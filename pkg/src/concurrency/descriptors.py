# src/concurrency/descriptors.py
"""Operation descriptors, dependency-DAG union-find and the batch counter.

A descriptor is one word per vertex: ``UNMARKED``, ``I_AM_ROOT`` or the id of
the vertex's parent in its dependency DAG. The level a vertex had before the
current batch sits in a companion slot that is written before the word is
published and never changes while the word is marked.
"""

from collections.abc import Callable
from collections.abc import Sequence
from enum import Enum
from typing import NamedTuple

import structlog

from src.core.atomics import AtomicCounter
from src.core.atomics import AtomicWordArray
from src.core.exceptions import ContractError
from src.lds.parallel import ParallelFor
from src.models.batch import Edge
from src.models.batch import EdgeBatch

logger = structlog.get_logger(__name__)

UNMARKED = -1
I_AM_ROOT = -2


class DagStatus(str, Enum):
    MARKED = "marked"
    UNMARKED = "unmarked"


class Descriptor(NamedTuple):
    """Snapshot of one descriptor as a reader saw it."""

    word: int
    old_level: int

    @property
    def marked(self) -> bool:
        return self.word != UNMARKED

    @property
    def is_root(self) -> bool:
        return self.word == I_AM_ROOT


def _no_checkpoint(name: str) -> None:
    pass


class DescriptorTable:
    """Per-vertex descriptors plus the global batch number.

    Update workers mark, merge and unmark; reader threads only load words and
    attempt non-blocking path compression.
    """

    def __init__(
        self,
        n: int,
        get_level: Callable[[int], int],
        checkpoint: Callable[[str], None] | None = None,
    ) -> None:
        self.n = n
        self._get_level = get_level
        self.desc = AtomicWordArray(n, UNMARKED)
        self.old_level = [0] * n
        self.batch_number = AtomicCounter(0)
        self.checkpoint = checkpoint or _no_checkpoint
        self._marked: list[int] = []
        self._batch_adj: dict[int, list[int]] = {}
        self._open = False
        self._logger = logger.bind(component="DescriptorTable", n=n)

    # -- batch lifecycle -----------------------------------------------------

    def begin_batch(self, batch: EdgeBatch | None = None) -> int:
        """Start a batch and return its number.

        Raises:
            ContractError: If the previous batch has not been unmarked.
        """
        if self._open or self._marked:
            raise ContractError(
                ContractError.MARKED_REMAINING.format(count=len(self._marked))
            )
        adjacency: dict[int, list[int]] = {}
        for u, v in batch.edges if batch is not None else ():
            adjacency.setdefault(u, []).append(v)
            adjacency.setdefault(v, []).append(u)
        self._batch_adj = adjacency
        self._open = True
        return self.batch_number.increment()

    def batch_neighbors(self, v: int) -> list[int]:
        return self._batch_adj.get(v, [])

    def unmark_all(self, pool: ParallelFor | None = None) -> None:
        """Clear every descriptor: all DAG roots first, then everything else."""
        pool = pool or ParallelFor()
        marked = self._marked
        roots = [v for v in marked if self.desc.load(v) == I_AM_ROOT]
        pool.run(roots, self._clear)
        self.checkpoint("unmark.between_phases")
        rest = [v for v in marked if self.desc.load(v) != UNMARKED]
        pool.run(rest, self._clear)
        self._logger.debug("Unmarked batch", roots=len(roots), others=len(rest))
        self._marked = []
        self._batch_adj = {}
        self._open = False

    def _clear(self, v: int) -> None:
        self.desc.store(v, UNMARKED)

    # -- marking -------------------------------------------------------------

    def is_marked(self, v: int) -> bool:
        return self.desc.load(v) != UNMARKED

    def snapshot(self, v: int) -> Descriptor:
        word = self.desc.load(v)
        return Descriptor(word, self.old_level[v])

    def mark(self, v: int, triggers: Sequence[int]) -> None:
        """Publish a descriptor for ``v`` inside the merged DAG of its causes.

        The causes are the given triggers plus every batch neighbor of ``v``
        that is already marked.

        Raises:
            ContractError: If ``v`` is already marked.
        """
        if self.is_marked(v):
            raise ContractError(
                ContractError.ALREADY_MARKED.format(
                    vertex=v, batch=self.batch_number.load()
                )
            )
        self.old_level[v] = self._get_level(v)
        causes = [w for w in self.batch_neighbors(v) if self.is_marked(w)]
        causes.extend(triggers)

        anchor: int | None = None
        for w in causes:
            if anchor is None:
                anchor = w
            else:
                self.merge(anchor, w)
        parent = I_AM_ROOT if anchor is None else self.find(anchor)
        self._marked.append(v)
        self.desc.store(v, parent)

    def merge(self, v: int, w: int) -> None:
        """Union the DAGs of two marked vertices; the smaller root id wins.

        Raises:
            ContractError: If either vertex is unmarked.
        """
        for x in (v, w):
            if not self.is_marked(x):
                raise ContractError(ContractError.NOT_MARKED.format(vertex=x))
        while True:
            root_v = self.find(v)
            root_w = self.find(w)
            if root_v == root_w:
                return
            winner, loser = min(root_v, root_w), max(root_v, root_w)
            if self.desc.compare_and_set(loser, I_AM_ROOT, winner):
                return

    def find(self, v: int) -> int:
        """Root of ``v``'s DAG, compressing the traversed path.

        Raises:
            ContractError: If ``v`` is unmarked.
        """
        word = self.desc.load(v)
        if word == UNMARKED:
            raise ContractError(ContractError.NOT_MARKED.format(vertex=v))
        path: list[tuple[int, int]] = []
        node = v
        while word >= 0:
            path.append((node, word))
            node = word
            word = self.desc.load(node)
        # an unmarked ancestor means unmarking is under way; report it as root
        root = node
        for x, parent in path[:-1]:
            self.desc.compare_and_set(x, parent, root)
        return root

    # -- reads ---------------------------------------------------------------

    def check_dag(self, d: Descriptor, origin: int) -> DagStatus:
        """Whether the DAG holding ``d`` (the descriptor of ``origin``) is marked.

        Returns ``UNMARKED`` as soon as any descriptor on the way to the root is
        unmarked: roots are unmarked before the rest of their DAG. When the
        root is still marked the traversed prefix is pointed at it, using
        non-blocking updates that give up on contention or a batch change.
        """
        word = d.word
        if word == UNMARKED:
            return DagStatus.UNMARKED
        batch = self.batch_number.load()
        path: list[tuple[int, int]] = []
        node = origin
        while word != I_AM_ROOT:
            path.append((node, word))
            node = word
            word = self.desc.load(node)
            if word == UNMARKED:
                return DagStatus.UNMARKED
        def same_batch() -> bool:
            return self.batch_number.load() == batch

        for x, parent in path[:-1]:
            self.desc.try_compare_and_set(x, parent, node, same_batch)
        return DagStatus.MARKED

    # -- diagnostics ---------------------------------------------------------

    def marked_vertices(self) -> list[int]:
        return [v for v in self._marked if self.is_marked(v)]

    def roots(self, vertices: Sequence[int]) -> dict[int, int]:
        """``find`` of every marked vertex among ``vertices``."""
        return {v: self.find(v) for v in vertices if self.is_marked(v)}

    def count_roots(self) -> int:
        return sum(1 for v in self._marked if self.desc.load(v) == I_AM_ROOT)

    def same_dag_violations(self, batch: EdgeBatch) -> list[Edge]:
        """Batch edges whose marked endpoints ended up in different DAGs."""
        return [
            (u, v)
            for u, v in batch.edges
            if self.is_marked(u) and self.is_marked(v) and self.find(u) != self.find(v)
        ]
