# src/graph/store.py
"""Dynamic undirected graph over a fixed vertex universe."""

from collections.abc import Iterator

import structlog

from src.core.exceptions import ContractError
from src.models.batch import BatchKind
from src.models.batch import Edge
from src.models.batch import EdgeBatch

logger = structlog.get_logger(__name__)


class Graph:
    """Adjacency-set graph with dense vertex ids ``0..n-1``.

    The update component is the only writer; it mutates the graph between
    batch barriers through ``apply_batch``.
    """

    __slots__ = ("_adj", "m", "n")

    def __init__(self, n: int) -> None:
        self.n = n
        self.m = 0
        self._adj: list[set[int]] = [set() for _ in range(n)]

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def neighbors(self, v: int) -> set[int]:
        """Live neighbor set of ``v``. Callers must not mutate it."""
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def edges(self) -> Iterator[Edge]:
        for u, nbrs in enumerate(self._adj):
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def audit(self) -> list[str]:
        """Walk the adjacency and report structural invariant breaches."""
        problems: list[str] = []
        total = 0
        for u, nbrs in enumerate(self._adj):
            total += len(nbrs)
            if u in nbrs:
                problems.append(f"self-loop at {u}")
            problems.extend(
                f"asymmetric edge {u}->{v}" for v in nbrs if u not in self._adj[v]
            )
        if total != 2 * self.m:
            problems.append(f"edge count {self.m} != half adjacency sum {total / 2}")
        return problems


def _in_range(g: Graph, edge: Edge) -> bool:
    u, v = edge
    return 0 <= u < g.n and 0 <= v < g.n


def normalize_batch(g: Graph, raw: EdgeBatch) -> EdgeBatch:
    """Drop duplicates, self-loops, out-of-range endpoints and no-op updates.

    Insert batches keep only edges absent from ``g``; delete batches keep only
    edges present. The number of dropped edges is reported on the result.
    """
    inserting = raw.kind is BatchKind.INSERT
    seen: set[Edge] = set()
    kept: list[Edge] = []
    for u, v in raw.edges:
        edge = (u, v) if u < v else (v, u)
        if u == v or edge in seen or not _in_range(g, edge):
            continue
        seen.add(edge)
        if g.has_edge(*edge) != inserting:
            kept.append(edge)

    dropped = len(raw.edges) - len(kept) + raw.dropped
    if dropped:
        logger.debug(
            "Dropped no-op updates",
            kind=raw.kind.value,
            dropped=dropped,
            kept=len(kept),
        )
    return EdgeBatch.model_construct(kind=raw.kind, edges=kept, dropped=dropped)


def apply_batch(g: Graph, batch: EdgeBatch) -> None:
    """Insert or delete every edge of a normalized batch.

    Raises:
        ContractError: If an edge is out of range, a self-loop, or a no-op
            against the current graph. The graph is left untouched.
    """
    inserting = batch.kind is BatchKind.INSERT
    for edge in batch.edges:
        u, v = edge
        if not _in_range(g, edge):
            raise ContractError(
                ContractError.EDGE_OUT_OF_RANGE.format(edge=edge, n=g.n)
            )
        if u == v or g.has_edge(u, v) == inserting:
            raise ContractError(ContractError.BATCH_NOT_NORMALIZED.format(edge=edge))
    if len(set(batch.edges)) != len(batch.edges):
        raise ContractError(ContractError.BATCH_NOT_NORMALIZED.format(edge="duplicate"))

    adj = g._adj  # noqa: SLF001
    if inserting:
        for u, v in batch.edges:
            adj[u].add(v)
            adj[v].add(u)
        g.m += len(batch.edges)
    else:
        for u, v in batch.edges:
            adj[u].discard(v)
            adj[v].discard(u)
        g.m -= len(batch.edges)
