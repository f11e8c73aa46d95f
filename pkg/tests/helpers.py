from itertools import combinations

from src.graph.store import Graph
from src.graph.store import apply_batch
from src.graph.store import normalize_batch
from src.lds.engine import MoveReport
from src.lds.engine import NullHooks
from src.lds.engine import batch_delete
from src.lds.engine import batch_insert
from src.lds.levels import make_params
from src.lds.parallel import ParallelFor
from src.lds.state import LevelState
from src.models.batch import BatchKind
from src.models.batch import Edge
from src.models.batch import EdgeBatch


def clique(vertices: range | list[int]) -> list[Edge]:
    return list(combinations(vertices, 2))


def insert(edges: list[Edge]) -> EdgeBatch:
    return EdgeBatch(kind=BatchKind.INSERT, edges=edges)


def delete(edges: list[Edge]) -> EdgeBatch:
    return EdgeBatch(kind=BatchKind.DELETE, edges=edges)


class Structure:
    """A graph plus its level state, updated with the batch passes."""

    def __init__(self, n: int, pool: ParallelFor | None = None) -> None:
        self.graph = Graph(n)
        self.params = make_params(n, 0.2, 9.0)
        self.state = LevelState(self.graph, self.params)
        self.pool = pool

    def apply(self, raw: EdgeBatch) -> MoveReport:
        batch = normalize_batch(self.graph, raw)
        apply_batch(self.graph, batch)
        passes = batch_insert if batch.kind is BatchKind.INSERT else batch_delete
        return passes(self.graph, self.state, batch, NullHooks(), self.pool)

    def levels(self) -> list[int]:
        return self.state.snapshot()

    def estimates(self) -> list[float]:
        return [self.state.thresholds.estimate[lvl] for lvl in self.levels()]
