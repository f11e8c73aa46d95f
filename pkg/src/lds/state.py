# src/lds/state.py
"""Per-vertex levels plus the level-partitioned neighbor index."""

from collections.abc import Iterable
from collections.abc import Iterator
from collections.abc import Mapping
from collections.abc import Sequence

import structlog

from src.core.atomics import AtomicWordArray
from src.core.exceptions import ContractError
from src.graph.store import Graph
from src.lds.levels import Thresholds
from src.models.batch import BatchKind
from src.models.batch import EdgeBatch
from src.models.params import LevelParams

logger = structlog.get_logger(__name__)


class LevelState:
    """Level assignment with incrementally maintained neighbor buckets.

    For every vertex ``v`` the index keeps ``up[v]``, the neighbors at level
    ``>= level(v)``, and ``down[v]``, the remaining neighbors bucketed by their
    level. Up-degree is ``len(up[v])``; up*-degree adds the bucket at
    ``level(v) - 1``. Only update workers touch the index, between barriers.
    Levels live in an atomic word array so readers may sample them any time.
    """

    def __init__(self, graph: Graph, params: LevelParams) -> None:
        self.graph = graph
        self.params = params
        self.thresholds = Thresholds(params)
        self.levels = AtomicWordArray(graph.n, 0)
        self._up: list[set[int]] = [set(graph.neighbors(v)) for v in range(graph.n)]
        self._down: list[dict[int, set[int]]] = [{} for _ in range(graph.n)]
        self._logger = logger.bind(n=graph.n, num_levels=params.num_levels)

    @property
    def n(self) -> int:
        return self.graph.n

    def get_level(self, v: int) -> int:
        return self.levels.load(v)

    def set_level(self, v: int, level: int) -> None:
        self.levels.store_unguarded(v, level)

    def inject_level(self, v: int, level: int) -> None:
        """Overwrite a level without fixing the index (fault injection only)."""
        self._logger.warning("Injecting level fault", vertex=v, level=level)
        self.levels.store_unguarded(v, level)

    def snapshot(self) -> list[int]:
        return self.levels.snapshot()

    def assign(self, levels: Sequence[int]) -> None:
        """Install a whole level assignment and rebuild the index from scratch.

        Raises:
            ContractError: If a level is outside ``[0, K)``.
        """
        top = self.params.num_levels
        for v, level in enumerate(levels):
            if not 0 <= level < top:
                raise ContractError(
                    ContractError.LEVEL_OUT_OF_RANGE.format(level=level, top=top)
                )
            self.levels.store_unguarded(v, level)
        self._up = [set() for _ in range(self.n)]
        self._down = [{} for _ in range(self.n)]
        for v in range(self.n):
            level = self.levels.load(v)
            for w in self.graph.neighbors(v):
                self._place(v, w, level)

    # -- bookkeeping ---------------------------------------------------------

    def up_degree(self, v: int) -> int:
        return len(self._up[v])

    def up_star_degree(self, v: int) -> int:
        below = self._down[v].get(self.levels.load(v) - 1)
        return len(self._up[v]) + (len(below) if below else 0)

    def up_neighbors(self, v: int) -> set[int]:
        """Neighbors at level ``>= level(v)``."""
        return self._up[v]

    def neighbors_below(self, v: int, bound: int) -> Iterator[int]:
        """Neighbors at levels strictly below ``bound``."""
        for level, bucket in self._down[v].items():
            if level < bound:
                yield from bucket

    def invariant1_holds(self, v: int) -> bool:
        return self.thresholds.upper_ok(self.levels.load(v), len(self._up[v]))

    def invariant2_holds(self, v: int) -> bool:
        level = self.levels.load(v)
        if level == 0:
            return True
        return self.thresholds.lower_ok(level, self.up_star_degree(v))

    def desire_level(self, v: int) -> int:
        """Highest level below ``level(v)`` at which invariant 2 would hold.

        Placing ``v`` at ``l`` counts the neighbors at level ``>= l - 1``; that
        count is a step function of ``l`` that changes only at occupied
        buckets, so the scan walks buckets instead of levels.

        Raises:
            ContractError: If ``v`` does not violate invariant 2.
        """
        if self.invariant2_holds(v):
            raise ContractError(ContractError.NOT_VIOLATING.format(vertex=v))

        thresholds = self.thresholds
        per_group = thresholds.per_group
        down = self._down[v]
        keys = sorted((k for k, bucket in down.items() if bucket), reverse=True)
        count = len(self._up[v])
        # t = candidate - 1 ranges downward from level(v) - 2 to 0
        t_hi = self.levels.load(v) - 2
        i = 0
        while t_hi >= 0:
            while i < len(keys) and keys[i] >= t_hi:
                count += len(down[keys[i]])
                i += 1
            t_lo = keys[i] + 1 if i < len(keys) else 0
            group = thresholds.max_group_supported(count)
            if group >= 0:
                t_best = min(t_hi, (group + 1) * per_group - 1)
                if t_best >= t_lo:
                    return t_best + 1
            t_hi = t_lo - 1
        return 0

    # -- index maintenance ---------------------------------------------------

    def _place(self, x: int, w: int, x_level: int) -> None:
        w_level = self.levels.load(w)
        if w_level >= x_level:
            self._up[x].add(w)
        else:
            self._down[x].setdefault(w_level, set()).add(w)

    def _unplace(self, x: int, w: int, x_level: int, w_level: int) -> None:
        if w_level >= x_level:
            self._up[x].discard(w)
            return
        bucket = self._down[x].get(w_level)
        if bucket is not None:
            bucket.discard(w)
            if not bucket:
                del self._down[x][w_level]

    def index_batch(self, batch: EdgeBatch) -> None:
        """Mirror an already applied batch in the neighbor index."""
        load = self.levels.load
        if batch.kind is BatchKind.INSERT:
            for u, v in batch.edges:
                self._place(u, v, load(u))
                self._place(v, u, load(v))
        else:
            for u, v in batch.edges:
                self._unplace(u, v, load(u), load(v))
                self._unplace(v, u, load(v), load(u))

    def touched_by(self, moved: Mapping[int, int]) -> dict[int, list[int]]:
        """Map every neighbor of a moved vertex to the moved neighbors it has."""
        touched: dict[int, list[int]] = {v: [] for v in moved}
        for u in moved:
            for x in self.graph.neighbors(u):
                touched.setdefault(x, []).append(u)
        return touched

    def refresh_vertex(
        self, x: int, moved_neighbors: Iterable[int], moved: Mapping[int, int]
    ) -> None:
        """Re-bucket ``x``'s index after one barrier-separated move step.

        ``moved`` maps every vertex moved in the step to its level before the
        step; all live levels are final for the step. Only ``x``'s own index is
        written, so distinct vertices may be refreshed in parallel.
        """
        x_old = moved.get(x, self.levels.load(x))
        x_new = self.levels.load(x)
        up = self._up[x]
        down = self._down[x]
        moved_neighbors = list(moved_neighbors)
        for u in moved_neighbors:
            self._unplace(x, u, x_old, moved[u])

        if x_new > x_old:
            load = self.levels.load
            demoted = [w for w in up if load(w) < x_new]
            for w in demoted:
                up.discard(w)
                down.setdefault(load(w), set()).add(w)
        elif x_new < x_old:
            for level in [k for k in down if k >= x_new]:
                up |= down.pop(level)

        for u in moved_neighbors:
            self._place(x, u, x_new)

    def recount(self, v: int) -> tuple[int, int]:
        """Up-degree and up*-degree recomputed from the graph and levels."""
        load = self.levels.load
        level = load(v)
        up = up_star = 0
        for w in self.graph.neighbors(v):
            w_level = load(w)
            if w_level >= level:
                up += 1
            if w_level >= level - 1:
                up_star += 1
        return up, up_star
