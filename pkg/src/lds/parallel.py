# src/lds/parallel.py
"""Barrier-separated parallel-for over a fixed worker pool."""

from collections.abc import Callable
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from types import TracebackType
from typing import Self


class ParallelFor:
    """Run per-item work on update workers and return once all of it is done.

    Returning from ``map``/``run`` is the barrier. Small inputs run inline on
    the calling thread; any interleaving is permitted by callers, so inline
    execution is a valid schedule.
    """

    def __init__(self, workers: int = 1, grain: int = 256) -> None:
        self.workers = max(1, workers)
        self.grain = max(1, grain)
        self._pool = (
            ThreadPoolExecutor(
                max_workers=self.workers, thread_name_prefix="lds-update"
            )
            if self.workers > 1
            else None
        )

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
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def map[T, R](self, items: Sequence[T], fn: Callable[[T], R]) -> list[R]:
        if self._pool is None or len(items) <= self.grain:
            return [fn(item) for item in items]
        size = max(self.grain, -(-len(items) // self.workers))
        chunks = [items[i : i + size] for i in range(0, len(items), size)]
        results: list[R] = []
        for part in self._pool.map(lambda chunk: [fn(x) for x in chunk], chunks):
            results.extend(part)
        return results

    def run[T](self, items: Sequence[T], fn: Callable[[T], object]) -> None:
        self.map(items, fn)

    def filter[T](self, items: Sequence[T], keep: Callable[[T], bool]) -> list[T]:
        flags = self.map(items, keep)
        return [item for item, flag in zip(items, flags, strict=True) if flag]
