# src/bench/workload.py
"""Seeded edge streams and their partition into update batches.

All randomness comes from ``numpy.random.default_rng(seed)`` (PCG64), so a
seed replays the same stream on every platform.
"""

from collections.abc import Sequence

import numpy as np
import structlog

from src.core.exceptions import WorkloadError
from src.models.batch import BatchKind
from src.models.batch import Edge
from src.models.batch import EdgeBatch

logger = structlog.get_logger(__name__)

MIN_CLIMB_CORE = 3


def _pair_from_index(index: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decode upper-triangle pair indices ``k -> (u, v)`` with ``u < v``.

    Pairs are numbered column by column: ``k = v * (v - 1) / 2 + u``.
    """
    v = ((1 + np.sqrt(1 + 8 * index.astype(np.float64))) // 2).astype(np.int64)
    # float rounding can land one column off in either direction
    v = np.where(v * (v - 1) // 2 > index, v - 1, v)
    v = np.where((v + 1) * v // 2 <= index, v + 1, v)
    u = index - v * (v - 1) // 2
    return u, v


def gnp_stream(n: int, p: float, seed: int) -> list[Edge]:
    """Edges of a G(n, p) sample in a seeded random order.

    Present pairs are found by geometric skips over the ``n(n-1)/2`` pair
    indices, so memory is proportional to the number of edges.
    """
    if n < 2 or not 0 < p <= 1:  # noqa: PLR2004
        raise WorkloadError(WorkloadError.BAD_GNP.format(n=n, p=p))
    rng = np.random.default_rng(seed)
    pairs = n * (n - 1) // 2
    expected = pairs * p
    chunk = max(1024, int(expected + 6 * np.sqrt(expected + 1)))
    found: list[np.ndarray] = []
    position = -1
    while True:
        skips = rng.geometric(p, size=chunk)
        indices = position + np.cumsum(skips)
        inside = indices[indices < pairs]
        found.append(inside)
        if len(inside) < chunk:
            break
        position = int(indices[-1])

    index = np.concatenate(found)
    u, v = _pair_from_index(index)
    order = rng.permutation(len(index))
    stream = list(zip(u[order].tolist(), v[order].tolist(), strict=True))
    logger.debug("Sampled G(n, p)", n=n, p=p, edges=len(stream), seed=seed)
    return stream


def adversarial_climb(
    n_core: int, steps: int = 1, seed: int = 0, offset: int = 0
) -> list[list[Edge]]:
    """Clique edges over ``offset..offset+n_core-1``, shuffled, in ``steps`` batches.

    Inserting a whole clique at once makes every member climb many levels
    inside a single batch.

    Raises:
        WorkloadError: If ``n_core < 3`` or ``steps < 1``.
    """
    if n_core < MIN_CLIMB_CORE:
        raise WorkloadError(WorkloadError.TOO_SMALL_CORE.format(n_core=n_core))
    if steps < 1:
        raise WorkloadError(
            WorkloadError.NOT_POSITIVE.format(field="steps", value=steps)
        )
    rng = np.random.default_rng(seed)
    upper_u, upper_v = np.triu_indices(n_core, k=1)
    order = rng.permutation(len(upper_u))
    return [
        list(
            zip(
                (upper_u[part] + offset).tolist(),
                (upper_v[part] + offset).tolist(),
                strict=True,
            )
        )
        for part in np.array_split(order, steps)
    ]


def gen_workload(
    stream: Sequence[Edge], batch_size: int, *, mirror_delete: bool = True
) -> list[EdgeBatch]:
    """Cut ``stream`` into insert batches in order, plus the mirrored deletes.

    The delete phase replays the insert batches in reverse order.

    Raises:
        WorkloadError: If the stream is empty or ``batch_size < 1``.
    """
    if not stream:
        raise WorkloadError(WorkloadError.EMPTY_STREAM)
    if batch_size < 1:
        raise WorkloadError(
            WorkloadError.NOT_POSITIVE.format(field="batch_size", value=batch_size)
        )
    inserts = [
        EdgeBatch.model_construct(
            kind=BatchKind.INSERT, edges=list(stream[i : i + batch_size]), dropped=0
        )
        for i in range(0, len(stream), batch_size)
    ]
    if not mirror_delete:
        return inserts
    return inserts + [batch.mirrored() for batch in reversed(inserts)]
