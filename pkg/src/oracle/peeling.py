# src/oracle/peeling.py
"""Exact coreness by bucket peeling, plus a brute-force reference."""

from collections.abc import Sequence

import numpy as np

from src.graph.store import Graph

CorenessMap = list[int]

# Subset enumeration is exponential; the brute force is for tiny graphs only.
BRUTE_FORCE_LIMIT = 16


def exact_coreness(g: Graph) -> CorenessMap:
    """Coreness of every vertex in O(n + m).

    Vertices sit in an array sorted by residual degree with one start offset
    per degree value; peeling the front vertex moves each unpeeled neighbor of
    larger degree one bucket down by a swap with that bucket's first vertex.
    """
    n = g.n
    degree = [g.degree(v) for v in range(n)]
    max_degree = max(degree, default=0)

    counts = [0] * (max_degree + 1)
    for d in degree:
        counts[d] += 1
    start = [0] * (max_degree + 1)
    offset = 0
    for d, count in enumerate(counts):
        start[d] = offset
        offset += count

    order = [0] * n
    position = [0] * n
    fill = list(start)
    for v in range(n):
        position[v] = fill[degree[v]]
        order[position[v]] = v
        fill[degree[v]] += 1

    for i in range(n):
        v = order[i]
        dv = degree[v]
        for u in g.neighbors(v):
            du = degree[u]
            if du <= dv:
                continue
            pu = position[u]
            first = start[du]
            w = order[first]
            if w != u:
                order[pu], order[first] = w, u
                position[w], position[u] = pu, first
            start[du] += 1
            degree[u] = du - 1
    return degree


def brute_force_coreness(n: int, edges: Sequence[tuple[int, int]]) -> CorenessMap:
    """Coreness as the best minimum induced degree over all vertex subsets.

    ``k(v)`` is the largest ``d`` for which some subset containing ``v`` has
    minimum induced degree ``d``; the union of those subsets is the ``d``-core.
    All ``2**n`` subsets are scored at once as rows of a membership matrix.
    """
    if n > BRUTE_FORCE_LIMIT:
        message = f"brute force is limited to {BRUTE_FORCE_LIMIT} vertices, got {n}"
        raise ValueError(message)
    if n == 0:
        return []
    adjacency = np.zeros((n, n), dtype=np.int64)
    for u, v in edges:
        adjacency[u, v] = adjacency[v, u] = 1

    member = (np.arange(1 << n)[:, None] >> np.arange(n)) & 1
    induced = member @ adjacency
    floor = np.where(member == 1, induced, n).min(axis=1)
    floor[0] = 0
    return (member * floor[:, None]).max(axis=0).tolist()


def coreness_histogram(core: CorenessMap) -> dict[int, int]:
    """Number of vertices per coreness value, in increasing order of k."""
    histogram: dict[int, int] = {}
    for k in core:
        histogram[k] = histogram.get(k, 0) + 1
    return dict(sorted(histogram.items()))
