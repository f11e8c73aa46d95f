# src/graph/loader.py
"""SNAP-style edge-list ingestion."""

from pathlib import Path
from typing import BinaryIO
from typing import NamedTuple

import structlog

from src.core.exceptions import GraphParseError
from src.graph.store import Graph
from src.models.batch import Edge

logger = structlog.get_logger(__name__)

EXPECTED_FIELDS = 2


class EdgeListStats(NamedTuple):
    n: int
    edges: int
    self_loops: int
    duplicates: int


def scan_edge_list(source: BinaryIO) -> tuple[Graph, list[Edge], EdgeListStats]:
    """Parse ``u v`` lines into an empty graph and the ordered edge stream.

    Lines starting with ``#`` are comments. The graph is sized to the largest
    id plus one; the stream keeps file order with self-loops and duplicates
    dropped and endpoints ordered ``u < v``.

    Raises:
        GraphParseError: On a malformed line (with its 1-based number) or when
            the input holds no vertex ids at all.
    """
    stream: list[Edge] = []
    seen: set[Edge] = set()
    max_id = -1
    self_loops = 0
    duplicates = 0

    for line_no, raw in enumerate(source, start=1):
        line = raw.decode("utf-8", errors="replace").strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != EXPECTED_FIELDS:
            raise GraphParseError(
                GraphParseError.MALFORMED_LINE.format(line_no=line_no, line=line)
            )
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError as e:
            raise GraphParseError(
                GraphParseError.MALFORMED_LINE.format(line_no=line_no, line=line), e
            ) from e
        if u < 0 or v < 0:
            raise GraphParseError(
                GraphParseError.MALFORMED_LINE.format(line_no=line_no, line=line)
            )

        max_id = max(max_id, u, v)
        if u == v:
            self_loops += 1
            continue
        edge = (u, v) if u < v else (v, u)
        if edge in seen:
            duplicates += 1
            continue
        seen.add(edge)
        stream.append(edge)

    if max_id < 0:
        raise GraphParseError(GraphParseError.EMPTY_INPUT)

    stats = EdgeListStats(max_id + 1, len(stream), self_loops, duplicates)
    logger.info("Edge list loaded", **stats._asdict())
    return Graph(stats.n), stream, stats


def load_edge_list(source: BinaryIO) -> tuple[Graph, list[Edge]]:
    graph, stream, _ = scan_edge_list(source)
    return graph, stream


def load_edge_list_path(path: Path) -> tuple[Graph, list[Edge]]:
    """Open ``path`` and parse it with ``load_edge_list``."""
    with path.open("rb") as source:
        return load_edge_list(source)


def scan_edge_list_path(path: Path) -> tuple[Graph, list[Edge], EdgeListStats]:
    with path.open("rb") as source:
        return scan_edge_list(source)
