# src/oracle/history.py
"""Linearizability consequences checked over recorded histories.

History files are tab-separated, one record per line, ``#`` starts a comment:

    B  batch_id  kind  begin_ts  end_ts
    M  batch_id  vertex  old_level  new_level  dag_root
    R  vertex  invoke_ts  return_ts  returned_level  mode  batch_id

Mover lines must follow the batch line they belong to.
"""

from bisect import bisect_left
from bisect import bisect_right
from collections.abc import Iterable
from collections.abc import Sequence
from pathlib import Path
from typing import TextIO

import structlog
from pydantic import ValidationError

from src.core.exceptions import HistoryFormatError
from src.models.history import BatchRecord
from src.models.history import HistoryViolation
from src.models.history import MoverRecord
from src.models.history import ReadRecord

logger = structlog.get_logger(__name__)

_BATCH_FIELDS = 5
_MOVER_FIELDS = 6
_READ_FIELDS = 7


def _ordered_batches(batches: Sequence[BatchRecord]) -> list[BatchRecord]:
    ordered = sorted(batches, key=lambda b: b.begin_ts)
    seen: set[int] = set()
    for prev, batch in zip([None, *ordered], ordered, strict=False):
        if batch.batch_id in seen:
            raise HistoryFormatError(
                HistoryFormatError.BAD_RECORD.format(
                    line_no="-", reason=f"duplicate batch {batch.batch_id}"
                )
            )
        seen.add(batch.batch_id)
        if prev is not None and prev.end_ts > batch.begin_ts:
            raise HistoryFormatError(
                HistoryFormatError.BAD_RECORD.format(
                    line_no="-",
                    reason=f"batches {prev.batch_id} and {batch.batch_id} overlap",
                )
            )
    return ordered


class _Timeline:
    """Per-vertex level changes, indexed by batch position."""

    def __init__(self, batches: list[BatchRecord]) -> None:
        self.begins = [b.begin_ts for b in batches]
        self.ends = [b.end_ts for b in batches]
        self.moves: dict[int, list[tuple[int, MoverRecord]]] = {}
        for index, batch in enumerate(batches):
            for mover in batch.movers:
                self.moves.setdefault(mover.vertex, []).append((index, mover))

    def overlap(self, read: ReadRecord) -> tuple[int, int]:
        """Positions ``[first, last]`` of batches overlapping ``read``.

        An empty overlap is returned as ``(i, i - 1)`` where ``i`` is the
        position of the first batch starting after the read.
        """
        first = bisect_right(self.ends, read.invoke_ts)
        last = bisect_left(self.begins, read.return_ts) - 1
        return first, last

    def allowed(self, vertex: int, first: int, last: int) -> set[int]:
        """Levels ``vertex`` holds at some boundary of batches ``first..last``."""
        moves = self.moves.get(vertex, [])
        level = 0
        allowed: set[int] = set()
        for index, mover in moves:
            if index >= first:
                if index > last:
                    break
                allowed.add(mover.new_level)
                continue
            level = mover.new_level
        allowed.add(level)
        return allowed


def check_history(
    batches: Sequence[BatchRecord], reads: Sequence[ReadRecord]
) -> list[HistoryViolation]:
    """Flag boundary violations and DAG inversions.

    A read may return any level its vertex held at the start or the end of a
    batch overlapping the read, or the stable level when it overlaps none.
    Within one batch, a read that returns a mover's old level must not start
    after another read returned the new level of a mover in the same DAG.

    Raises:
        HistoryFormatError: If batches overlap or repeat an id.
    """
    ordered = _ordered_batches(batches)
    timeline = _Timeline(ordered)
    violations: list[HistoryViolation] = []

    roots: list[dict[int, MoverRecord]] = [
        {m.vertex: m for m in batch.movers} for batch in ordered
    ]
    # per batch position: root -> earliest return of a read that saw a new level
    first_new: list[dict[int, int]] = [{} for _ in ordered]
    old_reads: list[list[ReadRecord]] = [[] for _ in ordered]

    for read in reads:
        first, last = timeline.overlap(read)
        vertex = read.vertex
        if read.returned_level not in timeline.allowed(vertex, first, last):
            batch_id = ordered[first].batch_id if first <= last else None
            violations.append(
                HistoryViolation(
                    kind="boundary",
                    vertex=vertex,
                    batch_id=batch_id,
                    detail=(
                        f"read [{read.invoke_ts}, {read.return_ts}] returned level "
                        f"{read.returned_level}"
                    ),
                )
            )
            continue
        if first > last:
            continue
        mover = roots[first].get(vertex)
        if mover is not None and read.returned_level == mover.new_level:
            seen = first_new[first].get(mover.dag_root)
            if seen is None or read.return_ts < seen:
                first_new[first][mover.dag_root] = read.return_ts
        mover = roots[last].get(vertex)
        if mover is not None and read.returned_level == mover.old_level:
            old_reads[last].append(read)

    for index, batch in enumerate(ordered):
        earliest = first_new[index]
        if not earliest:
            continue
        for read in old_reads[index]:
            mover = roots[index][read.vertex]
            seen = earliest.get(mover.dag_root)
            if seen is not None and read.invoke_ts > seen:
                violations.append(
                    HistoryViolation(
                        kind="dag_inversion",
                        vertex=read.vertex,
                        batch_id=batch.batch_id,
                        detail=(
                            f"old level {mover.old_level} read at {read.invoke_ts} "
                            f"after a new level of DAG {mover.dag_root} returned at "
                            f"{seen}"
                        ),
                    )
                )

    logger.info(
        "History checked",
        batches=len(ordered),
        reads=len(reads),
        violations=len(violations),
    )
    return violations


# -- file codec --------------------------------------------------------------


def write_history(
    sink: TextIO, batches: Iterable[BatchRecord], reads: Iterable[ReadRecord]
) -> None:
    sink.write("# kind\tfields...\n")
    for batch in batches:
        sink.write(
            f"B\t{batch.batch_id}\t{batch.kind}\t{batch.begin_ts}\t{batch.end_ts}\n"
        )
        for m in batch.movers:
            sink.write(
                f"M\t{batch.batch_id}\t{m.vertex}\t{m.old_level}\t{m.new_level}"
                f"\t{m.dag_root}\n"
            )
    for r in reads:
        sink.write(
            f"R\t{r.vertex}\t{r.invoke_ts}\t{r.return_ts}\t{r.returned_level}"
            f"\t{r.mode.value}\t{r.batch_id}\n"
        )


def write_history_path(
    path: Path, batches: Iterable[BatchRecord], reads: Iterable[ReadRecord]
) -> None:
    with path.open("w", encoding="utf-8") as sink:
        write_history(sink, batches, reads)


def _bad(
    line_no: int, reason: str, error: Exception | None = None
) -> HistoryFormatError:
    return HistoryFormatError(
        HistoryFormatError.BAD_RECORD.format(line_no=line_no, reason=reason), error
    )


def read_history(source: Iterable[str]) -> tuple[list[BatchRecord], list[ReadRecord]]:
    """Parse a history file written by ``write_history``.

    Raises:
        HistoryFormatError: On an unknown tag, a wrong field count, a
            non-integer field, an invalid record or a mover without its batch.
    """
    batches: dict[int, BatchRecord] = {}
    reads: list[ReadRecord] = []
    for line_no, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tag, *fields = line.split("\t")
        expected = {"B": _BATCH_FIELDS, "M": _MOVER_FIELDS, "R": _READ_FIELDS}.get(tag)
        if expected is None:
            raise _bad(line_no, f"unknown record tag {tag!r}")
        if len(fields) != expected - 1:
            raise _bad(line_no, f"{tag} record needs {expected - 1} fields")
        try:
            if tag == "B":
                batch_id, kind, begin, end = fields
                batches[int(batch_id)] = BatchRecord(
                    batch_id=int(batch_id),
                    kind=kind,
                    begin_ts=int(begin),
                    end_ts=int(end),
                )
            elif tag == "M":
                batch_id, vertex, old, new, root = (int(x) for x in fields)
                batch = batches.get(batch_id)
                if batch is None:
                    raise HistoryFormatError(
                        HistoryFormatError.UNKNOWN_BATCH.format(batch_id=batch_id)
                    )
                batch.movers.append(
                    MoverRecord(
                        vertex=vertex, old_level=old, new_level=new, dag_root=root
                    )
                )
            else:
                vertex, invoke, ret, level, mode, batch_id = fields
                reads.append(
                    ReadRecord(
                        vertex=int(vertex),
                        invoke_ts=int(invoke),
                        return_ts=int(ret),
                        returned_level=int(level),
                        mode=mode,
                        batch_id=int(batch_id),
                    )
                )
        except (ValueError, ValidationError) as e:
            raise _bad(line_no, str(e).splitlines()[0], e) from e
    return list(batches.values()), reads


def read_history_path(path: Path) -> tuple[list[BatchRecord], list[ReadRecord]]:
    with path.open(encoding="utf-8") as source:
        return read_history(source)
