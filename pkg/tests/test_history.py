from io import StringIO

import pytest

from src.core.exceptions import HistoryFormatError
from src.models.history import BatchRecord
from src.models.history import MoverRecord
from src.models.history import ReadMode
from src.models.history import ReadRecord
from src.oracle.history import check_history
from src.oracle.history import read_history
from src.oracle.history import write_history


def mover(v: int, old: int, new: int, root: int) -> MoverRecord:
    return MoverRecord(vertex=v, old_level=old, new_level=new, dag_root=root)


def read(v: int, invoke: int, ret: int, level: int) -> ReadRecord:
    return ReadRecord(
        vertex=v,
        invoke_ts=invoke,
        return_ts=ret,
        returned_level=level,
        mode=ReadMode.CPLDS,
    )


@pytest.fixture
def batches() -> list[BatchRecord]:
    return [
        BatchRecord(
            batch_id=1,
            kind="insert",
            begin_ts=10,
            end_ts=20,
            movers=[mover(0, 0, 3, 0), mover(1, 0, 3, 0), mover(2, 0, 2, 2)],
        ),
        BatchRecord(
            batch_id=2,
            kind="insert",
            begin_ts=30,
            end_ts=40,
            movers=[mover(0, 3, 5, 0)],
        ),
    ]


def test_boundary_levels_pass(batches: list[BatchRecord]) -> None:
    reads = [
        read(0, 1, 5, 0),
        read(0, 12, 15, 3),
        read(1, 16, 18, 3),
        read(0, 22, 25, 3),
        read(0, 15, 35, 5),
        read(0, 15, 35, 0),
        read(0, 45, 50, 5),
        read(3, 12, 50, 0),
    ]

    assert check_history(batches, reads) == []


@pytest.mark.parametrize(
    ("record", "batch_id"),
    [
        (read(0, 1, 5, 3), None),
        (read(0, 12, 15, 2), 1),
        (read(0, 22, 25, 0), None),
        (read(0, 32, 35, 0), 2),
        (read(4, 12, 15, 1), 1),
    ],
)
def test_boundary_violation(
    batches: list[BatchRecord], record: ReadRecord, batch_id: int | None
) -> None:
    violations = check_history(batches, [record])

    assert len(violations) == 1
    assert violations[0].kind == "boundary"
    assert violations[0].vertex == record.vertex
    assert violations[0].batch_id == batch_id


def test_old_level_after_new_level_of_same_dag(batches: list[BatchRecord]) -> None:
    reads = [read(0, 12, 15, 3), read(1, 16, 18, 0)]

    violations = check_history(batches, reads)

    assert [(v.kind, v.vertex, v.batch_id) for v in violations] == [
        ("dag_inversion", 1, 1)
    ]


def test_overlapping_reads_are_not_an_inversion(batches: list[BatchRecord]) -> None:
    reads = [read(0, 12, 15, 3), read(1, 14, 18, 0)]

    assert check_history(batches, reads) == []


def test_other_dag_may_still_be_old(batches: list[BatchRecord]) -> None:
    reads = [read(0, 12, 15, 3), read(2, 16, 18, 0)]

    assert check_history(batches, reads) == []


def test_empty_history() -> None:
    assert check_history([], []) == []
    assert check_history([], [read(0, 1, 2, 0)]) == []
    assert [v.kind for v in check_history([], [read(0, 1, 2, 4)])] == ["boundary"]


def test_overlapping_batches_are_rejected() -> None:
    batches = [
        BatchRecord(batch_id=1, kind="insert", begin_ts=10, end_ts=20),
        BatchRecord(batch_id=2, kind="delete", begin_ts=15, end_ts=30),
    ]

    with pytest.raises(HistoryFormatError):
        check_history(batches, [])


def test_codec_preserves_records(batches: list[BatchRecord]) -> None:
    reads = [read(0, 12, 15, 3), read(1, 16, 18, 0)]
    sink = StringIO()

    write_history(sink, batches, reads)
    parsed_batches, parsed_reads = read_history(StringIO(sink.getvalue()))

    assert parsed_batches == batches
    assert parsed_reads == reads


@pytest.mark.parametrize(
    "text",
    [
        "X\t1\n",
        "B\t1\tinsert\t5\n",
        "B\t1\tinsert\tfive\t9\n",
        "B\t1\tupsert\t5\t9\n",
        "R\t0\t10\t5\t0\tcplds\t0\n",
        "R\t0\t1\t5\t0\tlazy\t0\n",
        "M\t9\t0\t0\t1\t0\n",
        "B\t1\tinsert\t5\t9\nM\t1\t0\t2\t2\t0\n",
    ],
)
def test_malformed_history(text: str) -> None:
    with pytest.raises(HistoryFormatError):
        read_history(StringIO(text))


def test_comments_and_blank_lines_are_skipped() -> None:
    batches, reads = read_history(StringIO("# header\n\n"))

    assert batches == []
    assert reads == []
