from collections.abc import Callable

import pytest

from src.concurrency.descriptors import I_AM_ROOT
from src.concurrency.descriptors import UNMARKED
from src.concurrency.descriptors import DagStatus
from src.concurrency.descriptors import DescriptorTable
from src.core.atomics import AtomicCounter
from src.core.atomics import AtomicWordArray
from src.core.exceptions import ContractError
from tests.helpers import insert


def table(
    n: int = 6, checkpoint: Callable[[str], None] | None = None
) -> DescriptorTable:
    return DescriptorTable(n, lambda v: 10 * v, checkpoint)


def chain(t: DescriptorTable) -> None:
    """Leave 2 -> 1 -> 0 as an uncompressed path."""
    for v in (0, 1, 2):
        t.mark(v, [])
    t.merge(1, 2)
    t.merge(0, 1)


def test_batch_numbers_increase_by_one() -> None:
    t = table()

    assert t.begin_batch() == 1
    t.unmark_all()
    assert t.begin_batch() == 2
    assert t.batch_number.load() == 2


def test_begin_twice_without_unmark_is_rejected() -> None:
    t = table()
    t.begin_batch()

    with pytest.raises(ContractError):
        t.begin_batch()


def test_mark_records_the_old_level() -> None:
    t = table()
    t.begin_batch()

    t.mark(3, [])

    d = t.snapshot(3)
    assert d.marked
    assert d.is_root
    assert d.old_level == 30
    assert t.marked_vertices() == [3]


def test_mark_twice_is_rejected() -> None:
    t = table()
    t.begin_batch()
    t.mark(1, [])

    with pytest.raises(ContractError):
        t.mark(1, [])


def test_mark_joins_marked_batch_neighbors() -> None:
    t = table()
    t.begin_batch(insert([(0, 4), (4, 5)]))
    t.mark(5, [])
    t.mark(0, [])

    t.mark(4, [])

    assert t.find(4) == t.find(0) == t.find(5) == 0
    assert t.count_roots() == 1


def test_mark_with_triggers_joins_their_dag() -> None:
    t = table()
    t.begin_batch()
    t.mark(2, [])
    t.mark(3, [])

    t.mark(5, [3, 2])

    assert t.find(5) == t.find(3) == 2


def test_merge_links_smaller_root() -> None:
    t = table()
    t.begin_batch()
    t.mark(4, [])
    t.mark(1, [])

    t.merge(4, 1)

    assert t.desc.load(4) == 1
    assert t.desc.load(1) == I_AM_ROOT


@pytest.mark.parametrize("call", ["merge", "find"])
def test_unmarked_vertex_is_rejected(call: str) -> None:
    t = table()
    t.begin_batch()
    t.mark(0, [])

    with pytest.raises(ContractError):
        if call == "merge":
            t.merge(0, 1)
        else:
            t.find(1)


def test_find_compresses_the_path() -> None:
    t = table()
    t.begin_batch()
    chain(t)
    assert t.desc.load(2) == 1

    assert t.find(2) == 0
    assert t.desc.load(2) == 0


def test_check_dag_compresses_while_marked() -> None:
    t = table()
    t.begin_batch()
    chain(t)

    assert t.check_dag(t.snapshot(2), 2) is DagStatus.MARKED
    assert t.desc.load(2) == 0


def test_check_dag_of_unmarked_descriptor() -> None:
    t = table()

    assert t.check_dag(t.snapshot(0), 0) is DagStatus.UNMARKED


def test_unmark_clears_roots_first() -> None:
    seen: dict[int, DagStatus] = {}

    def checkpoint(name: str) -> None:
        if name == "unmark.between_phases":
            assert t.desc.load(0) == UNMARKED
            for v in (1, 2):
                seen[v] = t.check_dag(t.snapshot(v), v)
                assert t.snapshot(v).marked

    t = table(checkpoint=checkpoint)
    t.begin_batch()
    chain(t)

    t.unmark_all()

    assert seen == {1: DagStatus.UNMARKED, 2: DagStatus.UNMARKED}
    assert all(not t.is_marked(v) for v in range(6))
    assert t.marked_vertices() == []


def test_same_dag_violations_reports_split_endpoints() -> None:
    t = table()
    batch = insert([(0, 1), (2, 3)])
    t.begin_batch(batch)
    for v in (0, 1, 2, 3):
        t.mark(v, [])
    assert t.same_dag_violations(batch) == []
    t.unmark_all()

    # marked without the batch adjacency, so 0 and 1 stay apart
    t.begin_batch()
    t.mark(0, [])
    t.mark(1, [])
    t.mark(2, [])

    assert t.same_dag_violations(batch) == [(0, 1)]


def test_guarded_compare_and_set() -> None:
    words = AtomicWordArray(4, 7)

    assert not words.try_compare_and_set(1, 7, 9, lambda: False)
    assert words.load(1) == 7
    assert not words.try_compare_and_set(1, 8, 9)
    assert words.try_compare_and_set(1, 7, 9, lambda: True)
    assert words.load(1) == 9
    assert words.compare_and_set(1, 9, 3)
    assert not words.compare_and_set(1, 9, 4)
    assert words.snapshot() == [7, 3, 7, 7]


def test_counter_increments() -> None:
    counter = AtomicCounter()

    assert [counter.increment() for _ in range(3)] == [1, 2, 3]
    assert counter.load() == 3
