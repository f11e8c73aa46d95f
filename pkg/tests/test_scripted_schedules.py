"""Reads placed at chosen points inside a batch, checked by both oracles.

The updater itself performs the scripted reads when it reaches a checkpoint,
so every interleaving is reproducible. A logical clock stamps batches and
reads in the order they happen.
"""

import itertools

import pytest

from src.concurrency.cplds import ConcurrentLDS
from src.graph.store import Graph
from src.lds.levels import make_params
from src.models.batch import EdgeBatch
from src.models.history import BatchRecord
from src.models.history import ReadMode
from src.models.history import ReadRecord
from src.oracle.history import check_history
from src.oracle.linearize import linearizable
from tests.helpers import clique
from tests.helpers import delete
from tests.helpers import insert

Script = dict[tuple[int, str], list[int]]


class ScriptedRun:
    def __init__(self, n: int, mode: ReadMode, script: Script) -> None:
        self.mode = mode
        self.script = dict(script)
        self.clock = itertools.count(1)
        self.batch = 0
        self.busy = False
        self.batches: list[BatchRecord] = []
        self.reads: list[ReadRecord] = []
        self.lds = ConcurrentLDS(
            Graph(n), make_params(n, 0.2, 9.0), mode=mode, checkpoint=self.on_point
        )

    def read(self, v: int) -> None:
        invoke = next(self.clock)
        if self.mode is ReadMode.CPLDS:
            level = self.lds.read_level(v)
        else:
            level = self.lds.get_level(v)
        self.reads.append(
            ReadRecord(
                vertex=v,
                invoke_ts=invoke,
                return_ts=next(self.clock),
                returned_level=level,
                mode=self.mode,
                batch_id=self.batch,
            )
        )

    def on_point(self, name: str) -> None:
        # reads scripted at read.* points run nested inside an earlier read
        if self.busy and not name.startswith("read."):
            return
        vertices = self.script.pop((self.batch, name), [])
        outer, self.busy = self.busy, True
        try:
            for v in vertices:
                self.read(v)
        finally:
            self.busy = outer

    def apply(self, raw: EdgeBatch) -> None:
        self.batch += 1
        begin = next(self.clock)
        outcome = self.lds.apply(raw)
        self.batches.append(
            BatchRecord(
                batch_id=outcome.batch_id,
                kind=outcome.kind.value,
                begin_ts=begin,
                end_ts=next(self.clock),
                movers=outcome.movers,
            )
        )

    def run(self, *batches: EdgeBatch) -> "ScriptedRun":
        with self.lds:
            for raw in batches:
                self.apply(raw)
        return self


SCHEDULES: dict[str, tuple[int, list[EdgeBatch], Script]] = {
    "clique insert": (
        5,
        [insert(clique(range(5)))],
        {
            (1, "step.marked"): [0],
            (1, "step.moved"): [1, 2],
            (1, "unmark.before"): [3],
            (1, "unmark.between_phases"): [4, 0],
            (1, "unmark.after"): [1],
        },
    ),
    "clique insert then delete": (
        5,
        [insert(clique(range(5))), delete(clique(range(5)))],
        {
            (1, "unmark.before"): [0],
            (2, "step.marked"): [1],
            (2, "step.moved"): [2, 3],
            (2, "unmark.between_phases"): [4, 2],
            (2, "unmark.after"): [3],
        },
    ),
    "two independent cliques": (
        8,
        [insert([*clique(range(4)), *clique(range(4, 8))])],
        {
            (1, "step.moved"): [0, 4],
            (1, "unmark.between_phases"): [5, 1, 6],
            (1, "unmark.after"): [7],
        },
    ),
}


@pytest.mark.parametrize("name", sorted(SCHEDULES))
def test_descriptor_reads_linearize(name: str) -> None:
    n, batches, script = SCHEDULES[name]

    run = ScriptedRun(n, ReadMode.CPLDS, script).run(*batches)

    assert run.reads
    assert check_history(run.batches, run.reads) == []
    result = linearizable(run.batches, run.reads)
    assert result.ok, result


def test_mid_batch_reads_return_old_levels() -> None:
    script: Script = {(1, "step.moved"): [0, 1, 2, 3, 4]}

    run = ScriptedRun(5, ReadMode.CPLDS, script).run(insert(clique(range(5))))

    assert [r.returned_level for r in run.reads] == [0] * 5


def test_unsynchronized_read_exposes_an_intermediate_level() -> None:
    script: Script = {(1, "step.moved"): [0]}

    run = ScriptedRun(5, ReadMode.NONSYNC, script).run(insert(clique(range(5))))

    assert run.reads[0].returned_level == 1
    violations = check_history(run.batches, run.reads)
    assert [v.kind for v in violations] == ["boundary"]
    assert not linearizable(run.batches, run.reads).ok


UPDATE_POINTS = (
    "step.marked",
    "step.moved",
    "unmark.before",
    "unmark.between_phases",
    "unmark.after",
)
READ_POINTS = ("read.after_b1", "read.after_check")

Placement = tuple[int, str, int]


def placements(n: int, points: tuple[str, ...]) -> list[Placement]:
    return [(b, p, v) for b in (1, 2) for p in points for v in range(n)]


def script_of(*where: Placement) -> Script:
    script: Script = {}
    for batch, point, v in where:
        script.setdefault((batch, point), []).append(v)
    return script


def insert_then_delete(n: int) -> list[EdgeBatch]:
    return [insert(clique(range(n))), delete(clique(range(n)))]


def assert_linearizable(n: int, where: tuple[Placement, ...]) -> None:
    run = ScriptedRun(n, ReadMode.CPLDS, script_of(*where)).run(
        *insert_then_delete(n)
    )

    assert len(run.reads) == len(where), where
    assert check_history(run.batches, run.reads) == [], where
    result = linearizable(run.batches, run.reads)
    assert result.ok, (where, result)


@pytest.mark.parametrize("where", placements(5, UPDATE_POINTS))
def test_every_single_read_placement(where: Placement) -> None:
    assert_linearizable(5, (where,))


def test_every_pair_of_read_placements() -> None:
    singles = placements(4, UPDATE_POINTS)
    pairs = list(itertools.combinations_with_replacement(singles, 2))
    pairs += [
        (outer, nested)
        for outer in singles
        for nested in placements(4, READ_POINTS)
        if nested[0] == outer[0]
    ]

    for where in pairs:
        assert_linearizable(4, where)
