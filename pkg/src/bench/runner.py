# src/bench/runner.py
"""Benchmark driver: one update thread, reader threads, three read modes."""

import threading
import time
from bisect import bisect_left
from bisect import bisect_right
from collections.abc import Callable
from collections.abc import Iterable
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
import structlog
from pydantic import BaseModel
from pydantic import Field

from src.bench.metrics import PhaseSamples
from src.bench.metrics import combine_trials
from src.bench.workload import adversarial_climb
from src.bench.workload import gen_workload
from src.bench.workload import gnp_stream
from src.concurrency.cplds import ConcurrentLDS
from src.core.exceptions import WorkloadError
from src.graph.loader import load_edge_list_path
from src.graph.store import Graph
from src.graph.store import apply_batch
from src.graph.store import normalize_batch
from src.lds.levels import Thresholds
from src.lds.levels import make_params
from src.models.batch import BatchKind
from src.models.batch import EdgeBatch
from src.models.bench import Phase
from src.models.bench import PhaseMetrics
from src.models.bench import RunConfig
from src.models.history import BatchRecord
from src.models.history import ReadMode
from src.models.history import ReadRecord
from src.oracle.audit import check_bound
from src.oracle.audit import read_error
from src.oracle.peeling import exact_coreness

logger = structlog.get_logger(__name__)

clock = time.perf_counter_ns

_READ_BLOCK = 256


class Workload(NamedTuple):
    n: int
    batches: list[EdgeBatch]
    inserts: int


class ReadSample(NamedTuple):
    vertex: int
    invoke_ts: int
    return_ts: int
    level: int
    batch_id: int


class RunResult(BaseModel):
    """Everything one run observed; ``rows`` is its part of the CSV report."""

    config: RunConfig
    rows: list[PhaseMetrics] = Field(default_factory=list)
    batches: list[BatchRecord] = Field(default_factory=list)
    reads: list[ReadRecord] = Field(
        default_factory=list, description="Filled only when recording"
    )
    read_count: int = 0
    final_levels: list[int] = Field(default_factory=list)
    final_edges: int = 0
    batch_edges: list[int] = Field(default_factory=list)
    update_ns: list[int] = Field(default_factory=list)
    truths: dict[int, list[int]] = Field(
        default_factory=dict, description="Exact coreness after batch i; -1 = start"
    )
    snapshots: dict[int, list[int]] = Field(
        default_factory=dict, description="Levels after batch i, where sampled"
    )
    partial: bool = False


def build_workload(cfg: RunConfig) -> Workload:
    """Insert batches (climb first, then the stream) and mirrored deletes.

    Raises:
        WorkloadError: If neither the stream nor the climb yields an edge.
    """
    if cfg.graph_path is not None:
        graph, stream = load_edge_list_path(cfg.graph_path)
        n = graph.n
    else:
        n = cfg.gnp_n
        stream = gnp_stream(n, cfg.gnp_p, cfg.seed)

    inserts: list[EdgeBatch] = []
    if cfg.climb_core:
        if cfg.climb_core > n:
            raise WorkloadError(
                WorkloadError.NOT_POSITIVE.format(
                    field="vertex room for the climb", value=n - cfg.climb_core
                )
            )
        inserts.extend(
            EdgeBatch.model_construct(kind=BatchKind.INSERT, edges=part, dropped=0)
            for part in adversarial_climb(cfg.climb_core, cfg.climb_steps, cfg.seed)
        )
    if stream:
        inserts.extend(gen_workload(stream, cfg.batch_size, mirror_delete=False))
    if not inserts:
        raise WorkloadError(WorkloadError.EMPTY_STREAM)

    batches = list(inserts)
    if cfg.delete_phase:
        batches.extend(batch.mirrored() for batch in reversed(inserts))
    return Workload(max(n, 2), batches, len(inserts))


class _Deferred:
    __slots__ = ("done", "finished", "level", "vertex")

    def __init__(self, vertex: int) -> None:
        self.vertex = vertex
        self.level = 0
        self.finished = 0
        self.done = threading.Event()


class SyncGate:
    """Read queue of the synchronous baseline.

    While a batch runs, reads are queued; ``drain`` executes them in arrival
    order against the settled levels. Outside batches reads run directly.
    """

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._active = False
        self._pending: list[_Deferred] = []

    def begin(self) -> None:
        with self._cond:
            self._active = True

    def submit(self, vertex: int, read: Callable[[int], int]) -> tuple[int, int]:
        """Level of ``vertex`` and the completion timestamp."""
        with self._cond:
            if not self._active:
                return read(vertex), clock()
            slot = _Deferred(vertex)
            self._pending.append(slot)
        slot.done.wait()
        return slot.level, slot.finished

    def drain(self, read: Callable[[int], int]) -> int:
        with self._cond:
            pending, self._pending = self._pending, []
            for slot in pending:
                slot.level = read(slot.vertex)
                slot.finished = clock()
                slot.done.set()
            self._active = False
        return len(pending)


def _reader(
    lds: ConcurrentLDS,
    gate: SyncGate | None,
    rng: np.random.Generator,
    stop: threading.Event,
    log: list[ReadSample],
) -> None:
    n = lds.graph.n
    batch_number = lds.table.batch_number
    mode = lds.mode
    while not stop.is_set():
        for v in rng.integers(0, n, size=_READ_BLOCK).tolist():
            seen = batch_number.load()
            invoke = clock()
            if mode is ReadMode.CPLDS:
                level = lds.read_level(v)
                finished = clock()
            elif gate is None:
                level = lds.get_level(v)
                finished = clock()
            else:
                level, finished = gate.submit(v, lds.get_level)
            log.append(ReadSample(v, invoke, max(finished, invoke + 1), level, seen))


def _replay_truths(
    n: int, batches: Sequence[EdgeBatch], sampled: set[int]
) -> dict[int, list[int]]:
    """Exact coreness at the sampled boundaries, replayed on a private graph."""
    graph = Graph(n)
    truths = {-1: [0] * n}
    for i, raw in enumerate(batches):
        apply_batch(graph, normalize_batch(graph, raw))
        if i in sampled:
            truths[i] = exact_coreness(graph)
    return truths


def aggregate(
    cfg: RunConfig,
    inserts: int,
    batches: Sequence[BatchRecord],
    update_ns: Sequence[int],
    batch_edges: Sequence[int],
    reads: Iterable[ReadSample],
    truths: dict[int, list[int]],
    snapshots: dict[int, list[int]],
    estimates: Sequence[float],
    factor: float,
) -> list[PhaseMetrics]:
    """Report rows from batch timings, read samples and ground truth.

    One row covers the whole run unless ``cfg.per_phase`` asks for separate
    insert and delete rows.

    A read is scored against the exact coreness at every boundary of the
    batches it overlaps (or the one boundary it falls after) and keeps the
    smallest ratio. Reads missing a sampled boundary are not scored.
    """
    phases: list[tuple[Phase, PhaseSamples]] = (
        [("insert", PhaseSamples()), ("delete", PhaseSamples())]
        if cfg.per_phase
        else [("all", PhaseSamples())]
    )
    count = len(batches)

    def phase_of(index: int) -> PhaseSamples:
        return phases[0][1] if index < inserts else phases[-1][1]

    for i in range(count):
        samples = phase_of(i)
        samples.update_ns.append(update_ns[i])
        samples.edges += batch_edges[i]
        if i in snapshots and i in truths:
            levels = snapshots[i]
            samples.bounds.append(
                check_bound(
                    [estimates[level] for level in levels], truths[i], factor
                ).max_ratio
            )

    begins = [b.begin_ts for b in batches]
    ends = [b.end_ts for b in batches]
    for read in sorted(reads):
        first = bisect_right(ends, read.invoke_ts)
        last = max(bisect_left(begins, read.return_ts) - 1, first - 1)
        samples = phase_of(min(first, count - 1)) if count else phases[0][1]
        samples.latencies.append(read.return_ts - read.invoke_ts)
        estimate = estimates[read.level]
        # boundaries first-1 .. last are the states the read may have seen
        seen = [truths.get(j) for j in range(first - 1, last + 1)]
        if any(truth is None for truth in seen):
            continue
        samples.errors.append(
            min(read_error(estimate, truth[read.vertex]) for truth in seen if truth)
        )

    rows: list[PhaseMetrics] = []
    for phase, samples in phases:
        if not samples.update_ns:
            continue
        base = PhaseMetrics(
            mode=cfg.mode,
            batch_size=cfg.batch_size,
            workers=cfg.update_workers,
            readers=cfg.reader_threads,
            phase=phase,
        )
        rows.append(samples.summarize(base))
    return rows


def run(cfg: RunConfig) -> RunResult:
    """Execute one configured run and score it.

    The update thread applies batches back to back while reader threads issue
    uniform random reads in ``cfg.mode`` until the last batch is done.
    """
    workload = build_workload(cfg)
    n = workload.n
    params = make_params(n, cfg.delta, cfg.lam)
    run_logger = logger.bind(
        mode=cfg.mode.value, n=n, batches=len(workload.batches), seed=cfg.seed
    )
    run_logger.info(
        "Run started", batch_size=cfg.batch_size, readers=cfg.reader_threads
    )

    last = len(workload.batches) - 1
    sampled = {
        i for i in range(last + 1) if (i + 1) % cfg.truth_every == 0 or i == last
    }
    gate = SyncGate() if cfg.mode is ReadMode.SYNC else None
    stop = threading.Event()
    logs: list[list[ReadSample]] = [[] for _ in range(cfg.reader_threads)]
    failures: list[BaseException] = []

    def reader_main(index: int) -> None:
        rng = np.random.default_rng([cfg.seed, index + 1])
        try:
            _reader(lds, gate, rng, stop, logs[index])
        except Exception as e:
            run_logger.exception("Reader failed", reader=index)
            failures.append(e)

    records: list[BatchRecord] = []
    update_ns: list[int] = []
    batch_edges: list[int] = []
    snapshots: dict[int, list[int]] = {}
    partial = False

    with ConcurrentLDS(
        Graph(n), params, mode=cfg.mode, workers=cfg.update_workers
    ) as lds:
        threads = [
            threading.Thread(target=reader_main, args=(i,), name=f"reader-{i}")
            for i in range(cfg.reader_threads)
        ]
        for thread in threads:
            thread.start()
        try:
            for i, raw in enumerate(workload.batches):
                begin = clock()
                if gate is not None:
                    gate.begin()
                outcome = lds.apply(raw)
                if gate is not None:
                    gate.drain(lds.get_level)
                end = max(clock(), begin + 1)
                update_ns.append(end - begin)
                batch_edges.append(outcome.edges)
                records.append(
                    BatchRecord(
                        batch_id=outcome.batch_id,
                        kind=outcome.kind.value,
                        begin_ts=begin,
                        end_ts=end,
                        movers=outcome.movers,
                    )
                )
                if i in sampled:
                    snapshots[i] = lds.levels()
        except Exception:
            partial = True
            run_logger.exception("Update thread failed", completed=len(records))
        finally:
            stop.set()
            if gate is not None:
                gate.drain(lds.get_level)
            for thread in threads:
                thread.join()
        final_levels = lds.levels()
        final_edges = lds.graph.m
        estimates = lds.state.thresholds.estimate

    partial = partial or bool(failures)
    truths = _replay_truths(n, workload.batches[: len(records)], sampled)
    samples = [sample for log in logs for sample in log]
    rows = aggregate(
        cfg,
        workload.inserts,
        records,
        update_ns,
        batch_edges,
        samples,
        truths,
        snapshots,
        estimates,
        params.theoretical_factor,
    )
    reads = (
        [
            ReadRecord.model_construct(
                vertex=s.vertex,
                invoke_ts=s.invoke_ts,
                return_ts=s.return_ts,
                returned_level=s.level,
                mode=cfg.mode,
                batch_id=s.batch_id,
            )
            for s in sorted(samples)
        ]
        if cfg.record
        else []
    )
    run_logger.info(
        "Run finished",
        reads=len(samples),
        partial=partial,
        rows=[row.model_dump(include={"phase", "mean_ns", "err_max"}) for row in rows],
    )
    return RunResult(
        config=cfg,
        rows=rows,
        batches=records if cfg.record else [],
        reads=reads,
        read_count=len(samples),
        final_levels=final_levels,
        final_edges=final_edges,
        batch_edges=batch_edges,
        update_ns=update_ns,
        truths=truths,
        snapshots=snapshots,
        partial=partial,
    )


def rescore(result: RunResult) -> list[PhaseMetrics]:
    """Recompute the report rows of a recorded run from its history."""
    cfg = result.config
    workload = build_workload(cfg)
    params = make_params(workload.n, cfg.delta, cfg.lam)
    estimates = Thresholds(params).estimate
    samples = [
        ReadSample(r.vertex, r.invoke_ts, r.return_ts, r.returned_level, r.batch_id)
        for r in result.reads
    ]
    return aggregate(
        cfg,
        workload.inserts,
        result.batches,
        result.update_ns,
        result.batch_edges,
        samples,
        result.truths,
        result.snapshots,
        estimates,
        params.theoretical_factor,
    )


def run_trials(cfg: RunConfig) -> RunResult:
    """Repeat ``run`` ``cfg.trials`` times on the same seed.

    The rows are combined across trials; everything else, the recorded
    history included, comes from the last trial.
    """
    results = [run(cfg) for _ in range(cfg.trials)]
    last = results[-1]
    if cfg.trials == 1:
        return last
    return last.model_copy(
        update={
            "rows": combine_trials([result.rows for result in results]),
            "partial": any(result.partial for result in results),
        }
    )
