# src/models/bench.py
from pathlib import Path
from typing import Literal
from typing import Self

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import model_validator

from src.models.history import ReadMode

ModeChoice = Literal["cplds", "sync", "nonsync", "all"]
Phase = Literal["all", "insert", "delete"]


class RunConfig(BaseModel):
    """One benchmark run: a workload, a read mode and the thread layout.

    The graph comes from ``graph_path`` when given, otherwise from a seeded
    G(n, p) stream over ``gnp_n`` vertices. ``climb_core`` prepends an
    adversarial clique climb over the first ``climb_core`` vertices.
    """

    model_config = ConfigDict(frozen=True)

    graph_path: Path | None = None
    gnp_n: int = Field(default=1000, ge=2)
    gnp_p: float = Field(default=0.01, gt=0, le=1)
    climb_core: int = Field(default=0, ge=0, description="0 disables the climb")
    climb_steps: int = Field(default=1, ge=1)
    batch_size: int = Field(default=10_000, ge=1)
    update_workers: int = Field(default=2, ge=1)
    reader_threads: int = Field(default=1, ge=1)
    mode: ReadMode = ReadMode.CPLDS
    delta: float = Field(default=0.2, gt=0)
    lam: float = Field(default=9.0, gt=0)
    seed: int = Field(default=0, ge=0)
    delete_phase: bool = Field(
        default=True, description="Replay the insert batches in reverse as deletes"
    )
    record: bool = Field(default=False, description="Keep full read/batch history")
    per_phase: bool = Field(
        default=False, description="Separate rows for insert and delete phases"
    )
    trials: int = Field(default=1, ge=1, description="Repeats on the same seed")
    truth_every: int = Field(
        default=1, ge=1, description="Take ground truth at every j-th batch boundary"
    )

    @model_validator(mode="after")
    def _climb_fits(self) -> Self:
        if 0 < self.climb_core < 3:  # noqa: PLR2004
            message = f"climb_core must be 0 or >= 3, got {self.climb_core}"
            raise ValueError(message)
        if self.graph_path is None and self.climb_core > self.gnp_n:
            message = f"climb_core {self.climb_core} exceeds gnp_n {self.gnp_n}"
            raise ValueError(message)
        return self


class PhaseMetrics(BaseModel):
    """One CSV row: the metrics of one run, or of one phase with ``per_phase``.

    Over several trials the mean-like columns are averaged, the worst-case
    columns keep their maximum and the ``*_max`` companions keep the slowest
    trial's mean.
    """

    mode: ReadMode
    batch_size: int
    workers: int
    readers: int
    mean_ns: float = 0.0
    p99_ns: int = 0
    p9999_ns: int = 0
    read_tput: float = Field(default=0.0, description="Reads per second of update time")
    upd_mean_ms: float = 0.0
    upd_max_ms: float = 0.0
    err_mean: float = 0.0
    err_max: float = 0.0
    phase: Phase = "all"
    reads: int = 0
    batches: int = 0
    write_tput: float = Field(
        default=0.0, description="Edges per second of update time"
    )
    bound_max: float = Field(default=1.0, description="Worst boundary ratio")
    trials: int = Field(default=1, ge=1)
    mean_ns_max: float = Field(default=0.0, description="Slowest trial's mean_ns")
    upd_mean_ms_max: float = Field(
        default=0.0, description="Slowest trial's upd_mean_ms"
    )

    @model_validator(mode="after")
    def _ordered_tail(self) -> Self:
        if self.p99_ns > self.p9999_ns:
            message = f"p99 {self.p99_ns} > p99.99 {self.p9999_ns}"
            raise ValueError(message)
        return self


CSV_COLUMNS: tuple[str, ...] = tuple(PhaseMetrics.model_fields)
TIMING_COLUMNS: frozenset[str] = frozenset(
    {
        "mean_ns",
        "p99_ns",
        "p9999_ns",
        "read_tput",
        "upd_mean_ms",
        "upd_max_ms",
        "err_mean",
        "err_max",
        "reads",
        "write_tput",
        "mean_ns_max",
        "upd_mean_ms_max",
    }
)


class MetricsReport(BaseModel):
    """Rows of one ``bench`` invocation."""

    rows: list[PhaseMetrics] = Field(default_factory=list)
    partial: bool = Field(default=False, description="A run failed before finishing")


class CliConfig(BaseModel):
    """Validated command-line flags shared by the subcommands."""

    model_config = ConfigDict(frozen=True)

    subcommand: Literal["ingest", "bench", "exact", "audit", "lincheck"]
    graph: Path | None = None
    delta: float = Field(default=0.2, gt=0)
    lam: float = Field(default=9.0, gt=0)
    batch_sizes: list[int] = Field(default_factory=lambda: [10_000], min_length=1)
    update_threads: int = Field(default=2, ge=1)
    read_threads: int = Field(default=1, ge=1)
    mode: ModeChoice = "cplds"
    seed: int = Field(default=0, ge=0)
    output: Path | None = None
    record: bool = False
    per_phase: bool = False
    trials: int = Field(default=1, ge=1)
    gnp_n: int = Field(default=1000, ge=2)
    gnp_p: float = Field(default=0.01, gt=0, le=1)
    climb_core: int = Field(default=0, ge=0)
    delete_phase: bool = True
    truth_every: int = Field(default=1, ge=1)
    histogram: bool = False
    history: Path | None = None
    inject_fault: int | None = Field(
        default=None, ge=1, description="Corrupt one level after this batch"
    )

    @model_validator(mode="after")
    def _consistent_flags(self) -> Self:
        bad = [size for size in self.batch_sizes if size < 1]
        if bad:
            message = f"batch sizes must be positive, got {bad}"
            raise ValueError(message)
        if self.subcommand == "bench" and self.record and self.history is None:
            message = "--record needs --history"
            raise ValueError(message)
        return self

    def modes(self) -> list[ReadMode]:
        if self.mode == "all":
            return [ReadMode.CPLDS, ReadMode.SYNC, ReadMode.NONSYNC]
        return [ReadMode(self.mode)]

    def run_config(self, batch_size: int, mode: ReadMode) -> RunConfig:
        return RunConfig(
            graph_path=self.graph,
            gnp_n=self.gnp_n,
            gnp_p=self.gnp_p,
            climb_core=self.climb_core,
            batch_size=batch_size,
            update_workers=self.update_threads,
            reader_threads=self.read_threads,
            mode=mode,
            delta=self.delta,
            lam=self.lam,
            seed=self.seed,
            delete_phase=self.delete_phase,
            record=self.record,
            per_phase=self.per_phase,
            trials=self.trials,
            truth_every=self.truth_every,
        )
