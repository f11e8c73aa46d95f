# src/bench/metrics.py
"""Latency percentiles, per-phase aggregation and the CSV report."""

import csv
import math
from collections.abc import Sequence
from typing import TextIO

import numpy as np
from numpy.typing import ArrayLike

from src.core.exceptions import WorkloadError
from src.models.bench import CSV_COLUMNS
from src.models.bench import TIMING_COLUMNS
from src.models.bench import MetricsReport
from src.models.bench import PhaseMetrics

NS_PER_MS = 1_000_000
NS_PER_S = 1_000_000_000


def percentile(samples: ArrayLike, q: float) -> float:
    """Nearest-rank percentile: the ``ceil(q * N)``-th smallest sample.

    Raises:
        WorkloadError: If ``samples`` is empty or ``q`` is not in (0, 1).
    """
    if not 0 < q < 1:
        raise WorkloadError(WorkloadError.BAD_QUANTILE.format(q=q))
    values = np.asarray(samples)
    if values.size == 0:
        raise WorkloadError(WorkloadError.EMPTY_SAMPLES)
    rank = max(1, math.ceil(q * values.size))
    return values[np.argpartition(values, rank - 1)[rank - 1]].item()


class PhaseSamples:
    """Raw per-phase observations, merged from all threads after a run."""

    def __init__(self) -> None:
        self.latencies: list[int] = []
        self.errors: list[float] = []
        self.update_ns: list[int] = []
        self.edges = 0
        self.bounds: list[float] = []

    def summarize(self, base: PhaseMetrics) -> PhaseMetrics:
        """Fill ``base`` with statistics of the collected samples."""
        stats = base.model_dump()
        reads = len(self.latencies)
        update_total = sum(self.update_ns)
        if reads:
            lat = np.asarray(self.latencies, dtype=np.int64)
            stats["mean_ns"] = float(lat.mean())
            stats["mean_ns_max"] = stats["mean_ns"]
            stats["p99_ns"] = int(percentile(lat, 0.99))
            stats["p9999_ns"] = int(percentile(lat, 0.9999))
        if self.errors:
            err = np.asarray(self.errors, dtype=np.float64)
            stats["err_mean"] = float(err.mean())
            stats["err_max"] = float(err.max())
        if self.update_ns:
            upd = np.asarray(self.update_ns, dtype=np.int64)
            stats["upd_mean_ms"] = float(upd.mean()) / NS_PER_MS
            stats["upd_mean_ms_max"] = stats["upd_mean_ms"]
            stats["upd_max_ms"] = float(upd.max()) / NS_PER_MS
        if update_total > 0:
            seconds = update_total / NS_PER_S
            stats["read_tput"] = reads / seconds
            stats["write_tput"] = self.edges / seconds
        stats["reads"] = reads
        stats["batches"] = len(self.update_ns)
        stats["bound_max"] = max(self.bounds, default=1.0)
        return PhaseMetrics(**stats)


_TRIAL_MEAN = ("mean_ns", "read_tput", "upd_mean_ms", "err_mean", "write_tput")
_TRIAL_MAX = (
    "p99_ns",
    "p9999_ns",
    "upd_max_ms",
    "err_max",
    "bound_max",
    "mean_ns_max",
    "upd_mean_ms_max",
)


def combine_trials(trials: Sequence[Sequence[PhaseMetrics]]) -> list[PhaseMetrics]:
    """One row per phase over repeated runs of the same configuration."""
    by_phase: dict[str, list[PhaseMetrics]] = {}
    for rows in trials:
        for row in rows:
            by_phase.setdefault(row.phase, []).append(row)

    combined: list[PhaseMetrics] = []
    for rows in by_phase.values():
        stats = rows[0].model_dump()
        for column in _TRIAL_MEAN:
            stats[column] = float(np.mean([getattr(row, column) for row in rows]))
        for column in _TRIAL_MAX:
            stats[column] = max(getattr(row, column) for row in rows)
        stats["reads"] = round(float(np.mean([row.reads for row in rows])))
        stats["trials"] = len(rows)
        combined.append(PhaseMetrics(**stats))
    return combined


def _cell(value: object) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def write_csv(
    sink: TextIO, rows: Sequence[PhaseMetrics], *, header: bool = True
) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    if header:
        writer.writerow(CSV_COLUMNS)
    for row in rows:
        data = row.model_dump()
        writer.writerow([_cell(data[column]) for column in CSV_COLUMNS])


def deterministic_view(report: MetricsReport) -> list[dict[str, object]]:
    """Rows with timing-dependent columns removed, for replay comparisons."""
    return [
        {k: v for k, v in row.model_dump().items() if k not in TIMING_COLUMNS}
        for row in report.rows
    ]
