"""Command-line entry point: ingest, bench, exact, audit and lincheck.

Exit codes: 0 success, 1 violations or a failed run, 2 I/O, parse or history
format errors, 64 invalid flags.
"""

import argparse
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn
from typing import TextIO

from pydantic import ValidationError

from src.bench.metrics import write_csv
from src.bench.runner import RunResult
from src.bench.runner import build_workload
from src.bench.runner import run
from src.bench.runner import run_trials
from src.concurrency.cplds import ConcurrentLDS
from src.core.config import Settings
from src.core.exceptions import ApplicationError
from src.core.exceptions import ConfigError
from src.core.exceptions import ContractError
from src.core.exceptions import GraphParseError
from src.core.exceptions import HistoryFormatError
from src.core.exceptions import WorkloadError
from src.core.logging import configure_logging
from src.core.logging import get_logger
from src.graph.loader import load_edge_list_path
from src.graph.loader import scan_edge_list_path
from src.graph.store import Graph
from src.graph.store import apply_batch
from src.graph.store import normalize_batch
from src.lds.levels import make_params
from src.models.batch import BatchKind
from src.models.batch import EdgeBatch
from src.models.bench import CliConfig
from src.models.history import BatchRecord
from src.models.history import ReadRecord
from src.oracle.audit import audit_lds
from src.oracle.audit import check_bound
from src.oracle.history import check_history
from src.oracle.history import read_history_path
from src.oracle.history import write_history_path
from src.oracle.peeling import coreness_histogram
from src.oracle.peeling import exact_coreness

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_IO = 2
EXIT_USAGE = 64

logger = get_logger(__name__)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cplds", description=__doc__)
    commands = parser.add_subparsers(dest="subcommand", required=True)

    def graph_flags(sub: argparse.ArgumentParser, *, required: bool) -> None:
        sub.add_argument("--graph", type=Path, required=required, help="SNAP edge list")

    def workload_flags(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--delta", type=float, default=0.2)
        sub.add_argument("--lambda", dest="lam", type=float, default=9.0)
        sub.add_argument(
            "--batch-size", dest="batch_sizes", type=int, nargs="+", default=[10_000]
        )
        sub.add_argument("--update-threads", type=int, default=2)
        sub.add_argument("--seed", type=int, default=0)
        sub.add_argument(
            "--gnp-n", type=int, default=1000, help="G(n,p) size without --graph"
        )
        sub.add_argument("--gnp-p", type=float, default=0.01)
        sub.add_argument("--climb-core", type=int, default=0, help="clique climb size")
        sub.add_argument(
            "--no-delete-phase", dest="delete_phase", action="store_false"
        )

    def reader_flags(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--read-threads", type=int, default=1)
        sub.add_argument(
            "--mode", choices=("cplds", "sync", "nonsync", "all"), default="cplds"
        )
        sub.add_argument("--truth-every", type=int, default=1)

    ingest = commands.add_parser("ingest", help="load a graph and report its size")
    graph_flags(ingest, required=True)

    bench = commands.add_parser("bench", help="run the benchmark, write CSV")
    graph_flags(bench, required=False)
    workload_flags(bench)
    reader_flags(bench)
    bench.add_argument("--output", type=Path, help="CSV path (default: stdout)")
    bench.add_argument("--record", action="store_true", help="write history files")
    bench.add_argument("--history", type=Path, help="history path with --record")
    bench.add_argument(
        "--per-phase", action="store_true", help="separate insert and delete rows"
    )
    bench.add_argument("--trials", type=int, default=1, help="repeats per run")

    exact = commands.add_parser("exact", help="exact coreness by peeling")
    graph_flags(exact, required=True)
    exact.add_argument("--histogram", action="store_true")

    audit = commands.add_parser("audit", help="audit invariants at every batch")
    graph_flags(audit, required=False)
    workload_flags(audit)
    audit.add_argument(
        "--inject-fault", type=int, metavar="BATCH", help="corrupt a level after BATCH"
    )

    lincheck = commands.add_parser("lincheck", help="check a recorded history")
    graph_flags(lincheck, required=False)
    workload_flags(lincheck)
    reader_flags(lincheck)
    lincheck.add_argument("--history", type=Path, help="existing history file")
    return parser


def parse_config(argv: Sequence[str] | None = None) -> CliConfig:
    """Parse and validate flags; invalid values exit with ``EXIT_USAGE``."""
    parser = build_parser()
    namespace = parser.parse_args(argv)
    try:
        return CliConfig(**{k: v for k, v in vars(namespace).items() if v is not None})
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        parser.error(f"invalid value for {field}: {first['msg']}")


class CorenessApp:
    """Runs one subcommand and maps its outcome to an exit code."""

    def __init__(self, config: CliConfig, out: TextIO | None = None) -> None:
        self.config = config
        self.out = out or sys.stdout
        self._logger = logger.bind(subcommand=config.subcommand)

    def _emit(self, line: str) -> None:
        self.out.write(f"{line}\n")

    def run(self) -> int:
        handler = {
            "ingest": self.cmd_ingest,
            "bench": self.cmd_bench,
            "exact": self.cmd_exact,
            "audit": self.cmd_audit,
            "lincheck": self.cmd_lincheck,
        }[self.config.subcommand]
        try:
            return handler()
        except (OSError, GraphParseError, HistoryFormatError) as e:
            self._logger.error("Input failure", error=str(e))
            sys.stderr.write(f"error: {e}\n")
            return EXIT_IO
        except (ConfigError, WorkloadError, ValidationError) as e:
            self._logger.error("Invalid configuration", error=str(e))
            sys.stderr.write(f"error: {e}\n")
            return EXIT_USAGE
        except ContractError as e:
            self._logger.exception("Contract violated", error=str(e))
            sys.stderr.write(f"error: {e}\n")
            return EXIT_VIOLATIONS
        except ApplicationError as e:
            self._logger.exception(
                "Application error",
                error=str(e),
                original_error=str(e.original_error) if e.original_error else None,
            )
            return EXIT_VIOLATIONS

    def _graph_with_edges(self) -> Graph:
        assert self.config.graph is not None
        graph, stream = load_edge_list_path(self.config.graph)
        batch = EdgeBatch.model_construct(
            kind=BatchKind.INSERT, edges=stream, dropped=0
        )
        apply_batch(graph, normalize_batch(graph, batch))
        return graph

    def cmd_ingest(self) -> int:
        assert self.config.graph is not None
        _, _, stats = scan_edge_list_path(self.config.graph)
        self._emit(
            f"n={stats.n} m={stats.edges} self_loops={stats.self_loops} "
            f"duplicates={stats.duplicates}"
        )
        return EXIT_OK

    def cmd_exact(self) -> int:
        core = exact_coreness(self._graph_with_edges())
        if self.config.histogram:
            for k, count in coreness_histogram(core).items():
                self._emit(f"{k}\t{count}")
            self._emit(f"max_k={max(core, default=0)}")
        else:
            self._emit(" ".join(map(str, core)))
        return EXIT_OK

    def _runs(self) -> list[RunResult]:
        cfg = self.config
        results: list[RunResult] = []
        for batch_size in cfg.batch_sizes:
            for mode in cfg.modes():
                results.append(run_trials(cfg.run_config(batch_size, mode)))
        return results

    def _history_path(self, result: RunResult, many: bool) -> Path | None:
        base = self.config.history
        if base is None or not many:
            return base
        suffix = f"-{result.config.mode.value}-{result.config.batch_size}"
        return base.with_name(f"{base.stem}{suffix}{base.suffix}")

    def cmd_bench(self) -> int:
        results = self._runs()
        rows = [row for result in results for row in result.rows]
        if self.config.output is None:
            write_csv(self.out, rows)
        else:
            with self.config.output.open("w", encoding="utf-8", newline="") as sink:
                write_csv(sink, rows)
        if self.config.record:
            for result in results:
                path = self._history_path(result, len(results) > 1)
                if path is not None:
                    write_history_path(path, result.batches, result.reads)
        partial = any(result.partial for result in results)
        self._logger.info("Bench finished", rows=len(rows), partial=partial)
        return EXIT_VIOLATIONS if partial else EXIT_OK

    def cmd_audit(self) -> int:
        cfg = self.config
        run_cfg = cfg.run_config(cfg.batch_sizes[0], cfg.modes()[0])
        workload = build_workload(run_cfg)
        params = make_params(workload.n, cfg.delta, cfg.lam)
        factor = params.theoretical_factor
        self._emit(f"bound threshold {factor:.4g}")

        truth_graph = Graph(workload.n)
        failures = 0
        worst = 1.0
        with ConcurrentLDS(
            Graph(workload.n), params, workers=cfg.update_threads
        ) as lds:
            for index, raw in enumerate(workload.batches, start=1):
                outcome = lds.apply(raw)
                apply_batch(truth_graph, normalize_batch(truth_graph, raw))
                if cfg.inject_fault == index:
                    lds.state.inject_level(0, params.num_levels - 1)

                violations = audit_lds(lds.graph, lds.state)
                exact = exact_coreness(truth_graph)
                bound = check_bound(lds.estimates(), exact, factor)
                worst = max(worst, bound.max_ratio)
                for violation in violations:
                    self._emit(
                        f"batch {outcome.batch_id}: {violation.kind} "
                        f"v={violation.vertex} {violation.detail}"
                    )
                if not bound.passed:
                    self._emit(
                        f"batch {outcome.batch_id}: bound {bound.max_ratio:.4g} > "
                        f"{factor:.4g} at {bound.offenders[:10]}"
                    )
                if violations or not bound.passed:
                    failures += 1
                    break

        self._emit(f"max ratio {worst:.4g}")
        self._logger.info("Audit finished", failures=failures, max_ratio=worst)
        return EXIT_VIOLATIONS if failures else EXIT_OK

    def cmd_lincheck(self) -> int:
        cfg = self.config
        histories: list[tuple[list[BatchRecord], list[ReadRecord]]]
        if cfg.history is not None:
            histories = [read_history_path(cfg.history)]
        else:
            recording = cfg.model_copy(update={"record": True})
            histories = []
            for batch_size in cfg.batch_sizes:
                for mode in cfg.modes():
                    result = run(recording.run_config(batch_size, mode))
                    histories.append((result.batches, result.reads))

        total = 0
        for batches, reads in histories:
            violations = check_history(batches, reads)
            total += len(violations)
            for violation in violations[:20]:
                self._emit(
                    f"{violation.kind} v={violation.vertex} "
                    f"batch={violation.batch_id} {violation.detail}"
                )
            self._emit(
                f"reads={len(reads)} batches={len(batches)} "
                f"violations={len(violations)}"
            )
        return EXIT_VIOLATIONS if total else EXIT_OK


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    settings = Settings()
    configure_logging(settings.log_level, json_output=settings.log_json)
    config = parse_config(argv)
    return CorenessApp(config, out).run()


if __name__ == "__main__":
    raise SystemExit(main())
