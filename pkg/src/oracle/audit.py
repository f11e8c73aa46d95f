# src/oracle/audit.py
"""From-scratch structure audits and the approximation-bound check."""

from collections.abc import Sequence

import structlog

from src.graph.store import Graph
from src.lds.levels import EPS
from src.lds.state import LevelState
from src.models.audit import AuditViolation
from src.models.audit import BoundReport

logger = structlog.get_logger(__name__)


def audit_lds(g: Graph, state: LevelState) -> list[AuditViolation]:
    """Recompute both invariants and the neighbor bookkeeping for every vertex.

    Must be called at a batch boundary. An empty list means the structure is
    consistent.
    """
    violations = [AuditViolation(kind="graph", detail=problem) for problem in g.audit()]
    thresholds = state.thresholds
    top = state.params.num_levels

    for v in range(g.n):
        level = state.get_level(v)
        if not 0 <= level < top:
            violations.append(
                AuditViolation(
                    kind="level_range",
                    vertex=v,
                    detail=f"level {level} not in [0, {top})",
                )
            )
            continue

        up, up_star = state.recount(v)
        if not thresholds.upper_ok(level, up):
            bound = thresholds.upper[level // thresholds.per_group]
            violations.append(
                AuditViolation(
                    kind="invariant1",
                    vertex=v,
                    detail=f"level {level}, up-degree {up} > {bound:.3f}",
                )
            )
        if not thresholds.lower_ok(level, up_star):
            bound = thresholds.lower[(level - 1) // thresholds.per_group]
            violations.append(
                AuditViolation(
                    kind="invariant2",
                    vertex=v,
                    detail=f"level {level}, up*-degree {up_star} < {bound:.3f}",
                )
            )
        kept = (state.up_degree(v), state.up_star_degree(v))
        if kept != (up, up_star):
            violations.append(
                AuditViolation(
                    kind="bookkeeping",
                    vertex=v,
                    detail=f"index counts {kept} != recomputed {(up, up_star)}",
                )
            )

    if violations:
        logger.warning(
            "Audit failed", violations=len(violations), first=violations[0].detail
        )
    return violations


def check_bound(
    estimates: Sequence[float], exact: Sequence[int], factor: float
) -> BoundReport:
    """Compare estimates to exact coreness as ``max(est/k, k/est)``.

    Vertices with ``k = 0`` have no defined ratio and are listed separately.
    """
    if len(estimates) != len(exact):
        message = f"{len(estimates)} estimates for {len(exact)} vertices"
        raise ValueError(message)

    worst = 1.0
    offenders: list[int] = []
    zero_core: list[int] = []
    for v, (estimate, k) in enumerate(zip(estimates, exact, strict=True)):
        if k == 0:
            zero_core.append(v)
            continue
        ratio = max(estimate / k, k / estimate)
        worst = max(worst, ratio)
        if ratio > factor + EPS:
            offenders.append(v)
    return BoundReport(
        max_ratio=worst, factor=factor, offenders=offenders, zero_core=zero_core
    )


def read_error(estimate: float, k: int) -> float:
    """Ratio used for read error statistics; coreness 0 counts as 1."""
    k = max(k, 1)
    return max(estimate / k, k / estimate)
