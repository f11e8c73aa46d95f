# src/lds/levels.py
"""Level layout: parameters, groups, invariant thresholds and estimates."""

import math

from src.core.exceptions import ConfigError
from src.core.exceptions import ContractError
from src.models.params import LevelParams

# Degree comparisons against real-valued bounds treat |d - bound| < EPS as equal.
EPS = 1e-9


def make_params(n: int, delta: float, lam: float) -> LevelParams:
    """Derive the level layout for ``n`` vertices.

    ``num_groups = ceil(log_{1+delta} n)`` is computed as a natural-log ratio.

    Raises:
        ConfigError: If ``n < 2`` or a knob is not positive.
    """
    if n < 2:  # noqa: PLR2004
        raise ConfigError(ConfigError.TOO_FEW_VERTICES.format(n=n))
    for name, value in (("delta", delta), ("lambda", lam)):
        if not value > 0:
            raise ConfigError(ConfigError.NON_POSITIVE.format(field=name, value=value))

    num_groups = max(1, math.ceil(math.log(n) / math.log1p(delta)))
    levels_per_group = 4 * num_groups
    return LevelParams(
        n=n,
        delta=delta,
        lam=lam,
        num_groups=num_groups,
        levels_per_group=levels_per_group,
        num_levels=levels_per_group * num_groups,
        theoretical_factor=(2.0 + 3.0 / lam) * (1.0 + delta),
    )


def group_of(params: LevelParams, level: int) -> int:
    """Index of the group holding ``level``."""
    if not 0 <= level < params.num_levels:
        raise ContractError(
            ContractError.LEVEL_OUT_OF_RANGE.format(level=level, top=params.num_levels)
        )
    return level // params.levels_per_group


def coreness_estimate(params: LevelParams, level: int) -> float:
    """``(1+delta)^max(floor((level+1)/levels_per_group) - 1, 0)``."""
    if not 0 <= level < params.num_levels:
        raise ContractError(
            ContractError.LEVEL_OUT_OF_RANGE.format(level=level, top=params.num_levels)
        )
    exponent = max((level + 1) // params.levels_per_group - 1, 0)
    return (1.0 + params.delta) ** exponent


class Thresholds:
    """Per-group invariant bounds, precomputed once per parameter set."""

    __slots__ = ("estimate", "lower", "per_group", "top", "upper")

    def __init__(self, params: LevelParams) -> None:
        base = 1.0 + params.delta
        self.per_group = params.levels_per_group
        self.top = params.num_levels
        powers = [base**g for g in range(params.num_groups + 1)]
        self.upper = [params.upper_slack * p for p in powers]
        self.lower = powers
        self.estimate = [coreness_estimate(params, lvl) for lvl in range(self.top)]

    def upper_ok(self, level: int, up_degree: int) -> bool:
        """Invariant 1 at ``level`` for a vertex with ``up_degree``."""
        return up_degree <= self.upper[level // self.per_group] + EPS

    def lower_ok(self, level: int, up_star_degree: int) -> bool:
        """Invariant 2 at ``level`` for a vertex with ``up_star_degree``."""
        if level == 0:
            return True
        return up_star_degree >= self.lower[(level - 1) // self.per_group] - EPS

    def max_group_supported(self, count: int) -> int:
        """Largest group ``g`` with ``(1+delta)^g <= count``, or -1 if none."""
        if count <= 0:
            return -1
        lower = self.lower
        g = min(len(lower) - 1, int(math.log(count) / math.log(lower[1])))
        while g + 1 < len(lower) and lower[g + 1] <= count + EPS:
            g += 1
        while g >= 0 and lower[g] > count + EPS:
            g -= 1
        return g
