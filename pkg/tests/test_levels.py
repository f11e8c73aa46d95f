import pytest

from src.core.exceptions import ConfigError
from src.core.exceptions import ContractError
from src.lds.levels import Thresholds
from src.lds.levels import coreness_estimate
from src.lds.levels import group_of
from src.lds.levels import make_params


@pytest.mark.parametrize(
    ("n", "groups", "per_group", "levels"),
    [(2, 4, 16, 64), (1000, 38, 152, 5776)],
)
def test_layout(n: int, groups: int, per_group: int, levels: int) -> None:
    params = make_params(n, 0.2, 9.0)

    assert params.num_groups == groups
    assert params.levels_per_group == per_group
    assert params.num_levels == levels
    assert params.theoretical_factor == pytest.approx(2.8)


@pytest.mark.parametrize(
    ("level", "group"), [(0, 0), (151, 0), (152, 1), (5775, 37)]
)
def test_group_of(level: int, group: int) -> None:
    assert group_of(make_params(1000, 0.2, 9.0), level) == group


@pytest.mark.parametrize(
    ("level", "estimate"), [(0, 1.0), (151, 1.0), (303, 1.2), (455, 1.44)]
)
def test_coreness_estimate(level: int, estimate: float) -> None:
    params = make_params(1000, 0.2, 9.0)

    assert coreness_estimate(params, level) == pytest.approx(estimate)
    assert Thresholds(params).estimate[level] == pytest.approx(estimate)


@pytest.mark.parametrize("level", [-1, 5776])
def test_out_of_range_level(level: int) -> None:
    params = make_params(1000, 0.2, 9.0)

    with pytest.raises(ContractError):
        group_of(params, level)
    with pytest.raises(ContractError):
        coreness_estimate(params, level)


@pytest.mark.parametrize(
    ("n", "delta", "lam"), [(1, 0.2, 9.0), (10, 0.0, 9.0), (10, 0.2, -1.0)]
)
def test_invalid_knobs(n: int, delta: float, lam: float) -> None:
    with pytest.raises(ConfigError):
        make_params(n, delta, lam)


def test_invariant_thresholds() -> None:
    thresholds = Thresholds(make_params(1000, 0.2, 9.0))

    assert thresholds.upper_ok(0, 2)
    assert not thresholds.upper_ok(0, 3)
    assert thresholds.lower_ok(1, 1)
    assert not thresholds.lower_ok(1, 0)
    assert thresholds.lower_ok(0, 0)
    # group 1 starts at level 152; the lower bound applies to level - 1
    assert thresholds.lower_ok(153, 2)
    assert not thresholds.lower_ok(153, 1)


@pytest.mark.parametrize(
    ("count", "group"), [(0, -1), (1, 0), (2, 3), (4, 7), (10**9, 38)]
)
def test_max_group_supported(count: int, group: int) -> None:
    thresholds = Thresholds(make_params(1000, 0.2, 9.0))

    assert thresholds.max_group_supported(count) == group
