import pytest

from src.bench.workload import gen_workload
from src.bench.workload import gnp_stream
from src.core.exceptions import ContractError
from src.graph.store import Graph
from src.graph.store import apply_batch
from src.lds.engine import NullHooks
from src.lds.engine import batch_delete
from src.lds.engine import batch_insert
from src.lds.levels import make_params
from src.lds.parallel import ParallelFor
from src.lds.state import LevelState
from src.models.batch import BatchKind
from src.oracle.audit import audit_lds
from src.oracle.audit import check_bound
from src.oracle.peeling import exact_coreness
from tests.helpers import Structure
from tests.helpers import clique
from tests.helpers import delete
from tests.helpers import insert


def assert_sound(s: Structure) -> None:
    assert audit_lds(s.graph, s.state) == []
    report = check_bound(
        s.estimates(), exact_coreness(s.graph), s.params.theoretical_factor
    )
    assert report.passed, report


def test_single_edge_moves_nothing() -> None:
    s = Structure(2)

    report = s.apply(insert([(0, 1)]))

    assert report.moves == 0
    assert s.levels() == [0, 0]
    assert_sound(s)


def test_triangle_stays_within_the_factor() -> None:
    s = Structure(3)

    s.apply(insert(clique(range(3))))

    factor = s.params.theoretical_factor
    for estimate in s.estimates():
        assert 2 / factor <= estimate <= 2 * factor
    assert_sound(s)


def test_clique_climbs_together() -> None:
    s = Structure(5)

    report = s.apply(insert(clique(range(5))))

    # degree 4 first fits under the upper bound in group 3
    assert s.levels() == [3 * s.params.levels_per_group] * 5
    assert report.moved == [0, 1, 2, 3, 4]
    assert report.steps == 3 * s.params.levels_per_group
    assert_sound(s)


def test_deleting_every_edge_returns_to_level_zero() -> None:
    s = Structure(5)
    s.apply(insert(clique(range(5))))

    report = s.apply(delete(clique(range(5))))

    assert s.levels() == [0] * 5
    assert report.kind is BatchKind.DELETE
    assert report.steps == 1
    assert_sound(s)


def test_clique_minus_an_edge() -> None:
    s = Structure(5)
    edges = [e for e in clique(range(5)) if e != (0, 1)]

    s.apply(insert(edges))

    assert_sound(s)
    assert exact_coreness(s.graph) == [3] * 5


def test_empty_delete_moves_nothing() -> None:
    s = Structure(4)
    s.apply(insert([(0, 1), (1, 2)]))
    before = s.levels()

    report = s.apply(delete([]))

    assert report.moves == 0
    assert s.levels() == before


def test_wrong_batch_kind_is_rejected() -> None:
    s = Structure(3)

    with pytest.raises(ContractError):
        batch_insert(s.graph, s.state, delete([]), NullHooks())
    with pytest.raises(ContractError):
        batch_delete(s.graph, s.state, insert([]), NullHooks())


def test_state_bound_to_another_graph_is_rejected() -> None:
    s = Structure(3)

    with pytest.raises(ContractError):
        batch_insert(Graph(3), s.state, insert([]), NullHooks())


def star_state(levels: list[int], edges: list[tuple[int, int]]) -> LevelState:
    g = Graph(5)
    apply_batch(g, insert(edges))
    state = LevelState(g, make_params(5, 0.2, 9.0))
    state.assign(levels)
    return state


def test_desire_level_for_a_star_centre() -> None:
    state = star_state([50, 0, 0, 0, 0], [(0, 1), (0, 2), (0, 3), (0, 4)])

    assert not state.invariant2_holds(0)
    assert state.desire_level(0) == 1


def test_desire_level_lands_just_above_the_supporting_bucket() -> None:
    state = star_state([50, 40, 40, 0, 0], [(0, 1), (0, 2)])

    # at level 41 both neighbours at 40 count towards up*-degree
    assert state.desire_level(0) == 41


def test_desire_level_requires_a_violation() -> None:
    state = star_state([0, 0, 0, 0, 0], [(0, 1)])

    with pytest.raises(ContractError):
        state.desire_level(0)


def test_assign_checks_the_range() -> None:
    g = Graph(2)
    state = LevelState(g, make_params(2, 0.2, 9.0))

    with pytest.raises(ContractError):
        state.assign([0, 64])


def test_index_matches_recount_after_assign() -> None:
    state = star_state([3, 2, 2, 1, 0], [(0, 1), (0, 2), (1, 3), (3, 4)])

    for v in range(5):
        assert (state.up_degree(v), state.up_star_degree(v)) == state.recount(v)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_random_batches_keep_invariants_and_bound(seed: int) -> None:
    s = Structure(40)
    batches = gen_workload(gnp_stream(40, 0.2, seed), 25)

    for batch in batches:
        before = s.levels()
        s.apply(batch)
        after = s.levels()
        assert_sound(s)
        if batch.kind is BatchKind.INSERT:
            assert all(b <= a for b, a in zip(before, after, strict=True))
        else:
            assert all(b >= a for b, a in zip(before, after, strict=True))

    assert s.graph.m == 0
    assert s.levels() == [0] * 40


def test_parallel_passes_match_sequential() -> None:
    batches = gen_workload(gnp_stream(60, 0.15, 7), 40)
    sequential = Structure(60)
    with ParallelFor(workers=4, grain=1) as pool:
        parallel = Structure(60, pool)
        for batch in batches:
            sequential.apply(batch)
            parallel.apply(batch)
            assert parallel.levels() == sequential.levels()
