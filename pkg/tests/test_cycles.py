import pytest
from hypothesis import given, settings, strategies as st

from core.cycles import (
    ColoredCycle,
    assemble,
    build_big,
    find_alternating_cycle,
    infer_joins,
    insert_block,
    merge_cycles,
    verify_cah,
)
from core.design import SetSystem
from core.errors import ConstructionError, PreconditionError

N4_CYCLE = ColoredCycle((0, 1, 2), (2, 4, 3))


@pytest.fixture(scope="module")
def fano_cycle():
    fano = SetSystem(7, ((1, 2, 4), (2, 3, 5), (3, 4, 6), (4, 5, 7), (5, 6, 1), (6, 7, 2), (7, 1, 3)))
    return fano, find_alternating_cycle(fano, require_colorful=True, seed=0)


def _two_copies(system: SetSystem, cycle: ColoredCycle, perm):
    """Host holding the system and a relabelled copy, with both cycles."""
    relabel = {p: perm[p - 1] for p in system.points()}
    copy = tuple(tuple(relabel[p] for p in b) for b in system.blocks)
    host = SetSystem(system.order, system.blocks + copy)
    return host, cycle, cycle.relabeled(relabel).shifted(len(system.blocks))


def test_block_intersection_graph_counts_shared_points(covering4):
    big = build_big(covering4)
    assert big.multiplicity(0, 1) == 2
    assert big.colors(0, 2) == frozenset({1, 3})
    assert big.neighbors(1) == [(0, 1), (0, 2), (2, 1), (2, 4)]


def test_alternating_hamiltonian_cycle_verifies(covering4):
    report = verify_cah(covering4, N4_CYCLE)
    assert report.valid
    assert report.colorful is False


def test_repeated_join_is_not_alternating(covering4):
    report = verify_cah(covering4, ColoredCycle((0, 1, 2), (1, 1, 3)))
    assert report.kinds() == {"not-alternating"}


def test_join_outside_the_intersection(covering4):
    report = verify_cah(covering4, ColoredCycle((0, 1, 2), (3, 4, 1)))
    assert "bad-join" in report.kinds()


def test_cycle_must_visit_every_block(covering4):
    host = SetSystem(4, covering4.blocks + ((2, 3, 4),))
    assert "not-hamiltonian" in verify_cah(host, N4_CYCLE).kinds()
    assert "not-hamiltonian" in verify_cah(covering4, ColoredCycle((0, 1), (1, 2))).kinds()


def test_colorful_requirement(covering4):
    report = verify_cah(covering4, N4_CYCLE, require_colorful=True)
    assert report.kinds() == {"not-colorful"}
    assert report.violations[0].witness == [1]


def test_single_block_cycle_is_degenerate():
    s = SetSystem(3, ((1, 2, 3),))
    c = ColoredCycle((0,), ())
    assert c.degenerate
    assert verify_cah(s, c, require_colorful=True).valid


def test_infer_joins_takes_smallest_colors_first(covering4):
    assert infer_joins(covering4, (0, 1, 2)).joins == (1, 4, 3)


def test_infer_joins_rejects_disjoint_neighbours():
    s = SetSystem(6, ((1, 2, 3), (4, 5, 6), (1, 4, 5)))
    with pytest.raises(PreconditionError):
        infer_joins(s, (0, 1, 2))


def test_find_alternating_cycle_is_colorful(fano_cycle):
    fano, cycle = fano_cycle
    report = verify_cah(fano, cycle, require_colorful=True)
    assert report.valid and report.colorful


def test_find_alternating_cycle_is_seeded(fano_cycle):
    fano, cycle = fano_cycle
    assert find_alternating_cycle(fano, require_colorful=True, seed=0) == cycle


def test_merge_cycles_joins_two_cycles(fano_cycle):
    host, c1, c2 = _two_copies(*fano_cycle, perm=(2, 3, 4, 5, 6, 7, 1))
    j = c2.joins.index(c1.joins[0])
    merged = merge_cycles(c1, c2, (0, j))
    assert len(merged) == 14
    assert verify_cah(host, merged, require_colorful=True).valid


def test_merge_cycles_needs_equal_colors(fano_cycle):
    _, c1, c2 = _two_copies(*fano_cycle, perm=(1, 2, 3, 4, 5, 6, 7))
    j = next(j for j, c in enumerate(c2.joins) if c != c1.joins[0])
    with pytest.raises(PreconditionError):
        merge_cycles(c1, c2, (0, j))


@settings(max_examples=1000, deadline=None)
@given(st.permutations(range(1, 8)), st.integers(0, 6), st.data())
def test_merged_cycles_stay_alternating_hamiltonian(fano_cycle, perm, i, data):
    host, c1, c2 = _two_copies(*fano_cycle, perm=tuple(perm))
    options = [j for j, c in enumerate(c2.joins) if c == c1.joins[i]]
    j = data.draw(st.sampled_from(options))
    merged = merge_cycles(c1, c2, (i, j))
    assert sorted(merged.blocks) == list(range(14))
    assert len(merged.joins) == len(merged.blocks)
    assert verify_cah(host, merged, require_colorful=True).valid


def test_insert_block_splices_a_lone_block(covering4):
    host = SetSystem(5, covering4.blocks + ((1, 2, 5),))
    out = insert_block(N4_CYCLE, 3, host)
    assert out == ColoredCycle((0, 3, 1, 2), (1, 2, 4, 3))
    assert verify_cah(SetSystem(5, host.blocks), out).valid


def test_insert_block_reports_no_position(covering4):
    host = SetSystem(4, covering4.blocks + ((2, 3, 4),))
    assert insert_block(N4_CYCLE, 3, host) is None


def test_assemble_merges_color_sharing_cycles(fano_cycle):
    host, c1, c2 = _two_copies(*fano_cycle, perm=(3, 1, 2, 7, 5, 6, 4))
    out = assemble([c1, c2], host, require_colorful=True)
    assert verify_cah(host, out, require_colorful=True).valid


def test_assemble_refuses_disconnected_colors():
    host = SetSystem(6, ((1, 2, 3), (1, 2, 3), (1, 2, 3), (4, 5, 6), (4, 5, 6), (4, 5, 6)))
    c1 = ColoredCycle((0, 1, 2), (1, 2, 3))
    c2 = ColoredCycle((3, 4, 5), (4, 5, 6))
    with pytest.raises(ConstructionError):
        assemble([c1, c2], host)
