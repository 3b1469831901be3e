import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from core.design import (
    GroupType,
    GroupedDesign,
    SetSystem,
    bsh_feasible,
    chr_feasible,
    covering_number,
    gmp_feasible,
    lenz_feasible,
    pair_table,
    sts_feasible,
    verify_covering,
    verify_gdd,
    verify_k_uniform,
    verify_pbd,
)
from core.errors import DomainError
from modules.exact_cover import min_covering_size

GDD_2_3 = GroupedDesign(
    SetSystem(6, ((1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5))),
    ((1, 2), (3, 4), (5, 6)),
)


@pytest.mark.parametrize("n, expected", [
    (3, 1), (4, 3), (5, 4), (6, 6), (7, 7), (8, 11), (10, 17), (11, 19),
    (12, 24), (14, 33), (16, 43), (17, 46), (18, 54), (20, 67),
])
def test_covering_number_values(n, expected):
    assert covering_number(n) == expected


@given(st.integers(min_value=3, max_value=5000))
def test_covering_number_matches_fort_hedlund(n):
    assert covering_number(n) == math.ceil(Fraction(n, 3) * math.ceil(Fraction(n - 1, 2)))
    assert 3 * covering_number(n) >= n * (n - 1) // 2


def test_covering_number_domain():
    with pytest.raises(DomainError):
        covering_number(2)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_covering_number_agrees_with_exhaustive_search(n):
    assert min_covering_size(n) == covering_number(n)


def test_group_type_parse_and_render():
    gt = GroupType.parse("3^5,6^1")
    assert str(gt) == "3^5 6^1"
    assert gt.order == 21
    assert gt == GroupType.parse("6^1 3^5")
    assert gt.sizes == (3, 3, 3, 3, 3, 6)
    assert hash(gt) == hash(GroupType([6, 3, 3, 3, 3, 3]))


def test_minimum_covering_verifies(covering4):
    report = verify_covering(covering4)
    assert report.valid
    assert report.minimum is True


def test_missing_block_leaves_pairs_uncovered(covering4):
    short = SetSystem(4, covering4.blocks[:2])
    report = verify_covering(short)
    assert not report.valid
    assert report.kinds() == {"uncovered-pair"}
    assert [v.witness for v in report.violations] == [[3, 4]]


def test_covering_with_spare_block_is_valid_but_not_minimum(covering4):
    report = verify_covering(SetSystem(4, covering4.blocks + ((2, 3, 4),)))
    assert report.valid
    assert report.minimum is False


def test_out_of_range_points_are_reported():
    report = verify_covering(SetSystem(3, ((1, 2, 5),)))
    assert "out-of-range" in report.kinds()


def test_k_uniformity():
    report = verify_k_uniform(SetSystem(4, ((1, 2, 3), (1, 4))), {3})
    assert report.kinds() == {"bad-uniformity"}


def test_fano_plane_is_a_pbd(fano):
    assert verify_pbd(fano, {3}).valid


def test_repeated_block_breaks_pbd(fano):
    report = verify_pbd(SetSystem(7, fano.blocks + (fano.blocks[0],)), {3})
    assert {"duplicate-block", "over-covered-pair"} <= report.kinds()


def test_gdd_verifies_and_reports_type():
    report = verify_gdd(GDD_2_3, {3})
    assert report.valid
    assert report.group_type == "2^3"


def test_block_inside_group_is_bad_meet():
    d = GroupedDesign(SetSystem(6, GDD_2_3.blocks + ((1, 2, 3),)), GDD_2_3.groups)
    report = verify_gdd(d, {3})
    assert "bad-group-meet" in report.kinds()
    assert "over-covered-pair" in report.kinds()


def test_groups_must_partition_points():
    d = GroupedDesign(GDD_2_3.system, ((1, 2), (3, 4)))
    assert "out-of-range" in verify_gdd(d, {3}).kinds()


def test_pair_table_counts_multiplicity(covering4):
    table = pair_table(covering4)
    assert table[1, 2] == 2
    assert table[3, 4] == 1
    assert table[2, 1] == 0


@pytest.mark.parametrize("n, ok", [(3, True), (7, True), (9, True), (13, True), (8, False), (11, False)])
def test_sts_feasible(n, ok):
    assert sts_feasible(n) is ok


@pytest.mark.parametrize("g, t, u, ok", [
    (2, 3, 4, True),
    (1, 6, 3, True),
    (6, 3, 10, True),
    (6, 4, 4, True),
    (1, 4, 0, False),
    (2, 3, 6, False),
])
def test_chr_feasible(g, t, u, ok):
    assert chr_feasible(g, t, u) is ok


@pytest.mark.parametrize("g, t, ok", [(3, 4, True), (3, 5, True), (3, 6, False), (2, 4, False), (6, 4, False), (1, 13, True)])
def test_bsh_feasible(g, t, ok):
    assert bsh_feasible(g, t) is ok


def test_pbd_feasibility_predicates():
    assert gmp_feasible(3) and not gmp_feasible(2)
    assert lenz_feasible(13) and lenz_feasible(16)
    assert not any(lenz_feasible(v) for v in (8, 9, 10, 11, 12, 14, 15, 18, 19, 23))


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(1, 8), st.integers(1, 8), st.integers(1, 8)), max_size=12))
def test_adding_a_block_never_uncovers_pairs(blocks):
    blocks = [b for b in blocks if len(set(b)) == 3]
    s = SetSystem(8, tuple(blocks))
    before = {tuple(v.witness) for v in verify_covering(s).violations if v.kind == "uncovered-pair"}
    after = {tuple(v.witness) for v in verify_covering(SetSystem(8, tuple(blocks) + ((1, 2, 3),))).violations
             if v.kind == "uncovered-pair"}
    assert after <= before
