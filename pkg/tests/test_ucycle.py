import pytest
from hypothesis import given, settings, strategies as st

from core.cycles import ColoredCycle, verify_cah
from core.design import SetSystem
from core.errors import MalformedWindowError, PreconditionError
from core.ucycle import (
    ShiftUcycle,
    blocks_of,
    format_ucycle,
    from_cah,
    parse_ucycle,
    to_cah,
    verify_shift_ucycle,
)
from modules.construct import build_covering


@pytest.fixture
def sts7(catalog):
    return catalog.example("ucycle_a").system


def test_windows_of_the_sts7_ucycle(sts7_ucycle):
    assert blocks_of(sts7_ucycle) == [
        (1, 3, 7), (7, 2, 6), (6, 4, 3), (3, 5, 2), (2, 1, 4), (4, 7, 5), (5, 6, 1),
    ]


def test_sts7_ucycle_verifies(sts7_ucycle, sts7):
    assert verify_shift_ucycle(sts7_ucycle, sts7).valid


def test_ucycle_and_cycle_round_trip(sts7_ucycle, sts7):
    cycle = to_cah(sts7_ucycle, sts7)
    assert verify_cah(sts7, cycle, require_colorful=True).valid
    assert from_cah(sts7, cycle) == sts7_ucycle


def test_from_cah_orders_blocks_by_joins(covering4):
    u = from_cah(covering4, ColoredCycle((0, 1, 2), (2, 4, 3)))
    assert u.seq == (3, 1, 2, 1, 4, 1)
    assert (u.s, u.k, u.m) == (2, 3, 3)
    assert verify_shift_ucycle(u, covering4).valid


def test_from_cah_rejects_broken_cycles(covering4):
    with pytest.raises(PreconditionError):
        from_cah(covering4, ColoredCycle((0, 1, 2), (1, 1, 3)))


def test_single_block_gives_degenerate_ucycle():
    s = SetSystem(3, ((1, 2, 3),))
    u = from_cah(s, ColoredCycle((0,), ()))
    assert u.degenerate
    assert u.seq == (1, 2, 3)
    assert blocks_of(u) == [(1, 2, 3)]
    assert to_cah(u, s) == ColoredCycle((0,), ())


def test_repeated_point_in_a_window():
    u = ShiftUcycle((1, 1, 2, 3), s=2, k=3)
    with pytest.raises(MalformedWindowError):
        blocks_of(u)
    report = verify_shift_ucycle(u, SetSystem(3, ((1, 2, 3),)))
    assert report.kinds() == {"malformed-window"}


def test_ucycle_missing_a_block(covering4):
    host = SetSystem(4, covering4.blocks + ((2, 3, 4),))
    u = from_cah(covering4, ColoredCycle((0, 1, 2), (2, 4, 3)))
    report = verify_shift_ucycle(u, host)
    assert report.kinds() == {"wrong-size"}


def test_length_must_be_a_multiple_of_the_shift():
    with pytest.raises(PreconditionError):
        ShiftUcycle((1, 2, 3), s=2, k=3)


def test_text_format(sts7_ucycle):
    line = format_ucycle(sts7_ucycle)
    assert line == "ucycle s=2 k=3 n=7: 1 3 7 2 6 4 3 5 2 1 4 7 5 6"
    assert parse_ucycle("# comment\n\n" + line + "\n") == sts7_ucycle


def test_degenerate_text_format():
    u = ShiftUcycle((1, 2, 3), s=2, k=3, order=3, degenerate=True)
    assert parse_ucycle(format_ucycle(u)) == u


def test_parse_rejects_other_lines():
    with pytest.raises(PreconditionError):
        parse_ucycle("radius n=3 k=2: 1 2 3")


def _rotated(c: ColoredCycle, r: int) -> ColoredCycle:
    r %= len(c)
    return ColoredCycle(c.blocks[r:] + c.blocks[:r], c.joins[r:] + c.joins[:r])


@settings(max_examples=1000, deadline=None)
@given(st.sampled_from([3, 4, 5, 6, 7, 8, 9, 13, 15, 16]), st.integers(0, 1000))
def test_pipeline_cycles_round_trip(n, r):
    cah = build_covering(n)
    cycle = _rotated(cah.cycle, r)
    u = from_cah(cah.system, cycle)
    assert len(u.seq) == 2 * len(cah) or u.degenerate
    back = to_cah(u, cah.system)
    sets = cah.system.block_sets
    assert [sets[i] for i in back.blocks] == [sets[i] for i in cycle.blocks]
    assert back.joins == cycle.joins
