from dataclasses import replace
from pathlib import Path

import pytest

from core.context import get_profile
from core.design import GroupType
from core.errors import ConstructionError, DomainError, FixtureParseError, NotAvailableError, PreconditionError
from modules.catalog import check, dump, fixture_key, load, repair

FIXTURES = sorted(Path(get_profile().fixtures_dir).glob("*.fix"))
SHORT_COVERINGS = (10, 11, 12, 14, 20)


def _fixture(name: str):
    return load((Path(get_profile().fixtures_dir) / name).read_text(encoding="utf-8"))


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.stem)
def test_dump_then_load_is_exact(path):
    f = load(path.read_text(encoding="utf-8"))
    text = dump(f)
    assert load(text) == f
    assert dump(load(text)) == text


def test_header_defaults():
    f = _fixture("covering_4.fix")
    assert (f.kind, f.order, f.cycle, f.provenance) == ("covering", 4, "alternating", "bundled")
    assert f.key == ("covering", 4)
    assert f.block_sizes == (3,)


def test_gdd4_master_marks():
    f = _fixture("gdd4_3-4.fix")
    assert f.cycle == "none"
    assert f.group_type == "3^4"
    assert len(f.blocks) == 9
    assert len(f.marked("bold")) == 4
    assert f.certificate() is None


def test_gdd47_master_marks():
    f = _fixture("gdd47_3-5_6-1.fix")
    assert f.block_sizes == (4, 7)
    assert len(f.blocks) == 30
    assert len(f.marked("bold")) == 8
    assert len(f.marked("italic")) == 2
    assert len(f.design.groups[-1]) == 6


@pytest.mark.parametrize("text, line_no", [
    ("block: 1 2 3\n", 1),
    ("fixture kind=covering n=4\nblock: 1 2 x\n", 2),
    ("fixture kind=covering n=4\nblock: 1 2 3 !underline\n", 2),
    ("# note\nfixture kind=covering n=4\n\nedge: 1 2\n", 4),
    ("fixture kind=pbd n=4\n", 1),
    ("", 1),
])
def test_parse_errors_carry_line_numbers(text, line_no):
    with pytest.raises(FixtureParseError) as err:
        load(text)
    assert err.value.line_no == line_no


def test_join_lines_must_match_blocks():
    with pytest.raises(FixtureParseError):
        load("fixture kind=covering n=4\nblock: 1 2 3\nblock: 1 2 4\nblock: 1 3 4\njoin: 2\n")


def test_fixture_keys():
    assert fixture_key("gdd3", "3^5,6^1") == ("gdd3", "3^5 6^1")
    assert fixture_key("gdd3", GroupType([2, 2, 2])) == ("gdd3", "2^3")
    assert fixture_key("sts", "7") == ("sts", 7)
    with pytest.raises(DomainError):
        fixture_key("bibd", 7)


@pytest.mark.parametrize("path", [p for p in FIXTURES if p.stem.startswith(("sts_", "gdd", "sts7_"))],
                         ids=lambda p: p.stem)
def test_bundled_designs_pass_without_repair(path):
    assert check(load(path.read_text(encoding="utf-8"))).valid


@pytest.mark.parametrize("n", [4, 5, 6, 8, 16])
def test_complete_coverings_pass(n):
    report = check(_fixture(f"covering_{n}.fix"))
    assert report.valid


@pytest.mark.parametrize("n", SHORT_COVERINGS)
def test_short_coverings_are_flagged(n):
    report = check(_fixture(f"covering_{n}.fix"))
    assert "wrong-size" in report.kinds()
    assert "uncovered-pair" in report.kinds()


@pytest.mark.parametrize("n", [10, 11, 12, 14])
def test_repair_completes_short_coverings(n):
    f = _fixture(f"covering_{n}.fix")
    fixed = repair(f, seed=0)
    assert fixed.provenance == "repaired"
    assert fixed.seed == 0
    assert check(fixed).valid
    assert set(f.blocks) <= set(fixed.blocks)


def test_repair_exchanges_a_misplaced_block():
    # Fano plane with (1,2,4) and (2,3,5) lost and a stray (1,2,3) in their place
    f = load("fixture kind=covering n=7 cycle=alternating\n"
             "block: 3 4 6\nblock: 4 5 7\nblock: 5 6 1\nblock: 6 7 2\nblock: 7 1 3\nblock: 1 2 3\n")
    report = check(f)
    assert {(1, 4), (2, 4), (2, 5), (3, 5)} == {tuple(v.witness) for v in report.violations
                                                 if v.kind == "uncovered-pair"}
    with pytest.raises(ConstructionError):
        repair(f, seed=0, max_remove=0)
    fixed = repair(f, seed=0)
    assert check(fixed).valid
    assert len(fixed.blocks) == 7
    assert (1, 2, 3) not in fixed.blocks
    assert {frozenset(b) for b in fixed.blocks} >= {frozenset(b) for b in f.blocks[:5]}


def test_repair_covering_20():
    f = _fixture("covering_20.fix")
    report = check(f)
    assert len(f.blocks) == 66
    assert {tuple(v.witness) for v in report.violations if v.kind == "uncovered-pair"} == {
        (7, 20), (8, 20), (13, 17), (14, 17)}
    fixed = repair(f, seed=0)
    assert len(fixed.blocks) == 67
    assert check(fixed).valid
    assert frozenset((13, 14, 18)) not in {frozenset(b) for b in fixed.blocks}


def test_repair_is_byte_stable():
    f = _fixture("covering_10.fix")
    assert dump(repair(f, seed=0)) == dump(repair(f, seed=0))


def test_repair_leaves_valid_fixtures_alone():
    f = _fixture("sts_7.fix")
    assert repair(f) is f


def test_repair_refuses_gdds():
    f = _fixture("gdd3_2-4.fix")
    broken = replace(f, blocks=f.blocks[:-1], marks=f.marks[:-1], joins=())
    assert not check(broken).valid
    with pytest.raises(PreconditionError):
        repair(broken)


def test_catalog_index_skips_labelled_examples(catalog):
    keys = {key for key, _ in catalog.entries()}
    assert ("sts", 7) in keys
    assert ("gdd47", "3^5 6^1") in keys
    assert catalog.example("ucycle_b").label == "ucycle_b"
    with pytest.raises(NotAvailableError):
        catalog.example("ucycle_z")


def test_get_repairs_once_and_caches(fresh_catalog):
    first = fresh_catalog.get("covering", 10)
    assert first.provenance == "repaired"
    assert fresh_catalog.cache_path(("covering", 10)).exists()
    again = fresh_catalog.get("covering", 10)
    assert again == first


def test_get_unknown_entry(fresh_catalog):
    with pytest.raises(NotAvailableError):
        fresh_catalog.get("sts", 19)


def test_corrupt_cache_entry_is_ignored(fresh_catalog):
    path = fresh_catalog.cache_path(("sts", 7))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("not a fixture\n", encoding="utf-8")
    assert fresh_catalog.get("sts", 7).provenance == "bundled"


@pytest.mark.slow
def test_check_all_statuses(fresh_catalog):
    status = fresh_catalog.check_all(do_repair=True)
    repaired = {key for key, (state, _) in status.items() if state == "repaired"}
    assert repaired == {("covering", n) for n in SHORT_COVERINGS}
    assert all(state == "bundled" for key, (state, _) in status.items() if key not in repaired)
