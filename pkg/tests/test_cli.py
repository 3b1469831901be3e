import pytest

import ucover
from core.context import ROOT, get_profile
from core.ucycle import parse_ucycle
from modules.catalog import get_catalog
from modules.radius import defect, parse_sequence
from ucover import main

SEQUENCES = ROOT / "catalog" / "sequences"


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_build_emits_a_ucycle(capsys):
    code, out = _run(capsys, "build", "--n", "7", "--emit", "ucycle")
    assert code == 0
    assert out.splitlines()[0] == "# seed=0"
    u = parse_ucycle(out)
    assert len(u.seq) == 14 and u.order == 7


def test_build_radius_is_deterministic(capsys):
    _, first = _run(capsys, "build", "--n", "9", "--emit", "radius")
    _, second = _run(capsys, "build", "--n", "9", "--emit", "radius")
    assert first == second
    s = parse_sequence(first)
    assert len(s) == 25 and defect(s) == 0


def test_built_files_verify(tmp_path, capsys):
    design, ucycle, radius = tmp_path / "c9.fix", tmp_path / "u9.txt", tmp_path / "r9.seq"
    assert main(["build", "--n", "9", "--out", str(design)]) == 0
    assert main(["build", "--n", "9", "--emit", "ucycle", "--out", str(ucycle)]) == 0
    assert main(["build", "--n", "9", "--emit", "radius", "--out", str(radius)]) == 0
    capsys.readouterr()

    code, out = _run(capsys, "verify", "--kind", "covering", "--file", str(design))
    assert code == 0
    assert out.splitlines()[0] == "valid"
    assert _run(capsys, "verify", "--kind", "ucycle", "--file", str(ucycle), "--design", str(design))[0] == 0
    assert _run(capsys, "verify", "--kind", "radius", "--file", str(radius))[0] == 0


def test_verify_bundled_sequence(capsys):
    code, out = _run(capsys, "verify", "--kind", "radius", "--file", str(SEQUENCES / "radius_n8.seq"))
    assert code == 0
    assert out.startswith("valid")


def test_verify_reports_failures(tmp_path, capsys):
    bad = tmp_path / "bad.seq"
    bad.write_text("radius n=4 k=2: 1 2 3 4\n", encoding="utf-8")
    code, out = _run(capsys, "verify", "--kind", "radius", "--file", str(bad))
    assert code == 1
    assert "uncovered-pair" in out


def test_verify_missing_file(tmp_path, capsys):
    assert _run(capsys, "verify", "--kind", "radius", "--file", str(tmp_path / "nope.seq"))[0] == 1


def test_verify_gdd_master(capsys):
    fixture = ROOT / "catalog" / "fixtures" / "gdd4_3-4.fix"
    assert _run(capsys, "verify", "--kind", "gdd", "--file", str(fixture))[0] == 0


def test_search_success(capsys):
    code, out = _run(capsys, "search", "--n", "5", "--len", "8", "--seed", "3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# seed=3"
    assert lines[1].startswith("radius n=5 k=2:")
    assert defect(parse_sequence(out)) == 0


def test_search_below_the_bound_fails(capsys):
    code, out = _run(capsys, "search", "--n", "8", "--len", "16", "--stall", "500",
                     "--restarts", "2", "--time-limit", "10")
    assert code == 1
    lines = out.splitlines()
    assert lines[0] == "# seed=0"
    assert lines[1].startswith("no sequence of length 16 found")


@pytest.mark.parametrize("argv", [
    ["build", "--n", "2"],
    ["build", "--n", "7", "--emit", "blocks"],
    ["search", "--n", "5", "--len", "0"],
    ["search", "--n", "5", "--len", "8", "--seed", "-1"],
    ["table", "--from", "9", "--to", "7"],
    ["verify", "--kind", "ucycle", "--file", "u.txt"],
    ["catalog", "list", "--out", "somewhere"],
    ["frobnicate"],
])
def test_bad_flags_exit_two(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().out == ""


def test_oracle(capsys):
    code, out = _run(capsys, "oracle", "f2", "--n", "4")
    assert code == 0
    assert out.strip() == "f2(4) = 5"


def test_oracle_unresolved_and_capped(capsys):
    code, out = _run(capsys, "oracle", "f2", "--n", "5", "--max-len", "6")
    assert code == 1
    assert "unresolved" in out
    assert _run(capsys, "oracle", "f2", "--n", "9")[0] == 1


def test_table_csv(capsys):
    code, out = _run(capsys, "table", "--from", "7", "--to", "9", "--csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,lower_L,len_this,gilkerson,achieved,jl_actual,f2_known"
    assert len(lines) == 4
    assert lines[3].startswith("9,20,25,")


def test_catalog_list(capsys):
    code, out = _run(capsys, "catalog", "list")
    assert code == 0
    assert any(line.startswith("sts") and "sts_7.fix" in line for line in out.splitlines())
    assert "ucycle_a" not in out


@pytest.fixture
def restore_seeds(monkeypatch):
    profile = get_profile()
    monkeypatch.setattr(profile.construct, "seed", profile.construct.seed)
    monkeypatch.setattr(profile.catalog, "repair_seed", profile.catalog.repair_seed)
    yield
    get_catalog.cache_clear()


def test_build_records_the_seed(restore_seeds, capsys):
    code, out = _run(capsys, "build", "--n", "7", "--emit", "radius", "--seed", "4")
    assert code == 0
    assert out.splitlines()[0] == "# seed=4"


def test_unexpected_errors_exit_one(monkeypatch, capsys):
    def broken(args):
        raise AttributeError("no attribute 'defect'")

    monkeypatch.setitem(ucover.COMMANDS, "table", broken)
    code, out = _run(capsys, "table", "--from", "7", "--to", "9")
    assert code == 1
    assert out == ""
