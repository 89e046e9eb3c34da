import json

import pytest
from click.testing import CliRunner

from wallx.cli import main
from wallx.stability import Wall
from wallx.wallcross import StrataClassExpr, wallcross_on_jbar


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, [str(a) for a in args])

    return invoke


def test_walls_listing(run):
    res = run("walls", "--g", 2, "--n", 1, "--d", 1)
    assert res.exit_code == 0
    data = json.loads(res.output)
    assert data["window"] == ["-1", "1"]
    assert data["walls"]
    for w in data["walls"]:
        assert w["multiplicity"] == len(w["coinciding"]) >= 1
    empty = run("walls", "--g", 2, "--n", 1, "--d", 1, "--window", "1/10,2/5")
    assert json.loads(empty.output)["walls"] == []


@pytest.mark.parametrize("args", [
    ("--g", 2, "--n", 1, "--d", 2),
    ("--g", 1, "--n", 1, "--d", 0),
    ("--g", 2, "--n", 1, "--d", 0, "--window", "abc"),
])
def test_walls_config_errors(run, args):
    assert run("walls", *args).exit_code == 2


def test_cross_check_reports_agreement(run):
    res = run("cross", "--g", 2, "--n", 1, "--d", 0, "--wall", "1,1,1,0", "--check")
    assert res.exit_code == 0
    assert "oracle: equal" in res.stderr
    data = json.loads(res.stdout)
    assert data["oracle"] == "equal"


def test_cross_output_roundtrips(run):
    res = run("cross", "--g", 2, "--n", 2, "--d", 0, "--wall", "0,2,1,0")
    assert res.exit_code == 0
    data = json.loads(res.output)
    want = wallcross_on_jbar(2, 2, 0, Wall(0, 2, frozenset([1]), 0))
    assert StrataClassExpr.from_json(data) == want


def test_cross_is_byte_stable(run):
    args = ("cross", "--g", 3, "--n", 1, "--d", 1, "--wall", "1,1,1,0")
    first, second = run(*args), run(*args)
    assert first.exit_code == 0 and first.output == second.output


def test_cross_resolved_mode(run):
    res = run("cross", "--g", 2, "--n", 1, "--d", 0, "--wall", "1,1,1,0", "--resolved")
    assert res.exit_code == 0
    assert json.loads(res.output)["psi_on"] == "forest"


def test_cross_disjoint_inapplicable(run):
    res = run("cross", "--g", 2, "--n", 1, "--d", 0, "--wall", "1,1,1,0", "--disjoint")
    assert res.exit_code == 3
    ok = run("cross", "--g", 3, "--n", 1, "--d", 2, "--wall", "1,1,1,0", "--disjoint", "--check")
    assert ok.exit_code == 0


def test_cross_bad_wall(run):
    assert run("cross", "--g", 2, "--n", 1, "--d", 0, "--wall", "9,1,1,0").exit_code == 2
    assert run("cross", "--g", 2, "--n", 1, "--d", 0, "--wall", "nonsense").exit_code == 2


def test_cross_writes_file(run, tmp_path):
    out = tmp_path / "x.json"
    res = run("cross", "--g", 2, "--n", 1, "--d", 1, "--wall", "1,1,1,-1", "--out", out)
    assert res.exit_code == 0
    data = json.loads(out.read_text())
    assert [t["coeff"] for t in data["terms"]] == ["-1"]


def test_verify_unknown_suite(run):
    assert run("verify", "--suite", "nope").exit_code == 2


def test_verify_coefficients(run):
    res = run("verify", "--suite", "coefficients")
    assert res.exit_code == 0
    data = json.loads(res.output)
    assert data["ok"] and data["passes"]["codim_table"] > 0 and data["counterexample"] is None
