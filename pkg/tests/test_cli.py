import json

import pytest

from pfroots.cli import main
from pfroots.netmodel import case_to_dict, parse_case

from conftest import data_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bounds_table(capsys, tmp_path):
    code, out, _ = run(capsys, "bounds", 3, 14, "--json", tmp_path / "b.json")
    assert code == 0
    assert "10400600" in out and "67108864" in out
    doc = json.loads((tmp_path / "b.json").read_text())
    assert doc["theorem1"][:3] == [6, 20, 70]
    assert doc["bezout"][-1] == 67108864


def test_bounds_two_buses(capsys):
    code, out, _ = run(capsys, "bounds", 2, 2)
    lines = out.splitlines()
    assert code == 0
    assert lines[1].split()[-1] == "4" and lines[2].split()[-1] == "2"


def test_bounds_bad_range(capsys):
    assert run(capsys, "bounds", 5, 3)[0] == 2
    assert run(capsys, "bounds", 1, 3)[0] == 2


def test_solve_two_bus(capsys, tmp_path):
    out_json = tmp_path / "sol.json"
    code, out, _ = run(capsys, "solve", data_path("case2w"), "--json", out_json)
    assert code == 0
    assert "certified complete" in out
    assert "real steady states: 2" in out
    doc = json.loads(out_json.read_text())
    assert doc["accounting"]["finite"] == 2
    assert len(doc["real_states"]) == 2
    manifest = json.loads((tmp_path / "sol.manifest.json").read_text())
    assert manifest["command"] == "solve" and manifest["seed"] == 0
    assert "timestamp" in manifest


def test_solve_json_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "solve", data_path("case2w"), "--seed", 9, "--json", a)
    run(capsys, "solve", data_path("case2w"), "--seed", 9, "--json", b)
    assert a.read_bytes() == b.read_bytes()


def test_seed_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("PFROOTS_SEED", "17")
    run(capsys, "solve", data_path("case2w"), "--json", tmp_path / "s.json")
    assert json.loads((tmp_path / "s.json").read_text())["seed"] == 17
    run(capsys, "solve", data_path("case2w"), "--seed", 3, "--json", tmp_path / "t.json")
    assert json.loads((tmp_path / "t.json").read_text())["seed"] == 3


def test_analyze_row(capsys, tmp_path):
    out_json = tmp_path / "row.json"
    code, out, _ = run(capsys, "analyze", data_path("case2w"), "--json", out_json)
    assert code == 0
    header, row = out.splitlines()[:2]
    assert header.split()[:5] == ["instance", "|N|", "|E|", "tw", "|X|"]
    assert row.split() == ["case2w", "2", "1", "1", "2", "8.42", "1", "9.04", "9.66",
                           "0.71", "1", "1.02", "1.33"]
    doc = json.loads(out_json.read_text())
    assert doc["buses"] == 2 and doc["branches"] == 1 and doc["certified"]


def test_analyze_unloaded_toy_case(capsys, tmp_path):
    case = {
        "buses": [{"id": 0, "kind": "slack", "vm": 1.0}, {"id": 1, "kind": "pq"},
                  {"id": 2, "kind": "pq"}],
        "branches": [{"from": 0, "to": 1, "r": 0.01, "x": 0.1},
                     {"from": 1, "to": 2, "r": 0.02, "x": 0.2}],
    }
    path = tmp_path / "toy.json"
    path.write_text(json.dumps(case))
    code, _, _ = run(capsys, "analyze", path, "--json", tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert code == 0
    assert doc["solutions"] >= 1 and doc["loss"]["min"] == pytest.approx(0, abs=1e-9)


def test_analyze_infeasible(capsys, tmp_path):
    doc = case_to_dict(parse_case(data_path("case2w").read_text()))
    doc["buses"][1]["qd"] = 3.5
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "analyze", path)
    assert code == 0
    assert "infeasible, no real steady state" in out


def test_treewidth_command(capsys, tmp_path):
    code, out, _ = run(capsys, "treewidth", data_path("case9"), "--json", tmp_path / "t.json")
    assert code == 0 and "tw=2" in out
    assert json.loads((tmp_path / "t.json").read_text())["exact"]


def test_dump_bertini(capsys):
    code, out, _ = run(capsys, "dump-bertini", data_path("case2w"))
    assert code == 0
    assert "variable_group v1;" in out and "variable_group u1;" in out


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, err = run(capsys, "solve", bad)
    assert code == 2 and "cannot read case" in err
    assert run(capsys, "solve", tmp_path / "missing.json")[0] == 2


def test_two_slack_exit_code(capsys, tmp_path):
    doc = case_to_dict(parse_case(data_path("case2w").read_text()))
    doc["buses"][1] = {"id": 1, "kind": "slack", "pd": 0, "qd": 0, "vm": 1.0}
    path = tmp_path / "two.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "solve", path)
    assert code == 3 and "positive-dimensional" in err


def test_bad_norm(capsys):
    assert run(capsys, "analyze", data_path("case2w"), "--norm", 0.5)[0] == 2


def test_uncertified_exit_code(capsys, monkeypatch):
    import pfroots.cli as cli
    from pfroots.homotopy import TrackerConfig

    monkeypatch.setattr(cli, "_tracker", lambda args: TrackerConfig(max_steps=3))
    code, out, _ = run(capsys, "solve", data_path("case2w"))
    assert code == 4 and "not certified" in out
