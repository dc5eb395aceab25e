import json

import pytest

from conftest import P_EX_TEXT
from proofsched.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_type_of_the_unit(capsys):
    code, out, _ = call(capsys, "type", "1", "--variant", "sync")
    assert code == 0 and out.strip() == "v0^ @ v0"


def test_deadlocked_term_has_no_schedule(capsys):
    code, out, _ = call(capsys, "synthesize", "a^1.b^2 | ~b^3.~a^4", "--to", "1", "--variant", "async")
    assert code == 1 and out.strip() == "no schedule"


def test_total_pairings_report(capsys):
    code, out, _ = call(capsys, "pairings", P_EX_TEXT, "--total")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 4
    bad = [l for l in lines if "inconsistent" in l]
    assert bad == ["[[0, 1], [2, 6], [3, 8], [4, 7], [5, 9]]  inconsistent (cycle through (3,8) (4,7))"]


def test_pairings_json(capsys):
    code, out, _ = call(capsys, "pairings", P_EX_TEXT, "--total", "--json")
    rows = json.loads(out)["pairings"]
    assert [r["consistent"] for r in rows].count(False) == 1
    assert next(r for r in rows if not r["consistent"])["cycle"] == [[3, 8], [4, 7]]


def test_consistent_reports_the_maximal_subpairing(capsys):
    code, out, _ = call(capsys, "consistent", P_EX_TEXT, "--pairing", "9,5 1,0 2,6 3,8 4,7")
    assert code == 1
    assert "maximal consistent sub-pairing: [[0, 1], [2, 6], [5, 9]]" in out


def test_execute_and_errors(capsys):
    code, out, _ = call(capsys, "execute", P_EX_TEXT, "--steps", "9,5 1,0 2,6")
    assert code == 0 and "final: b^3.~a^4 | a^7.~b^8" in out
    code, _, err = call(capsys, "execute", P_EX_TEXT, "--steps", "2,6")
    assert code == 2 and "step 0" in err


def test_parse_error_carries_position(capsys):
    code, _, err = call(capsys, "parse", "a^1.(")
    assert code == 2 and "line 1, column 6" in err


def test_usage_errors(capsys):
    assert call(capsys)[0] == 2
    assert call(capsys, "frobnicate", "1")[0] == 2
    assert call(capsys, "congruent", "a^1")[0] == 2


def test_congruent(capsys):
    assert call(capsys, "congruent", "a^1 | b^2", "b^2 | a^1")[0] == 0
    assert call(capsys, "congruent", "a^1.b^2", "b^2.a^1")[0] == 1


def test_cap_exceeded_exit_code(capsys):
    code, _, err = call(capsys, "synthesize", P_EX_TEXT, "--variant", "async", "--cap-atoms", "4")
    assert code == 3 and "cap" in err


def test_proof_check_normalize_roundtrip(capsys, tmp_path):
    net_file = tmp_path / "net.json"
    dot_file = tmp_path / "net.dot"
    code, out, _ = call(capsys, "proof", "a^1 | ~a^2", "--variant", "async", "--dot", str(dot_file))
    assert code == 0 and dot_file.read_text().startswith("digraph")
    net_file.write_text(out)
    assert call(capsys, "check-net", str(net_file))[0] == 0
    assert call(capsys, "check-net", str(net_file), "--cap-switchings", "1000")[0] == 0
    code, out, _ = call(capsys, "normalize", str(net_file), "--json")
    assert code == 0 and json.loads(out)["pairs"] == []


def test_broken_net_is_a_negative_answer(capsys, tmp_path):
    code, out, _ = call(capsys, "proof", "1")
    data = json.loads(out)
    data["links"] = [l for l in data["links"] if l["kind"] != "ax"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, out, _ = call(capsys, "check-net", str(path))
    assert code == 1 and out.startswith("not a proof net")
    data = json.loads(call(capsys, "proof", "1")[1])
    for link in data["links"]:
        if link["kind"] == "par":
            link["kind"] = "tensor"
    path.write_text(json.dumps(data))
    code, out, _ = call(capsys, "check-net", str(path))
    assert code == 1 and out.startswith("not a proof net")


def test_schedule_file_feeds_replay_and_induced_pairing(capsys, tmp_path):
    code, out, _ = call(capsys, "synthesize", "a^1 | ~a^2", "--variant", "async", "--json")
    path = tmp_path / "s.json"
    path.write_text(json.dumps(json.loads(out)["schedule"]))
    code, out, _ = call(capsys, "replay", "a^1 | ~a^2", "--schedule", str(path))
    assert code == 0 and "final: 1" in out
    code, out, _ = call(capsys, "induced-pairing", "a^1 | ~a^2", "--schedule", str(path))
    assert code == 0 and out.strip() == "[[1, 2]]"


def test_roundtrip_verb(capsys):
    code, out, _ = call(capsys, "roundtrip", "a^1.b^2 | ~a^3 | ~b^4 | a^5")
    assert code == 0 and "MISMATCH" not in out and out.count("ok") == 2


@pytest.mark.parametrize("argv", [
    ("pairings", P_EX_TEXT, "--json"),
    ("reachable", "a^1 | ~a^2 | ~a^3"),
    ("synthesize", "a^1 | ~a^2", "--json"),
])
def test_reports_are_deterministic(capsys, argv):
    first = call(capsys, *argv)
    assert call(capsys, *argv) == first
