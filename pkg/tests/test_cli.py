import json
import pathlib

import pytest

from ivref import cli, dsl

GOLDEN = pathlib.Path(__file__).parent / "golden"

TOY = """carrier 3 closed
var x : {0, 1}
var f : {false, true}
observable X : {0, 1}
pred up (x) = possibly (x = 1)
pred all (x) = sometime (x = 1)
pred steady (x) = always (x = 0)
pred split (x) = always (x = 0) ; always (x = 1)
system S {
  vars x
  init true
  process p = ne always (x = 1)
  final x = X
}
check valid steady
"""


@pytest.fixture
def toy(tmp_path):
    p = tmp_path / "toy.ivdl"
    p.write_text(TOY)
    return str(p)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_programs_golden(capsys, monkeypatch):
    monkeypatch.chdir(GOLDEN)
    code, out, _ = run(capsys, "check", "../../src/ivref/bundled/programs.ivdl", "--json")
    assert code == 0
    assert out == (GOLDEN / "programs.json").read_text()


def test_check_failure_exit_and_text(capsys, toy):
    code, out, _ = run(capsys, "check", toy)
    assert code == 1
    assert out.splitlines()[0] == "FAIL  valid steady"
    assert out.rstrip().endswith("0 passed, 1 failed")


def test_parse_error_exit(capsys, tmp_path):
    p = tmp_path / "bad.ivdl"
    p.write_text("carrier 2 closed\nvar x : {0\n")
    code, _, err = run(capsys, "check", str(p))
    assert code == 2
    assert err.startswith("bad.ivdl:3:1: syntax error")
    assert "expected:" in err


def test_missing_file_exit(capsys, tmp_path):
    code, _, err = run(capsys, "check", str(tmp_path / "nope.ivdl"))
    assert code == 2 and err.startswith("error:")


def test_budget_refusal_exit(capsys):
    code, _, err = run(capsys, "check", dsl.bundled("running_example.ivdl"), "--budget", "10")
    assert code == 3 and "budget refused" in err


def test_horizon_override_is_deterministic(capsys):
    args = ("check", dsl.bundled("running_example.ivdl"), "--horizon", "1", "--json")
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first[:2] == second[:2]
    assert "warning: horizon 1" in first[2]
    report = json.loads(first[1])
    assert report["file"] == "running_example.ivdl"
    assert all(d["runtime_ms"] is None for d in report["directives"])


def test_laws_negative_control(capsys):
    code, out, _ = run(capsys, "laws", "--law", "seq-comp-no-joins")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("pass") and "failures=1" in lines[0]
    assert lines[-1] == "ok"
    assert len(lines) > 2


def test_laws_json_and_errors(capsys):
    code, out, _ = run(capsys, "laws", "--law", "refl", "--budget", "5", "--json", "--seed", "4")
    report = json.loads(out)
    assert code == 0 and report["seed"] == 4 and report["laws"][0]["checked"] == 5
    assert run(capsys, "laws", "--law", "no-such")[0] == 2
    assert run(capsys, "laws", "--depth", "9")[0] == 2
    code, out, _ = run(capsys, "laws", "--list")
    assert code == 0 and "chop-assoc" in out


@pytest.mark.parametrize(
    "pred, stream, interval, expected",
    [
        ("up", "x=0,1,1", "0..1", 0),
        ("all", "x=0,1,1", "0..0", 1),
        ("steady", "x=1,1,1", "empty", 0),
        ("up", "x=1,1,1", "empty", 1),
        ("S.p", "x=0,1,1", "1..2", 0),
    ],
)
def test_eval_exit_codes(capsys, toy, pred, stream, interval, expected):
    code, out, _ = run(capsys, "eval", toy, "--pred", pred, "--stream", stream, "--interval", interval)
    assert code == expected
    assert out.splitlines()[-1].endswith("true" if expected == 0 else "false")


def test_eval_trace_and_json(capsys, toy):
    code, out, _ = run(capsys, "eval", toy, "--pred", "split", "--stream", "x=0,1,1", "--trace")
    assert code == 0
    assert any(line.strip().startswith("split [0,0] | [1,2]: true ; true") for line in out.splitlines())
    code, out, _ = run(capsys, "eval", toy, "--pred", "up", "--stream", "3", "--json")
    report = json.loads(out)
    assert report["pred"] == "up" and isinstance(report["value"], bool)


@pytest.mark.parametrize(
    "argv",
    [
        ["--pred", "nope"],
        ["--pred", "up", "--stream", "x=0,1"],
        ["--pred", "up", "--stream", "x=0,2,1"],
        ["--pred", "up", "--stream", "99"],
        ["--pred", "up", "--interval", "1..5"],
        ["--pred", "up", "--interval", "junk"],
    ],
)
def test_eval_input_errors(capsys, toy, argv):
    assert run(capsys, "eval", toy, *argv)[0] == 2
