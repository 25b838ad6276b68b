"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line; run with ``-s`` (or as a
script) to see them.  Criteria 1, 2 and 7 share one CLI run per bundled file.
"""

import json
import pathlib
import random
import time

import pytest

from ivref import cli, dsl
from ivref import generate as gen
from ivref import intv_pred as ip
from ivref import laws as lw
from ivref import refine as rf
from ivref.state import Cmp, Ref, Stream, Universe, apparent, eval_state_pred
from ivref.time_core import Carrier, Interval, all_intervals

GOLDEN = pathlib.Path(__file__).parent / "golden"
BUNDLED = ["running_example", "mutated_example", "programs"]

RUNNING_OBLIGATIONS = ["init", "simulation", "vdash", "ref2", "final", "ref2 cq/aq", "ref2 cp/ap"]


def verdict_line(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {n}: {detail}"
    print(line, flush=True)
    return ok


@pytest.fixture(scope="module")
def cli_runs(capsys_module):
    out = {}
    for name in BUNDLED:
        start = time.perf_counter()
        code, text = capsys_module(["check", f"../../src/ivref/bundled/{name}.ivdl", "--json"])
        out[name] = (code, text, time.perf_counter() - start)
    return out


@pytest.fixture(scope="module")
def capsys_module():
    import contextlib
    import io
    import os

    def run(argv):
        buf = io.StringIO()
        cwd = os.getcwd()
        os.chdir(GOLDEN)
        try:
            with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
                code = cli.main(argv)
        finally:
            os.chdir(cwd)
        return code, buf.getvalue()

    return run


def test_criterion_1_running_example_obligations(cli_runs):
    code, text, secs = cli_runs["running_example"]
    results = {d["name"]: d["verdict"] for d in json.loads(text)["directives"]}
    prefix = "obligations Abs Conc via uv: "
    failed = [label for label in RUNNING_OBLIGATIONS if results.get(prefix + label) != "pass"]
    ok = not failed and secs <= 300
    verdict_line(1, ok, f"obligations {', '.join(RUNNING_OBLIGATIONS)} at H=3 ({secs:.0f}s; failed: {failed or 'none'})")
    assert ok


def test_criterion_2_data_refinement(cli_runs):
    code, text, _ = cli_runs["running_example"]
    results = {d["name"]: d["verdict"] for d in json.loads(text)["directives"]}
    refines = results["refinement Abs Conc"] == "pass"
    mutated = dsl.load(dsl.bundled("mutated_example.ivdl"))
    v = rf.check_data_refinement(mutated.systems["Abs"], mutated.systems["Conc"], mutated.carrier)
    witness = v.counterexample is not None and rf.replay_observation(mutated.systems["Conc"], v.counterexample)
    ok = refines and not v.passed and witness
    verdict_line(
        2, ok, f"Conc refines Abs: {refines}; mutated rejected with replayable witness: {not v.passed and witness}"
    )
    assert ok


def test_criterion_3_law_suite():
    start = time.perf_counter()
    report = lw.run_all(1000, seed=1)
    secs = time.perf_counter() - start
    bad = [r.law_id for r in report.reports if r.status != "pass"]
    short = [r.law_id for r in report.reports if r.polarity == lw.LAW and r.checked < 1000]
    ok = report.ok and not short and secs <= 900
    verdict_line(3, ok, f"{len(report.reports)} laws x 1000 instances in {secs:.0f}s; not passing: {bad or 'none'}")
    assert ok


def test_criterion_4_soundness():
    rep = lw.run_law("soundness", budget=500, seed=4)
    ok = rep.checked >= 500 and rep.failures == 0
    verdict_line(4, ok, f"{rep.checked} triples with forward simulation, {rep.failures} data-refinement violations")
    assert ok


def test_criterion_5_apparent_example():
    start = time.perf_counter()
    u = Universe.of([("u", (0, 1)), ("v", (0, 1))])
    s = Stream.from_columns(u, {"u": [0, 1, 1], "v": [0, 0, 1]})
    c, delta = Carrier(3), Interval(0, 2)
    states = {(x["u"], x["v"]) for x in apparent(delta, s)}
    lt = Cmp("<", Ref("u"), Ref("v"))
    vv = Cmp("=", Ref("v"), Ref("v"))
    checks = [
        states == {(0, 0), (1, 1), (0, 1), (1, 0)},
        ip.eval(ip.Possibly(lt), delta, s, c) is True,
        ip.eval(ip.Sometime(lt), delta, s, c) is False,
        ip.eval(ip.Possibly(vv), delta, s, c) is True,
        {eval_state_pred(vv, x) for x in apparent(delta, s)} == {True},
    ]
    secs = time.perf_counter() - start
    ok = all(checks) and secs < 1
    verdict_line(5, ok, f"apparent states {sorted(states)}; checks {checks} in {secs * 1000:.0f}ms")
    assert ok


def test_criterion_6_evaluator_coherence():
    rng = random.Random(6)
    disagree = over = 0
    for _ in range(10_000):
        u = gen.random_universe(rng)
        c = Carrier(rng.randint(1, 3), rng.random() < 0.5)
        s = gen.random_stream(rng, u, c)
        g = gen.random_term(rng, u, 3)
        delta = rng.choice(all_intervals(c))
        ev = ip.Evaluator(s, c)
        if ev(g, delta) != ip.eval_naive(g, delta, s, c):
            disagree += 1
        bound = len(all_intervals(c))
        over += sum(1 for rounds in ev.omega_iterations.values() if rounds > bound)
    ok = disagree == 0 and over == 0
    verdict_line(6, ok, f"10000 triples: {disagree} disagreements, {over} omega runs over the iteration bound")
    assert ok


def test_criterion_7_cli_contract(cli_runs, capsys_module):
    mismatched = [n for n in BUNDLED if cli_runs[n][1] != (GOLDEN / f"{n}.json").read_text()]
    codes = {
        0: cli_runs["programs"][0],
        1: cli_runs["mutated_example"][0],
        2: capsys_module(["laws", "--law", "no-such-law"])[0],
        3: capsys_module(["check", "../../src/ivref/bundled/running_example.ivdl", "--budget", "10"])[0],
    }
    ok = not mismatched and all(k == v for k, v in codes.items()) and cli_runs["running_example"][0] == 0
    verdict_line(7, ok, f"golden mismatches: {mismatched or 'none'}; exit codes expected->got {codes}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
