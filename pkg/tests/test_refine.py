import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from ivref import generate as gen
from ivref import intv_pred as ip
from ivref import intv_rel as ir
from ivref import refine as rf
from ivref import state as st
from ivref.intv_pred import Always, Lit, NonEmpty, Sometime
from ivref.intv_rel import AlwaysRel, LitR, NonEmptyRel
from ivref.refine import ObsPair, SystemSpec
from ivref.state import BudgetExceeded, Cmp, Ref, Universe, UniverseError, enumerate_streams, eq
from ivref.time_core import Carrier, all_intervals, preceders

M_OBS = Universe.of([("M", (0, 1, 2))])
FINAL = Cmp("=", Ref("m", "L"), Ref("M", "R"))


def _system(name, rep, op, init, final=FINAL, obs=M_OBS, rely=None):
    return SystemSpec(name, obs, rep, init, {"p": op}, final, rely)


def naive_obs(system, c):
    out = set()
    for z in enumerate_streams(system.rep, c):
        for rho in system.obs.states():
            g = ip.And(ip.PrevP(system.init_for(rho)), system.behaviour())
            for d in all_intervals(c):
                if not ip.eval_naive(g, d, z, c):
                    continue
                for t in d:
                    for post in system.obs.states():
                        if st.eval_state_rel(system.final, z.at(t), post):
                            out.add(ObsPair(rho, post))
    return out


def naive_simulates(ref, g, h, yu, zu, c):
    ys = list(enumerate_streams(yu, c))
    for z in enumerate_streams(zu, c):
        for d in all_intervals(c):
            if not ip.eval_naive(h, d, z, c):
                continue
            for d0 in preceders(d, c):
                for y0 in ys:
                    if not ir.eval_rel(ref, d0, y0, z, c):
                        continue
                    if not any(
                        st.matches(d0, y0, y)
                        and (g is None or ip.eval_naive(g, d, y, c))
                        and ir.eval_rel(ref, d, y, z, c)
                        for y in ys
                    ):
                        return False
    return True


def test_obs_set_single_assignment():
    rep = Universe.of([("m", (0, 1, 2))])
    sysm = _system("S", rep, NonEmpty(Always(eq("m", 1))), NonEmpty(Always(eq("m", 0))))
    c = Carrier(3)
    got = rf.obs_set(sysm, c)
    assert got == naive_obs(sysm, c)
    assert {p.post["M"] for p in got} == {1}
    assert {p.pre["M"] for p in got} == {0, 1, 2}


def test_obs_set_of_false_process_is_empty():
    rep = Universe.of([("m", (0, 1))])
    assert rf.obs_set(_system("S", rep, Lit(False), Lit(True)), Carrier(2)) == frozenset()


def test_abstract_obs_golden(running):
    import json
    import pathlib

    golden = json.loads((pathlib.Path(__file__).parent / "golden" / "abstract_obs.json").read_text())
    got = sorted([p.pre["M"], p.post["M"]] for p in rf.obs_set(running.systems["Abs"], running.carrier))
    assert got == golden


def test_data_refinement_reflexive_and_failing():
    rep = Universe.of([("m", (0, 1, 2))])
    one = _system("One", rep, NonEmpty(Always(eq("m", 1))), Lit(True))
    two = _system("Two", rep, NonEmpty(Always(eq("m", 2))), Lit(True))
    c = Carrier(2)
    assert rf.check_data_refinement(one, one, c)
    v = rf.check_data_refinement(one, two, c)
    assert not v
    cex = v.counterexample
    assert cex.states["rho_post"]["M"] == 2
    assert rf.replay_observation(two, cex)
    assert not rf.replay_observation(one, cex)


def test_data_refinement_needs_same_observables():
    rep = Universe.of([("m", (0, 1))])
    a = _system("A", rep, Lit(True), Lit(True), obs=Universe.of([("M", (0, 1))]))
    b = _system("B", rep, Lit(True), Lit(True), obs=Universe.of([("M", (0, 1, 2))]))
    with pytest.raises(UniverseError):
        rf.check_data_refinement(a, b, Carrier(1))


def test_system_spec_validation():
    rep = Universe.of([("M", (0, 1))])
    with pytest.raises(UniverseError):
        _system("S", rep, Lit(True), Lit(True), final=st.TRUE)
    with pytest.raises(UniverseError):
        SystemSpec("S", M_OBS, Universe.of([("m", (0, 1))]), Lit(True), {}, FINAL)
    with pytest.raises(UniverseError):
        _system("S", Universe.of([("m", (0, 1))]), Always(eq("q", 0)), Lit(True))


def test_simulation_reflexive():
    X = Universe.of([("x", (0, 1))])
    idr = AlwaysRel(ir.identity(X))
    rng = random.Random(2)
    for _ in range(5):
        g = gen.random_term(rng, X, 2, local=True)
        assert rf.check_simulates(idr, g, g, X, X, Carrier(2))


def test_simulation_failure_replays():
    X = Universe.of([("x", (0, 1))])
    idr = AlwaysRel(ir.identity(X))
    h = NonEmpty(Always(eq("x", 0)))
    g = NonEmpty(Sometime(eq("x", 1)))
    v = rf.check_simulates(idr, g, h, X, X, Carrier(3))
    assert not v
    cex = v.counterexample
    assert cex.carrier.horizon == 1
    assert rf.replay_simulation(idr, g, h, cex, X)
    assert not naive_simulates(idr, g, h, X, X, Carrier(2))


def test_vdash_examples():
    X = Universe.of([("x", (0, 1))])
    Y = Universe.of([("y", (0, 1))])
    c = Carrier(2)
    rng = random.Random(8)
    for _ in range(5):
        h = gen.random_term(rng, X, 2, local=True)
        assert rf.check_vdash(h, LitR(True), Y, X, c)
    never = NonEmptyRel(AlwaysRel(Cmp("<", Ref("y", "L"), Ref("x", "R"))))
    v = rf.check_vdash(Lit(True), never, Y, X, c)
    assert not v
    assert rf.replay_simulation(never, None, Lit(True), v.counterexample, Y)


def test_ref2_identity():
    X = Universe.of([("x", (0, 1, 2))])
    idr = AlwaysRel(ir.identity(X))
    g = ip.Chop(ip.Possibly(eq("x", 1)), NonEmpty(Always(eq("x", 2))))
    assert rf.check_ref2(idr, g, g, X, X, Carrier(3))
    v = rf.check_ref2(idr, g, NonEmpty(Always(eq("x", 2))), X, X, Carrier(3))
    assert not v


def test_final_clause_toy():
    Y = Universe.of([("m", (0, 1, 2))])
    Z = Universe.of([("m", (0, 1, 2)), ("k", (0, 1))])
    a = _system("A", Y, NonEmpty(Always(eq("m", 1))), Lit(True))
    cz = _system("C", Z, NonEmpty(Always(eq("m", 1))), Lit(True))
    link = AlwaysRel(Cmp("=", Ref("m", "L"), Ref("m", "R")))
    c = Carrier(2)
    assert rf.check_final(link, a, cz, c)
    # same answer without the invariant shortcut
    assert rf.check_final(ip_or_rel(link), a, cz, c)
    v = rf.check_final(LitR(True), a, cz, c)
    assert not v and v.counterexample.clause == "final"


def ip_or_rel(R):
    # a relation equivalent to R that the invariant shortcut cannot see through
    return ir.OrR(R, LitR(False))


def test_forward_simulation_toy_and_soundness():
    Y = Universe.of([("m", (0, 1, 2))])
    a = _system("A", Y, NonEmpty(Always(eq("m", 1))), Lit(True))
    link = AlwaysRel(Cmp("=", Ref("m", "L"), Ref("m", "R")))
    c = Carrier(2)
    v = rf.check_forward_simulation(link, a, a, c)
    assert v
    assert rf.check_data_refinement(a, a, c)
    bad = rf.check_forward_simulation(LitR(True), a, a, c)
    assert not bad and bad.stats["failed_clause"] == "final"


def test_budget_refusal():
    X = Universe.of([("x", (0, 1, 2))])
    idr = AlwaysRel(ir.identity(X))
    with pytest.raises(BudgetExceeded):
        rf.check_simulates(idr, Lit(True), Lit(True), X, X, Carrier(3), budget=10)


def test_parallel_search_is_deterministic():
    X = Universe.of([("x", (0, 1))])
    idr = AlwaysRel(ir.identity(X))
    h = NonEmpty(Always(eq("x", 0)))
    g = NonEmpty(Sometime(eq("x", 1)))
    one = rf.check_simulates(idr, g, h, X, X, Carrier(3), jobs=1, shrink=False)
    two = rf.check_simulates(idr, g, h, X, X, Carrier(3), jobs=2, shrink=False)
    assert one.counterexample.to_json() == two.counterexample.to_json()


@settings(max_examples=40, deadline=None)
@given(hs.integers(0, 2**32 - 1))
def test_simulation_agrees_with_definition(seed):
    rng = random.Random(seed)
    yu = gen.random_universe(rng, 1, 2, prefix="y")
    zu = gen.random_universe(rng, 1, 2, prefix="z")
    c = Carrier(rng.randint(1, 2), rng.random() < 0.3)
    ref = gen.random_rel_term(rng, yu, zu, 1)
    g = gen.random_term(rng, yu, 2, local=True)
    h = gen.random_term(rng, zu, 2, local=True)
    v = rf.check_simulates(ref, g, h, yu, zu, c)
    assert v.passed == naive_simulates(ref, g, h, yu, zu, c)
    if not v:
        assert rf.replay_simulation(ref, g, h, v.counterexample, yu)


@settings(max_examples=25, deadline=None)
@given(hs.integers(0, 2**32 - 1))
def test_obs_set_agrees_with_definition(seed):
    rng = random.Random(seed)
    rep = Universe.of([("m", (0, 1, 2))])
    obs = Universe.of([("M", (0, 1, 2))])
    c = Carrier(rng.randint(1, 2))
    sysm = SystemSpec("S", obs, rep, gen.random_term(rng, rep, 1), {"p": gen.random_term(rng, rep, 2)}, FINAL)
    assert rf.obs_set(sysm, c) == naive_obs(sysm, c)
