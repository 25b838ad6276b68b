import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from ivref import generate as gen
from ivref import intv_pred as ip
from ivref.intv_pred import (
    Always,
    Chop,
    Definitely,
    EmptyP,
    Evaluator,
    Lit,
    NonEmpty,
    Omega,
    Possibly,
    PredTable,
    Sometime,
)
from ivref.state import TRUE, Stream, StreamSet, Universe, UniverseError, cmp, eq, is_true
from ivref.time_core import EMPTY, Carrier, Interval, all_intervals

B = (False, True)


def test_empty_interval_always_vs_sometime(apparent_stream):
    c = cmp("u", "<", "v")
    assert ip.eval(Always(c), EMPTY, apparent_stream)
    assert not ip.eval(Sometime(c), EMPTY, apparent_stream)
    assert ip.eval(Definitely(c), EMPTY, apparent_stream)
    assert not ip.eval(Possibly(c), EMPTY, apparent_stream)


def test_apparent_state_guards(apparent_stream):
    full = Interval(0, 2)
    u_lt_v = cmp("u", "<", "v")
    assert ip.eval(Possibly(u_lt_v), full, apparent_stream)
    assert not ip.eval(Sometime(u_lt_v), full, apparent_stream)
    assert ip.eval(Possibly(eq("v", "v")), full, apparent_stream)
    assert not ip.eval(Possibly(~eq("v", "v")), full, apparent_stream)


def test_omega_of_nonempty_true_partitions_into_points():
    u = Universe.of([("x", B)])
    s = Stream.from_columns(u, {"x": [True, False, True]})
    g = Omega(NonEmpty(Always(TRUE)))
    assert ip.eval_naive(g, Interval(0, 2), s)
    assert ip.eval(g, Interval(0, 2), s)


def test_omega_iterations_bounded():
    rng = random.Random(7)
    for _ in range(200):
        u = gen.random_universe(rng)
        c = Carrier(rng.randint(1, 4), rng.random() < 0.5)
        s = gen.random_stream(rng, u, c)
        g = Omega(gen.random_term(rng, u, 2))
        ev = Evaluator(s, c)
        ev(g, EMPTY)
        assert ev.omega_iterations[g] <= len(all_intervals(c))
        tab = PredTable(StreamSet.of([s], c))
        tab(g)
        assert tab.omega_rounds[g] <= len(all_intervals(c))


def test_chop_on_infinite_interval():
    u = Universe.of([("x", B)])
    s = Stream.from_columns(u, {"x": [True, True]})
    g = Chop(Always(is_true("x")), Lit(False))
    assert ip.eval(g, Interval(0, 1), s, Carrier(2, True))
    assert not ip.eval(g, Interval(0, 1), s, Carrier(2, False))
    assert not ip.eval(g, Interval(0, 0), s, Carrier(2, True))


def test_chop_units():
    rng = random.Random(3)
    for _ in range(30):
        u = gen.random_universe(rng)
        c = Carrier(rng.randint(1, 3))
        g = gen.random_term(rng, u, 2)
        assert ip.check_equivalent(Chop(EmptyP(), g), g, u, c)
        assert ip.check_equivalent(Chop(g, EmptyP()), g, u, c)


def test_prev_and_stability():
    u = Universe.of([("x", (0, 1))])
    s = Stream.from_columns(u, {"x": [1, 1, 0]})
    assert ip.eval(ip.PrevHolds(eq("x", 1)), Interval(1, 1), s)
    assert not ip.eval(ip.PrevHolds(eq("x", 1)), Interval(0, 0), s)
    assert ip.eval(ip.StableVar("x"), Interval(1, 1), s)
    assert not ip.eval(ip.StableVar("x"), Interval(1, 2), s)
    assert not ip.eval(ip.StableVar("x"), Interval(2, 2), s)
    assert ip.eval(ip.StableSet(()), Interval(0, 0), s)
    assert ip.eval(ip.PrevP(NonEmpty(Always(eq("x", 1)))), Interval(2, 2), s)


def test_empty_interval_preceded_by_everything():
    u = Universe.of([("x", (0, 1))])
    s = Stream.from_columns(u, {"x": [0, 0, 1]})
    assert ip.eval(ip.PrevHolds(eq("x", 1)), EMPTY, s)


def test_definitely_implies_always():
    u = Universe.of([("u", (0, 1)), ("v", (0, 1))])
    rng = random.Random(11)
    for _ in range(20):
        c = gen.random_state_expr(rng, u, 2)
        assert ip.check_valid_implication(Definitely(c), Always(c), u, Carrier(3))
        assert ip.check_valid_implication(Sometime(c), Possibly(c), u, Carrier(3))


def test_always_does_not_imply_definitely():
    u = Universe.of([("u", (0, 1)), ("v", (0, 1))])
    c = ~cmp("u", "<", "v")
    v = ip.check_valid_implication(Always(c), Definitely(c), u, Carrier(3))
    assert not v
    cex = v.counterexample
    s, d = cex.streams["s"], cex.intervals["delta"]
    assert ip.eval(Always(c), d, s, cex.carrier)
    assert not ip.eval(Definitely(c), d, s, cex.carrier)


def test_implication_reflexive():
    u = Universe.of([("x", (0, 1, 2))])
    rng = random.Random(5)
    for _ in range(20):
        g = gen.random_term(rng, u, 3)
        assert ip.check_valid_implication(g, g, u, Carrier(3))


def test_splits_and_joins_examples():
    u = Universe.of([("x", (0, 1))])
    c = Carrier(3)
    for e in (eq("x", 0), ~eq("x", 0), TRUE):
        assert ip.check_splits(Always(e), u, c)
    assert ip.check_joins(Always(TRUE), u, c)
    # the greatest fixed point lets an empty first segment repeat forever
    assert not ip.check_joins(Always(eq("x", 0)), u, c)
    assert ip.check_joins(NonEmpty(Always(eq("x", 0))), u, c)
    v = ip.check_splits(Sometime(eq("x", 0)), u, c)
    assert not v and v.counterexample.intervals["delta"] == Interval(0, 0)
    assert ip.check_splits(Lit(True), u, c) and ip.check_joins(Lit(True), u, c)


def test_guard_normalisation():
    assert ip.normalize_guard(is_true("grd")) == Possibly(is_true("grd"))
    u = Universe.of([("x", B)])
    assert ip.check_equivalent(Possibly(TRUE), NonEmpty(Lit(True)), u, Carrier(3))


def test_ill_formed_terms_rejected():
    u = Universe.of([("x", B)])
    s = Stream.from_columns(u, {"x": [True]})
    with pytest.raises(UniverseError):
        ip.eval(Always(is_true("y")), Interval(0, 0), s)
    with pytest.raises(UniverseError):
        ip.eval(ip.StableVar("y"), Interval(0, 0), s)


def test_format_term_precedence():
    x = is_true("x")
    g = ip.Or(Chop(Possibly(x), NonEmpty(Always(eq("m", 1)))), ip.And(Sometime(~x), EmptyP()))
    assert ip.format_term(g) == "possibly x ; ne always (m = 1) or sometime !x and empty"
    assert ip.format_term(NonEmpty(Chop(Lit(True), Lit(False)))) == "ne (true ; false)"
    assert ip.format_term(Chop(Chop(EmptyP(), EmptyP()), EmptyP())) == "(empty ; empty) ; empty"


@settings(max_examples=150, deadline=None)
@given(hs.integers(0, 2**32 - 1))
def test_three_evaluators_agree(seed):
    rng = random.Random(seed)
    u = gen.random_universe(rng)
    c = Carrier(rng.randint(1, 3), rng.random() < 0.3)
    g = gen.random_term(rng, u, rng.randint(0, 3))
    streams = [gen.random_stream(rng, u, c) for _ in range(3)]
    tab = PredTable(StreamSet.of(streams, c))(g)
    for row, s in enumerate(streams):
        ev = Evaluator(s, c)
        for k, d in enumerate(all_intervals(c)):
            want = ip.eval_naive(g, d, s, c)
            assert ev(g, d) == want
            assert bool(tab[row, k]) == want


def test_generator_coverage_and_determinism():
    u = Universe.of([("x", (0, 1)), ("y", B)])
    terms = [t for t, _ in zip(gen.generate_terms(u, 3, seed=1), range(1000))]
    kinds = {type(s) for t in terms for s in ip.subterms(t)}
    assert {ip.Chop, ip.Omega, ip.PrevP} <= kinds
    again = [t for t, _ in zip(gen.generate_terms(u, 3, seed=1), range(1000))]
    assert terms == again
    atoms = (Always, Sometime, Definitely, Possibly, EmptyP, Lit)
    for t, _ in zip(gen.generate_terms(u, 0, seed=2), range(200)):
        assert isinstance(t, atoms)
    with pytest.raises(ValueError):
        next(gen.generate_terms(u, 5))
