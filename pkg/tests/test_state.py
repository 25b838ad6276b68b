import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from ivref import state as st
from ivref.state import (
    NEG_INF,
    POS_INF,
    BudgetExceeded,
    State,
    Stream,
    StreamSet,
    Universe,
    UniverseError,
    apparent,
    cmp,
    enumerate_streams,
    eq,
    is_true,
    join_streams,
    matches,
    stream_count,
)
from ivref.time_core import EMPTY, Carrier, Interval, all_intervals

B = (False, True)


def test_infinity_order():
    dom = (NEG_INF, 0, 1, POS_INF)
    keys = [st.order_key(v) for v in dom]
    assert keys == sorted(keys)
    assert st.format_value(NEG_INF) == "-inf" and st.format_value(POS_INF) == "+inf"
    assert st.value_from_json(st.value_to_json(POS_INF)) is POS_INF


def test_universe_equality_is_type_aware():
    a = Universe.of([("x", (0, 1))])
    b = Universe.of([("x", (False, True))])
    assert a != b
    assert len({a, b}) == 2
    assert a == Universe.of({"x": [0, 1]})


def test_universe_rejects_bad_domains():
    with pytest.raises(UniverseError):
        Universe.of([("x", ())])
    with pytest.raises(UniverseError):
        Universe.of([("x", (0, 0))])
    with pytest.raises(UniverseError):
        Universe.of([("x", (0,)), ("x", (1,))])


def test_state_codes_roundtrip():
    u = Universe.of([("grd", B), ("m", (0, 1, 2))])
    assert u.n_states == 6
    for code in range(u.n_states):
        assert u.code_of(u.state_at(code)) == code


def test_matches():
    u = Universe.of([("x", (0, 1))])
    y = Stream.from_columns(u, {"x": [0, 1]})
    z = Stream.from_columns(u, {"x": [1, 1]})
    for d in all_intervals(Carrier(2)):
        assert matches(d, y, y)
    assert matches(EMPTY, y, z)
    assert not matches(Interval(0, 0), y, z)
    assert matches(Interval(1, 1), y, z)


def test_join_streams():
    w = Universe.of([("w", (0, 1))])
    x = Universe.of([("x", B)])
    s1 = Stream.from_columns(w, {"w": [0, 1, 1]})
    s2 = Stream.from_columns(x, {"x": [True, False, True]})
    j = join_streams(s1, s2)
    assert j.universe.names == ("w", "x")
    assert [s["w"] for s in j.states] == [0, 1, 1]
    assert [s["x"] for s in j.states] == [True, False, True]
    assert tuple(s.restrict(("w",)) for s in j.states) == s1.states


def test_join_with_empty_universe_is_identity():
    w = Universe.of([("w", (0, 1))])
    s1 = Stream.from_columns(w, {"w": [0, 1]})
    empty = Stream(Universe.empty(), (State((), ()), State((), ())))
    assert join_streams(s1, empty) == s1


def test_apparent_example(apparent_stream):
    got = {(s["u"], s["v"]) for s in apparent(Interval(0, 2), apparent_stream)}
    assert got == {(0, 0), (1, 1), (0, 1), (1, 0)}
    actual = {(s["u"], s["v"]) for s in apparent_stream.states}
    assert actual == {(0, 0), (1, 0), (1, 1)}


def test_apparent_singleton_constant_and_empty(apparent_stream):
    for t in range(3):
        assert apparent(Interval(t, t), apparent_stream) == {apparent_stream.at(t)}
    u = Universe.of([("a", (0, 1)), ("b", (0, 1, 2))])
    const = Stream.from_columns(u, {"a": [1, 1, 1], "b": [2, 2, 2]})
    for d in all_intervals(Carrier(3)):
        assert len(apparent(d, const)) == (0 if d.is_empty else 1)


def test_stream_counts():
    assert stream_count(Universe.of([("x", B)]), Carrier(2)) == 4
    assert stream_count(Universe.of([("x", B), ("y", B)]), Carrier(2)) == 16
    abs_rep = Universe.of([("grd", B), ("b", B), ("m", (0, 1, 2))])
    assert stream_count(abs_rep, Carrier(3)) == 12**3
    assert len(StreamSet.all(abs_rep, Carrier(3))) == 1728


def test_enumeration_is_exhaustive_and_ordered():
    u = Universe.of([("x", (0, 1, 2))])
    streams = list(enumerate_streams(u, Carrier(2)))
    cols = [tuple(s["x"] for s in z.states) for z in streams]
    assert sorted(set(cols)) == sorted(itertools.product((0, 1, 2), repeat=2))
    assert len(cols) == 9
    ss = StreamSet.all(u, Carrier(2))
    assert [ss.stream(i) for i in range(len(ss))] == streams


def test_budget_refusal():
    u = Universe.of([("x", (0, 1, 2))])
    with pytest.raises(BudgetExceeded) as exc:
        StreamSet.all(u, Carrier(4), budget=10)
    assert exc.value.size == 81
    with pytest.raises(BudgetExceeded):
        list(enumerate_streams(u, Carrier(4), budget=10))


def test_state_predicates():
    u = Universe.of([("u", (0, 1)), ("v", (0, 1))])
    s = State.of(u, {"u": 0, "v": 1})
    assert st.eval_state_pred(cmp("u", "<", "v"), s)
    for t in u.states():
        assert st.eval_state_pred(eq("v", "v"), t)
    g = Universe.of([("grd", B), ("u", (NEG_INF, 0, POS_INF))])
    assert st.free_vars(st.conj(cmp(0, "<", "u"), is_true("grd"))) == {"u", "grd"}
    assert st.eval_state_pred(cmp("u", "<", POS_INF), State.of(g, {"grd": True, "u": 0}))


def test_state_relations():
    y = Universe.of([("m", (0, 1))])
    z = Universe.of([("m", (0, 1))])
    r = st.Cmp("=", st.Ref("m", "L"), st.Ref("m", "R"))
    tm = st.truth_matrix(r, y, z)
    assert np.array_equal(tm, np.eye(2, dtype=bool))
    with pytest.raises(UniverseError):
        st.check_rel(st.Cmp("=", st.Ref("q", "L"), st.Ref("m", "R")), y, z)


def test_unknown_variable_rejected():
    u = Universe.of([("u", (0, 1))])
    with pytest.raises(UniverseError):
        st.check_pred(cmp("w", "<", 1), u)


@settings(max_examples=60, deadline=None)
@given(hs.integers(0, 2**32 - 1))
def test_truth_vector_agrees_with_scalar_eval(seed):
    import random

    from ivref.generate import random_state_expr, random_universe

    rng = random.Random(seed)
    u = random_universe(rng, 2, 3)
    e = random_state_expr(rng, u, 2)
    vec = st.truth_vector(e, u)
    for code, s in enumerate(u.states()):
        assert vec[code] == st.eval_state_pred(e, s)
