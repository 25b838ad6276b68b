import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as hs

from ivref.time_core import (
    EMPTY,
    Carrier,
    Interval,
    IntervalClass,
    MalformedInterval,
    adjoins,
    all_intervals,
    classify,
    interval_table,
    parse_interval,
    preceders,
    splits_of,
)


def R(a, b):
    return Interval(a, b)


def test_classify():
    assert classify(EMPTY, Carrier(4)) is IntervalClass.EMPTY
    assert classify(EMPTY, Carrier(4, True)) is IntervalClass.EMPTY
    assert classify(R(0, 3), Carrier(4, True)) is IntervalClass.INFINITE
    assert classify(R(1, 2), Carrier(4, True)) is IntervalClass.FINITE
    assert classify(R(0, 3), Carrier(4, False)) is IntervalClass.FINITE


def test_adjoins_examples():
    assert adjoins(R(1, 2), R(3, 5))
    assert adjoins(EMPTY, R(0, 3))
    assert adjoins(R(0, 3), EMPTY)
    assert not adjoins(R(1, 3), R(3, 5))
    assert not adjoins(R(1, 1), R(3, 5))
    assert not adjoins(R(3, 5), R(1, 2))


def test_splits_examples():
    assert splits_of(R(1, 2)) == [(EMPTY, R(1, 2)), (R(1, 1), R(2, 2)), (R(1, 2), EMPTY)]
    assert splits_of(EMPTY) == [(EMPTY, EMPTY)]
    assert splits_of(R(0, 0)) == [(EMPTY, R(0, 0)), (R(0, 0), EMPTY)]


def _brute_splits(d, H):
    ivs = all_intervals(Carrier(H))
    return {
        (a, b)
        for a, b in itertools.product(ivs, ivs)
        if adjoins(a, b) and set(a) | set(b) == set(d) and not (set(a) & set(b))
    }


@pytest.mark.parametrize("H", [1, 2, 3, 4])
def test_splits_match_brute_force(H):
    for d in all_intervals(Carrier(H)):
        assert set(splits_of(d)) == _brute_splits(d, H)


def test_preceders_examples():
    assert set(preceders(R(2, 3), Carrier(4))) == {EMPTY, R(0, 1), R(1, 1)}
    assert set(preceders(R(0, 1), Carrier(4))) == {EMPTY}
    assert set(preceders(EMPTY, Carrier(2))) == {EMPTY, R(0, 0), R(0, 1), R(1, 1)}


@given(hs.integers(1, 6), hs.data())
def test_preceders_are_adjoining(H, data):
    c = Carrier(H)
    ivs = all_intervals(c)
    d = data.draw(hs.sampled_from(ivs))
    assert set(preceders(d, c)) == {d0 for d0 in ivs if adjoins(d0, d)}


def test_all_intervals_counts():
    assert all_intervals(Carrier(1)) == [EMPTY, R(0, 0)]
    assert set(all_intervals(Carrier(2))) == {EMPTY, R(0, 0), R(0, 1), R(1, 1)}
    assert len(all_intervals(Carrier(4))) == 11
    for H in range(1, 8):
        assert len(all_intervals(Carrier(H))) == 1 + H * (H + 1) // 2


def test_interval_table_indices():
    c = Carrier(3, True)
    it = interval_table(c)
    assert it.intervals[it.empty_index] == EMPTY
    for k, d in enumerate(it.intervals):
        assert it.index[d] == k
        assert {(it.intervals[a], it.intervals[b]) for a, b in it.splits[k]} == set(splits_of(d))
        assert {it.intervals[j] for j in it.preceders[k]} == set(preceders(d, c))
        assert it.infinite[k] == (classify(d, c) is IntervalClass.INFINITE)


def test_malformed_intervals():
    with pytest.raises(MalformedInterval):
        Interval(2, 1)
    with pytest.raises(MalformedInterval):
        Interval(0, None)
    with pytest.raises(MalformedInterval):
        parse_interval("3-4")
    assert parse_interval("empty") == EMPTY
    assert parse_interval(" 1..2 ") == R(1, 2)


def test_sort_key_orders_by_size_then_position():
    ivs = sorted(all_intervals(Carrier(3)), key=lambda d: d.sort_key())
    assert ivs[0] == EMPTY
    assert ivs[1:4] == [R(0, 0), R(1, 1), R(2, 2)]
    assert ivs[-1] == R(0, 2)
