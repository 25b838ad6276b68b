"""Discrete time carriers and intervals.

A carrier is the finite timeline ``0 .. horizon-1``.  When ``open_ended`` is
set the carrier stands for a prefix of an unbounded timeline, and intervals
reaching the last point are treated as having an infinite upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterator, Optional


class MalformedInterval(ValueError):
    pass


@dataclass(frozen=True)
class Carrier:
    horizon: int
    open_ended: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ValueError(f"carrier horizon must be a positive integer, got {self.horizon!r}")

    @property
    def points(self) -> range:
        return range(self.horizon)

    def __str__(self) -> str:
        return f"carrier {self.horizon} {'open' if self.open_ended else 'closed'}"


@dataclass(frozen=True, order=True)
class Interval:
    """Closed range ``[lo, hi]``; ``Interval.empty()`` is the unique empty interval."""

    lo: Optional[int] = None
    hi: Optional[int] = None

    def __post_init__(self) -> None:
        if (self.lo is None) != (self.hi is None):
            raise MalformedInterval("interval needs both bounds or neither")
        if self.lo is not None and not (0 <= self.lo <= self.hi):
            raise MalformedInterval(f"bad interval bounds [{self.lo},{self.hi}]")

    @staticmethod
    def empty() -> "Interval":
        return EMPTY

    @staticmethod
    def range(lo: int, hi: int) -> "Interval":
        return Interval(lo, hi)

    @property
    def is_empty(self) -> bool:
        return self.lo is None

    def __len__(self) -> int:
        return 0 if self.lo is None else self.hi - self.lo + 1

    def __iter__(self) -> Iterator[int]:
        if self.lo is None:
            return iter(())
        return iter(range(self.lo, self.hi + 1))

    def __contains__(self, t: object) -> bool:
        return self.lo is not None and isinstance(t, int) and self.lo <= t <= self.hi

    def within(self, carrier: Carrier) -> bool:
        return self.lo is None or self.hi < carrier.horizon

    def check(self, carrier: Carrier) -> None:
        if not self.within(carrier):
            raise MalformedInterval(f"{self} lies outside {carrier}")

    def sort_key(self) -> tuple:
        """Size first, then position; the empty interval sorts first."""
        return (len(self), -1 if self.lo is None else self.lo)

    def to_json(self):
        return "empty" if self.lo is None else [self.lo, self.hi]

    def __str__(self) -> str:
        return "empty" if self.lo is None else f"[{self.lo},{self.hi}]"

    __repr__ = __str__


EMPTY = Interval()


class IntervalClass(str, Enum):
    EMPTY = "empty"
    FINITE = "finite"
    INFINITE = "infinite"


def classify(delta: Interval, carrier: Carrier) -> IntervalClass:
    delta.check(carrier)
    if delta.is_empty:
        return IntervalClass.EMPTY
    if carrier.open_ended and delta.hi == carrier.horizon - 1:
        return IntervalClass.INFINITE
    return IntervalClass.FINITE


def is_infinite(delta: Interval, carrier: Carrier) -> bool:
    return classify(delta, carrier) is IntervalClass.INFINITE


def adjoins(d1: Interval, d2: Interval) -> bool:
    """True iff every point of ``d1`` precedes every point of ``d2`` and the union is contiguous."""
    if d1.is_empty or d2.is_empty:
        return True
    return d1.hi + 1 == d2.lo


def splits_of(delta: Interval) -> list[tuple[Interval, Interval]]:
    """All ``(d1, d2)`` with ``d1 ∪ d2 = delta`` and ``d1`` adjoining ``d2``, by size of ``d1``."""
    if delta.is_empty:
        return [(EMPTY, EMPTY)]
    out = [(EMPTY, delta)]
    for cut in range(delta.lo, delta.hi):
        out.append((Interval(delta.lo, cut), Interval(cut + 1, delta.hi)))
    out.append((delta, EMPTY))
    return out


def preceders(delta: Interval, carrier: Carrier) -> list[Interval]:
    """Intervals of the carrier that adjoin ``delta`` from the left.

    The empty interval is positionless, so every interval precedes it.
    """
    delta.check(carrier)
    if delta.is_empty:
        return all_intervals(carrier)
    return [EMPTY] + [Interval(a, delta.lo - 1) for a in range(delta.lo)]


@lru_cache(maxsize=None)
def _all_intervals(horizon: int) -> tuple[Interval, ...]:
    return (EMPTY,) + tuple(Interval(lo, hi) for lo in range(horizon) for hi in range(lo, horizon))


def all_intervals(carrier: Carrier) -> list[Interval]:
    """The empty interval followed by every range, ordered by ``(lo, hi)``."""
    return list(_all_intervals(carrier.horizon))


class IntervalTable:
    """Index arithmetic over ``all_intervals`` used by the table evaluators.

    Positions follow ``all_intervals``; ``splits[k]`` and ``preceders[k]`` list
    index pairs / indices for interval ``k``.
    """

    def __init__(self, carrier: Carrier):
        self.carrier = carrier
        self.intervals = _all_intervals(carrier.horizon)
        self.index = {d: k for k, d in enumerate(self.intervals)}
        self.splits = [
            [(self.index[a], self.index[b]) for a, b in splits_of(d)] for d in self.intervals
        ]
        self.preceders = [[self.index[p] for p in preceders(d, carrier)] for d in self.intervals]
        self.infinite = [is_infinite(d, carrier) for d in self.intervals]
        self.empty_index = 0

    def __len__(self) -> int:
        return len(self.intervals)


@lru_cache(maxsize=None)
def interval_table(carrier: Carrier) -> IntervalTable:
    return IntervalTable(carrier)


def parse_interval(text: str) -> Interval:
    """Parse ``"empty"`` or ``"a..b"``."""
    text = text.strip()
    if text in ("empty", "∅"):
        return EMPTY
    try:
        lo, hi = text.split("..")
        return Interval(int(lo), int(hi))
    except ValueError:
        raise MalformedInterval(f"cannot parse interval {text!r}; expected 'empty' or 'a..b'") from None
