"""Interval predicates: syntax, three evaluators, and validity checks.

``eval`` / :class:`Evaluator` is the memoising per-stream evaluator.
:func:`eval_naive` recomputes everything from the definitions and computes
iteration by partition search instead of fixed-point iteration; it exists to
cross-check the other two.  :class:`PredTable` evaluates a term on every
interval of a whole :class:`~ivref.state.StreamSet` at once with numpy and is
what the exhaustive checkers use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import state as st
from .state import (
    DEFAULT_BUDGET,
    StateExpr,
    Stream,
    StreamSet,
    Universe,
    UniverseError,
    apparent,
    eval_state_pred,
    free_vars,
    truth_vector,
)
from .time_core import (
    EMPTY,
    Carrier,
    Interval,
    all_intervals,
    interval_table,
    is_infinite,
    preceders,
    splits_of,
)
from .verdict import Counterexample, Verdict


class IntvPred:
    __slots__ = ()

    def __and__(self, other: "IntvPred") -> "IntvPred":
        return And(self, other)

    def __or__(self, other: "IntvPred") -> "IntvPred":
        return Or(self, other)

    def __invert__(self) -> "IntvPred":
        return Not(self)

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True)
class Always(IntvPred):
    c: StateExpr


@dataclass(frozen=True)
class Sometime(IntvPred):
    c: StateExpr


@dataclass(frozen=True)
class Definitely(IntvPred):
    c: StateExpr


@dataclass(frozen=True)
class Possibly(IntvPred):
    c: StateExpr


@dataclass(frozen=True)
class EmptyP(IntvPred):
    pass


@dataclass(frozen=True)
class FiniteP(IntvPred):
    pass


@dataclass(frozen=True)
class InfiniteP(IntvPred):
    pass


@dataclass(frozen=True)
class NonEmpty(IntvPred):
    g: IntvPred


@dataclass(frozen=True)
class And(IntvPred):
    left: IntvPred
    right: IntvPred


@dataclass(frozen=True)
class Or(IntvPred):
    left: IntvPred
    right: IntvPred


@dataclass(frozen=True)
class Not(IntvPred):
    g: IntvPred


@dataclass(frozen=True)
class Chop(IntvPred):
    left: IntvPred
    right: IntvPred


@dataclass(frozen=True)
class Omega(IntvPred):
    g: IntvPred


@dataclass(frozen=True)
class PrevP(IntvPred):
    """Holds if ``g`` holds on some interval immediately preceding this one."""

    g: IntvPred


@dataclass(frozen=True)
class PrevHolds(IntvPred):
    c: StateExpr


@dataclass(frozen=True)
class StableVar(IntvPred):
    var: str


@dataclass(frozen=True)
class StableSet(IntvPred):
    vars: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vars", tuple(sorted(set(self.vars))))


@dataclass(frozen=True)
class Lit(IntvPred):
    value: bool


TRUE_P = Lit(True)
FALSE_P = Lit(False)


def chop(*parts: IntvPred) -> IntvPred:
    """Right-nested chop of one or more predicates."""
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Chop(p, out)
    return out


def conj(*parts: IntvPred) -> IntvPred:
    if not parts:
        return TRUE_P
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def ne_always(c: StateExpr) -> IntvPred:
    return NonEmpty(Always(c))


def normalize_guard(c: StateExpr) -> IntvPred:
    """Guard evaluation reads each variable once at some point of the interval."""
    return Possibly(c)


def children(g: IntvPred) -> tuple[IntvPred, ...]:
    if isinstance(g, (NonEmpty, Not, Omega, PrevP)):
        return (g.g,)
    if isinstance(g, (And, Or, Chop)):
        return (g.left, g.right)
    return ()


def subterms(g: IntvPred) -> Iterable[IntvPred]:
    yield g
    for ch in children(g):
        yield from subterms(ch)


def state_exprs(g: IntvPred) -> Iterable[StateExpr]:
    for t in subterms(g):
        if isinstance(t, (Always, Sometime, Definitely, Possibly, PrevHolds)):
            yield t.c


NONLOCAL = (PrevP, PrevHolds, StableVar, StableSet)


def is_local(g: IntvPred) -> bool:
    """True if the value on an interval depends only on the stream inside that interval."""
    return not any(isinstance(t, NONLOCAL) for t in subterms(g))


def check_term(g: IntvPred, universe: Universe) -> None:
    for t in subterms(g):
        if isinstance(t, (Always, Sometime, Definitely, Possibly, PrevHolds)):
            st.check_pred(t.c, universe)
        elif isinstance(t, StableVar):
            universe.domain(t.var)
        elif isinstance(t, StableSet):
            for v in t.vars:
                universe.domain(v)
        elif not isinstance(t, IntvPred):
            raise TypeError(f"not an interval predicate: {t!r}")


def stable_expansion(v: str, universe: Universe) -> IntvPred:
    """``stable v`` as a disjunction over the domain of ``v``."""
    parts = [And(PrevHolds(st.eq(v, k)), Always(st.eq(v, k))) for k in universe.domain(v)]
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


# -- per-stream evaluators --------------------------------------------------


class Evaluator:
    """Memoising evaluator for one stream.

    The memo table lives as long as the evaluator; make a new one per stream.
    ``omega_iterations`` records how many fixed-point rounds each iteration
    term needed.
    """

    def __init__(self, stream: Stream, carrier: Optional[Carrier] = None):
        if carrier is None:
            carrier = Carrier(stream.horizon)
        if carrier.horizon != stream.horizon:
            raise UniverseError(f"stream has horizon {stream.horizon}, carrier {carrier.horizon}")
        self.stream = stream
        self.carrier = carrier
        self.memo: dict[tuple[IntvPred, Interval], bool] = {}
        self.omega_iterations: dict[IntvPred, int] = {}
        self._checked: set[IntvPred] = set()

    def __call__(self, g: IntvPred, delta: Interval) -> bool:
        if g not in self._checked:
            check_term(g, self.stream.universe)
            self._checked.add(g)
        delta.check(self.carrier)
        return self._eval(g, delta)

    def _eval(self, g: IntvPred, delta: Interval) -> bool:
        key = (g, delta)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if isinstance(g, Omega):
            self._omega(g)
            return self.memo[key]
        val = self._compute(g, delta)
        self.memo[key] = val
        return val

    def _compute(self, g: IntvPred, delta: Interval) -> bool:
        s, c = self.stream, self.carrier
        if isinstance(g, Always):
            return all(eval_state_pred(g.c, s.states[t]) for t in delta)
        if isinstance(g, Sometime):
            return any(eval_state_pred(g.c, s.states[t]) for t in delta)
        if isinstance(g, Definitely):
            return all(eval_state_pred(g.c, sigma) for sigma in apparent(delta, s))
        if isinstance(g, Possibly):
            return any(eval_state_pred(g.c, sigma) for sigma in apparent(delta, s))
        if isinstance(g, EmptyP):
            return delta.is_empty
        if isinstance(g, FiniteP):
            return not is_infinite(delta, c)
        if isinstance(g, InfiniteP):
            return is_infinite(delta, c)
        if isinstance(g, Lit):
            return g.value
        if isinstance(g, NonEmpty):
            return not delta.is_empty and self._eval(g.g, delta)
        if isinstance(g, And):
            return self._eval(g.left, delta) and self._eval(g.right, delta)
        if isinstance(g, Or):
            return self._eval(g.left, delta) or self._eval(g.right, delta)
        if isinstance(g, Not):
            return not self._eval(g.g, delta)
        if isinstance(g, Chop):
            for d1, d2 in splits_of(delta):
                if self._eval(g.left, d1) and self._eval(g.right, d2):
                    return True
            return is_infinite(delta, c) and self._eval(g.left, delta)
        if isinstance(g, PrevP):
            return any(self._eval(g.g, d0) for d0 in preceders(delta, c))
        if isinstance(g, PrevHolds):
            return self._eval(PrevP(NonEmpty(Always(g.c))), delta)
        if isinstance(g, StableVar):
            return self._eval(stable_expansion(g.var, s.universe), delta)
        if isinstance(g, StableSet):
            return all(self._eval(StableVar(v), delta) for v in g.vars)
        raise TypeError(f"not an interval predicate: {g!r}")

    def _omega(self, g: Omega) -> None:
        """Greatest fixed point by downward iteration from the all-true vector."""
        c = self.carrier
        intervals = all_intervals(c)
        body = {d: self._eval(g.g, d) for d in intervals}
        current = {d: True for d in intervals}
        rounds = 0
        while True:
            rounds += 1
            nxt = {}
            for d in intervals:
                val = d.is_empty or (is_infinite(d, c) and body[d])
                if not val:
                    val = any(body[d1] and current[d2] for d1, d2 in splits_of(d))
                nxt[d] = val
            if nxt == current:
                break
            current = nxt
        self.omega_iterations[g] = rounds
        for d, v in current.items():
            self.memo[(g, d)] = v

    def trace_chop(self, g: Chop, delta: Interval) -> list[tuple[Interval, Interval, bool, bool]]:
        """Operand values at every split of ``delta``, for debugging output."""
        return [(d1, d2, self(g.left, d1), self(g.right, d2)) for d1, d2 in splits_of(delta)]

    def omega_table(self, g: Omega) -> dict[Interval, bool]:
        self(g, EMPTY)
        return {d: self.memo[(g, d)] for d in all_intervals(self.carrier)}


def eval(g: IntvPred, delta: Interval, s: Stream, carrier: Optional[Carrier] = None) -> bool:  # noqa: A001
    return Evaluator(s, carrier)(g, delta)


def eval_naive(g: IntvPred, delta: Interval, s: Stream, carrier: Optional[Carrier] = None) -> bool:
    """Direct recursive reading of the definitions, no caching.

    Iteration uses the partition characterisation of the greatest fixed point:
    if the body holds on the empty interval the fixed point is everywhere
    true, otherwise every step consumes a nonempty prefix.
    """
    c = carrier or Carrier(s.horizon)
    check_term(g, s.universe)
    return _naive(g, delta, s, c)


def _naive(g: IntvPred, delta: Interval, s: Stream, c: Carrier) -> bool:
    if isinstance(g, Always):
        return all(eval_state_pred(g.c, s.states[t]) for t in delta)
    if isinstance(g, Sometime):
        return any(eval_state_pred(g.c, s.states[t]) for t in delta)
    if isinstance(g, Definitely):
        return all(eval_state_pred(g.c, x) for x in apparent(delta, s))
    if isinstance(g, Possibly):
        return any(eval_state_pred(g.c, x) for x in apparent(delta, s))
    if isinstance(g, EmptyP):
        return delta.is_empty
    if isinstance(g, FiniteP):
        return not is_infinite(delta, c)
    if isinstance(g, InfiniteP):
        return is_infinite(delta, c)
    if isinstance(g, Lit):
        return g.value
    if isinstance(g, NonEmpty):
        return not delta.is_empty and _naive(g.g, delta, s, c)
    if isinstance(g, And):
        return _naive(g.left, delta, s, c) and _naive(g.right, delta, s, c)
    if isinstance(g, Or):
        return _naive(g.left, delta, s, c) or _naive(g.right, delta, s, c)
    if isinstance(g, Not):
        return not _naive(g.g, delta, s, c)
    if isinstance(g, Chop):
        if any(_naive(g.left, a, s, c) and _naive(g.right, b, s, c) for a, b in splits_of(delta)):
            return True
        return is_infinite(delta, c) and _naive(g.left, delta, s, c)
    if isinstance(g, Omega):
        if _naive(g.g, EMPTY, s, c):
            return True
        return _partition(g.g, delta, s, c)
    if isinstance(g, PrevP):
        return any(_naive(g.g, d0, s, c) for d0 in preceders(delta, c))
    if isinstance(g, PrevHolds):
        return any(
            not d0.is_empty and all(eval_state_pred(g.c, s.states[t]) for t in d0) for d0 in preceders(delta, c)
        )
    if isinstance(g, StableVar):
        for k in s.universe.domain(g.var):
            here = all(s.states[t][g.var] == k for t in delta)
            if here and any(
                not d0.is_empty and all(s.states[t][g.var] == k for t in d0) for d0 in preceders(delta, c)
            ):
                return True
        return False
    if isinstance(g, StableSet):
        return all(_naive(StableVar(v), delta, s, c) for v in g.vars)
    raise TypeError(f"not an interval predicate: {g!r}")


def _partition(body: IntvPred, delta: Interval, s: Stream, c: Carrier) -> bool:
    if delta.is_empty:
        return True
    if is_infinite(delta, c) and _naive(body, delta, s, c):
        return True
    for cut in range(delta.lo, delta.hi + 1):
        head = Interval(delta.lo, cut)
        rest = EMPTY if cut == delta.hi else Interval(cut + 1, delta.hi)
        if _naive(body, head, s, c) and _partition(body, rest, s, c):
            return True
    return False


# -- whole-batch evaluation -------------------------------------------------


class PredTable:
    """Evaluate predicates on every interval of every stream in a batch.

    ``table(g)`` is a boolean array of shape ``(len(streams), n_intervals)``
    whose columns follow :func:`~ivref.time_core.all_intervals`.
    """

    def __init__(self, streams: StreamSet):
        self.streams = streams
        self.universe = streams.universe
        self.carrier = streams.carrier
        self.it = interval_table(self.carrier)
        self.memo: dict[IntvPred, np.ndarray] = {}
        self.omega_rounds: dict[IntvPred, int] = {}
        self._values: Optional[np.ndarray] = None

    def __call__(self, g: IntvPred) -> np.ndarray:
        hit = self.memo.get(g)
        if hit is None:
            hit = self._compute(g)
            hit.setflags(write=False)
            self.memo[g] = hit
        return hit

    @property
    def n(self) -> int:
        return len(self.streams)

    def _blank(self, fill: bool = False) -> np.ndarray:
        return np.full((self.n, len(self.it)), fill, dtype=bool)

    def _values_of(self) -> np.ndarray:
        if self._values is None:
            self._values = self.streams.values()
        return self._values

    def _pointwise(self, c: StateExpr) -> np.ndarray:
        return truth_vector(c, self.universe)[self.streams.codes]

    def _compute(self, g: IntvPred) -> np.ndarray:
        it = self.it
        if isinstance(g, (Always, Sometime)):
            pts = self._pointwise(g.c)
            out = self._blank(isinstance(g, Always))
            for k, d in enumerate(it.intervals):
                if d.is_empty:
                    continue
                seg = pts[:, d.lo : d.hi + 1]
                out[:, k] = seg.all(1) if isinstance(g, Always) else seg.any(1)
            return out
        if isinstance(g, (Definitely, Possibly)):
            return self._apparent(g)
        if isinstance(g, EmptyP):
            out = self._blank()
            out[:, it.empty_index] = True
            return out
        if isinstance(g, (FiniteP, InfiniteP)):
            row = np.array(it.infinite, dtype=bool)
            if isinstance(g, FiniteP):
                row = ~row
            return np.broadcast_to(row, (self.n, len(it))).copy()
        if isinstance(g, Lit):
            return self._blank(g.value)
        if isinstance(g, NonEmpty):
            out = self(g.g).copy()
            out[:, it.empty_index] = False
            return out
        if isinstance(g, And):
            return self(g.left) & self(g.right)
        if isinstance(g, Or):
            return self(g.left) | self(g.right)
        if isinstance(g, Not):
            return ~self(g.g)
        if isinstance(g, Chop):
            return chop_columns(self(g.left), self(g.right), it)
        if isinstance(g, Omega):
            out, rounds = omega_columns(self(g.g), it)
            self.omega_rounds[g] = rounds
            return out
        if isinstance(g, PrevP):
            return prev_columns(self(g.g), it)
        if isinstance(g, PrevHolds):
            return self(PrevP(NonEmpty(Always(g.c))))
        if isinstance(g, StableVar):
            return self(stable_expansion(g.var, self.universe))
        if isinstance(g, StableSet):
            out = self._blank(True)
            for v in g.vars:
                out &= self(StableVar(v))
            return out
        raise TypeError(f"not an interval predicate: {g!r}")

    def _apparent(self, g) -> np.ndarray:
        fv = sorted(free_vars(g.c), key=self.universe.position)
        sub = self.universe.restrict(fv)
        cvec = truth_vector(g.c, sub)
        combos = st.value_codes(sub)
        vals = self._values_of()
        definitely = isinstance(g, Definitely)
        out = self._blank(definitely)
        for k, d in enumerate(self.it.intervals):
            if d.is_empty:
                continue
            member = np.ones((self.n, len(cvec)), dtype=bool)
            for j, name in enumerate(fv):
                p = self.universe.position(name)
                radix = len(self.universe.domains[p])
                seg = vals[:, d.lo : d.hi + 1, p]
                present = (seg[:, :, None] == np.arange(radix)).any(1)
                member &= present[:, combos[:, j]]
            if definitely:
                out[:, k] = ~(member & ~cvec).any(1)
            else:
                out[:, k] = (member & cvec).any(1)
        return out


def chop_columns(a: np.ndarray, b: np.ndarray, it) -> np.ndarray:
    out = np.zeros_like(a)
    for k, pairs in enumerate(it.splits):
        col = out[..., k]
        for i, j in pairs:
            col |= a[..., i] & b[..., j]
        if it.infinite[k]:
            col |= a[..., k]
    return out


def omega_columns(body: np.ndarray, it) -> tuple[np.ndarray, int]:
    current = np.ones_like(body)
    rounds = 0
    inf = np.array(it.infinite, dtype=bool)
    base = body & inf
    base[..., it.empty_index] = True
    while True:
        rounds += 1
        nxt = base | chop_columns_no_inf(body, current, it)
        if np.array_equal(nxt, current):
            return current, rounds
        current = nxt


def chop_columns_no_inf(a: np.ndarray, b: np.ndarray, it) -> np.ndarray:
    out = np.zeros_like(a)
    for k, pairs in enumerate(it.splits):
        col = out[..., k]
        for i, j in pairs:
            col |= a[..., i] & b[..., j]
    return out


def prev_columns(a: np.ndarray, it) -> np.ndarray:
    out = np.zeros_like(a)
    for k, idx in enumerate(it.preceders):
        out[..., k] = a[..., idx].any(-1)
    return out


# -- validity ---------------------------------------------------------------


def _first_failure(bad: np.ndarray, it) -> Optional[tuple[int, int]]:
    """First ``(stream, interval)`` with a true entry, smallest interval first."""
    if not bad.any():
        return None
    order = sorted(range(len(it)), key=lambda k: it.intervals[k].sort_key())
    for k in order:
        rows = np.flatnonzero(bad[:, k])
        if rows.size:
            return int(rows[0]), k
    return None


def check_valid_implication(
    g1: IntvPred,
    g2: IntvPred,
    universe: Universe,
    carrier: Carrier,
    budget: int = DEFAULT_BUDGET,
    shrink: bool = True,
    clause: str = "implication",
) -> Verdict:
    """Does ``g1`` imply ``g2`` on every interval of every stream?

    On failure the witness is the first failing (interval, stream) with the
    smallest interval; with ``shrink`` the smallest failing horizon is tried
    first and the witness records the carrier it was found in.
    """
    check_term(g1, universe)
    check_term(g2, universe)
    table = PredTable(StreamSet.all(universe, carrier, budget))
    bad = table(g1) & ~table(g2)
    hit = _first_failure(bad, table.it)
    if hit is None:
        return Verdict.ok(streams=table.n)
    where = (table, hit)
    if shrink:
        for h in range(1, carrier.horizon):
            small = PredTable(StreamSet.all(universe, Carrier(h, carrier.open_ended), budget))
            sh = _first_failure(small(g1) & ~small(g2), small.it)
            if sh is not None:
                where = (small, sh)
                break
    tbl, (row, k) = where
    cex = Counterexample(
        clause=clause,
        carrier=tbl.carrier,
        intervals={"delta": tbl.it.intervals[k]},
        streams={"s": tbl.streams.stream(row)},
    )
    return Verdict.fail(cex, streams=table.n)


def check_equivalent(g1: IntvPred, g2: IntvPred, universe: Universe, carrier: Carrier, **kw) -> Verdict:
    v = check_valid_implication(g1, g2, universe, carrier, **kw)
    if not v:
        return v
    return check_valid_implication(g2, g1, universe, carrier, **kw)


def check_splits(g: IntvPred, universe: Universe, carrier: Carrier, **kw) -> Verdict:
    return check_valid_implication(g, Chop(g, g), universe, carrier, clause="splits", **kw)


def check_joins(g: IntvPred, universe: Universe, carrier: Carrier, **kw) -> Verdict:
    return check_valid_implication(Chop(g, Omega(g)), g, universe, carrier, clause="joins", **kw)


# -- concrete syntax ----------------------------------------------------------


def _state_arg(c: StateExpr) -> str:
    text = st.format_expr(c)
    if isinstance(c, (st.Const, st.IsTrue, st.Neg)):
        return text
    return f"({text})"


def format_term(g: IntvPred) -> str:
    """Render in .ivdl syntax; ``;`` binds tighter than ``and``/``or``."""

    def go(t: IntvPred, prec: int) -> str:
        if isinstance(t, Always):
            return "always " + _state_arg(t.c)
        if isinstance(t, Sometime):
            return "sometime " + _state_arg(t.c)
        if isinstance(t, Definitely):
            return "definitely " + _state_arg(t.c)
        if isinstance(t, Possibly):
            return "possibly " + _state_arg(t.c)
        if isinstance(t, PrevHolds):
            return "prevholds " + _state_arg(t.c)
        if isinstance(t, EmptyP):
            return "empty"
        if isinstance(t, FiniteP):
            return "finite"
        if isinstance(t, InfiniteP):
            return "infinite"
        if isinstance(t, Lit):
            return "true" if t.value else "false"
        if isinstance(t, StableVar):
            return f"stable {t.var}"
        if isinstance(t, StableSet):
            return "stable {" + ", ".join(t.vars) + "}"
        if isinstance(t, NonEmpty):
            return "ne " + go(t.g, 4)
        if isinstance(t, Not):
            return "not " + go(t.g, 4)
        if isinstance(t, Omega):
            return "omega " + go(t.g, 4)
        if isinstance(t, PrevP):
            return "prev " + go(t.g, 4)
        if isinstance(t, Chop):
            text, p = f"{go(t.left, 4)} ; {go(t.right, 3)}", 3
        elif isinstance(t, And):
            text, p = f"{go(t.left, 2)} and {go(t.right, 3)}", 2
        elif isinstance(t, Or):
            text, p = f"{go(t.left, 1)} or {go(t.right, 2)}", 1
        elif hasattr(t, "render"):
            return t.render()
        else:
            raise TypeError(f"not an interval predicate: {t!r}")
        return f"({text})" if p < prec else text

    return go(g, 0)


def map_state(g: IntvPred, fn, var_fn=None) -> IntvPred:
    """Rebuild ``g`` applying ``fn`` to embedded state predicates and ``var_fn`` to stable variables."""
    var_fn = var_fn or (lambda v: v)
    if isinstance(g, (Always, Sometime, Definitely, Possibly, PrevHolds)):
        return type(g)(fn(g.c))
    if isinstance(g, StableVar):
        return StableVar(var_fn(g.var))
    if isinstance(g, StableSet):
        return StableSet(tuple(var_fn(v) for v in g.vars))
    if isinstance(g, (NonEmpty, Not, Omega, PrevP)):
        return type(g)(map_state(g.g, fn, var_fn))
    if isinstance(g, (And, Or, Chop)):
        return type(g)(map_state(g.left, fn, var_fn), map_state(g.right, fn, var_fn))
    return g


def rename(g: IntvPred, mapping: dict[str, str]) -> IntvPred:
    """Rename variables throughout ``g``."""
    return map_state(
        g,
        lambda c: st.map_refs(c, lambda r: st.Ref(mapping.get(r.name, r.name), r.side)),
        lambda v: mapping.get(v, v),
    )
