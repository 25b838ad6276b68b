"""Interval relations between a left stream ``y`` and a right stream ``z``.

State relations inside :class:`AlwaysRel` refer to left variables with side
``"L"`` and right variables with side ``"R"``, so the two universes may share
variable names.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from . import intv_pred as ip
from . import state as st
from .intv_pred import IntvPred, PredTable, chop_columns
from .state import DEFAULT_BUDGET, BudgetExceeded, StateExpr, Stream, StreamSet, Universe, UniverseError
from .time_core import Carrier, Interval, interval_table, is_infinite, splits_of
from .verdict import Counterexample, Verdict

PAIR_CHUNK = 1 << 16


class IntvRel:
    __slots__ = ()

    def __and__(self, other: "IntvRel") -> "IntvRel":
        return AndR(self, other)

    def __or__(self, other: "IntvRel") -> "IntvRel":
        return OrR(self, other)

    def __invert__(self) -> "IntvRel":
        return NotR(self)

    def __str__(self) -> str:
        return format_rel(self)


@dataclass(frozen=True)
class AlwaysRel(IntvRel):
    r: StateExpr


@dataclass(frozen=True)
class NonEmptyRel(IntvRel):
    R: IntvRel


@dataclass(frozen=True)
class AndR(IntvRel):
    left: IntvRel
    right: IntvRel


@dataclass(frozen=True)
class OrR(IntvRel):
    left: IntvRel
    right: IntvRel


@dataclass(frozen=True)
class NotR(IntvRel):
    R: IntvRel


@dataclass(frozen=True)
class ChopRel(IntvRel):
    left: IntvRel
    right: IntvRel


@dataclass(frozen=True)
class Compose(IntvRel):
    """``left`` relates y to some w over ``middle``; ``right`` relates that w to z."""

    left: IntvRel
    right: IntvRel
    middle: Universe


@dataclass(frozen=True)
class Proj1(IntvRel):
    g: IntvPred


@dataclass(frozen=True)
class Proj2(IntvRel):
    g: IntvPred


@dataclass(frozen=True)
class LitR(IntvRel):
    value: bool


TRUE_R = LitR(True)
FALSE_R = LitR(False)


def identity(universe: Universe) -> StateExpr:
    """Pointwise equality of every variable of ``universe`` on both sides."""
    if not universe.names:
        return st.TRUE
    return st.conj(*[st.Cmp("=", st.Ref(v, "L"), st.Ref(v, "R")) for v in universe.names])


def rel_children(R: IntvRel) -> tuple[IntvRel, ...]:
    if isinstance(R, (NonEmptyRel, NotR)):
        return (R.R,)
    if isinstance(R, (AndR, OrR, ChopRel, Compose)):
        return (R.left, R.right)
    return ()


def rel_subterms(R: IntvRel) -> Iterator[IntvRel]:
    yield R
    for ch in rel_children(R):
        yield from rel_subterms(ch)


def is_local_rel(R: IntvRel) -> bool:
    for t in rel_subterms(R):
        if isinstance(t, (Proj1, Proj2)) and not ip.is_local(t.g):
            return False
    return True


def check_rel_term(R: IntvRel, left: Universe, right: Universe) -> None:
    if isinstance(R, AlwaysRel):
        st.check_rel(R.r, left, right)
    elif isinstance(R, Proj1):
        ip.check_term(R.g, left)
    elif isinstance(R, Proj2):
        ip.check_term(R.g, right)
    elif isinstance(R, Compose):
        check_rel_term(R.left, left, R.middle)
        check_rel_term(R.right, R.middle, right)
    elif isinstance(R, (NonEmptyRel, NotR, AndR, OrR, ChopRel, LitR)):
        for ch in rel_children(R):
            check_rel_term(ch, left, right)
    else:
        raise TypeError(f"not an interval relation: {R!r}")


# -- per-pair evaluation ------------------------------------------------------


class RelEvaluator:
    def __init__(self, y: Stream, z: Stream, carrier: Optional[Carrier] = None, budget: int = DEFAULT_BUDGET):
        if y.horizon != z.horizon:
            raise UniverseError("streams have different horizons")
        self.y, self.z = y, z
        self.carrier = carrier or Carrier(y.horizon)
        self.budget = budget
        self.py = ip.Evaluator(y, self.carrier)
        self.pz = ip.Evaluator(z, self.carrier)
        self.memo: dict[tuple[IntvRel, Interval], bool] = {}

    def __call__(self, R: IntvRel, delta: Interval) -> bool:
        delta.check(self.carrier)
        key = (R, delta)
        hit = self.memo.get(key)
        if hit is None:
            hit = self._compute(R, delta)
            self.memo[key] = hit
        return hit

    def _compute(self, R: IntvRel, delta: Interval) -> bool:
        if isinstance(R, AlwaysRel):
            return all(st.eval_state_rel(R.r, self.y.states[t], self.z.states[t]) for t in delta)
        if isinstance(R, NonEmptyRel):
            return not delta.is_empty and self(R.R, delta)
        if isinstance(R, AndR):
            return self(R.left, delta) and self(R.right, delta)
        if isinstance(R, OrR):
            return self(R.left, delta) or self(R.right, delta)
        if isinstance(R, NotR):
            return not self(R.R, delta)
        if isinstance(R, LitR):
            return R.value
        if isinstance(R, Proj1):
            return self.py(R.g, delta)
        if isinstance(R, Proj2):
            return self.pz(R.g, delta)
        if isinstance(R, ChopRel):
            if any(self(R.left, a) and self(R.right, b) for a, b in splits_of(delta)):
                return True
            return is_infinite(delta, self.carrier) and self(R.left, delta)
        if isinstance(R, Compose):
            for w in st.enumerate_streams(R.middle, self.carrier, self.budget):
                if RelEvaluator(self.y, w, self.carrier, self.budget)(R.left, delta) and RelEvaluator(
                    w, self.z, self.carrier, self.budget
                )(R.right, delta):
                    return True
            return False
        raise TypeError(f"not an interval relation: {R!r}")


def eval_rel(R: IntvRel, delta: Interval, y: Stream, z: Stream, carrier: Optional[Carrier] = None) -> bool:
    check_rel_term(R, y.universe, z.universe)
    return RelEvaluator(y, z, carrier)(R, delta)


# -- batch evaluation ----------------------------------------------------------


class RelContext:
    """Shared per-side predicate tables for evaluating relations over stream pairs."""

    def __init__(self, ys: StreamSet, zs: StreamSet, budget: int = DEFAULT_BUDGET):
        if ys.carrier != zs.carrier:
            raise UniverseError("stream sets live on different carriers")
        self.ys, self.zs = ys, zs
        self.carrier = ys.carrier
        self.it = interval_table(self.carrier)
        self.budget = budget
        self.ytab = PredTable(ys)
        self.ztab = PredTable(zs)
        self._middles: dict[Universe, StreamSet] = {}
        self._subs: dict[tuple[int, int], "RelContext"] = {}

    def middle(self, u: Universe) -> StreamSet:
        if u not in self._middles:
            self._middles[u] = StreamSet.all(u, self.carrier, self.budget)
        return self._middles[u]

    def _sub(self, a: StreamSet, b: StreamSet) -> "RelContext":
        key = (id(a), id(b))
        if key not in self._subs:
            self._subs[key] = RelContext(a, b, self.budget)
        return self._subs[key]

    def table(self, R: IntvRel, yi: np.ndarray, zi: np.ndarray, memo: Optional[dict] = None) -> np.ndarray:
        """Boolean array ``(len(yi), n_intervals)`` for the pairs ``(ys[yi[k]], zs[zi[k]])``."""
        if memo is None:
            memo = {}
        hit = memo.get(R)
        if hit is None:
            hit = self._compute(R, yi, zi, memo)
            memo[R] = hit
        return hit

    def _compute(self, R: IntvRel, yi, zi, memo) -> np.ndarray:
        n, m = len(yi), len(self.it)
        if isinstance(R, AlwaysRel):
            tm = st.truth_matrix(R.r, self.ys.universe, self.zs.universe)
            pts = tm[self.ys.codes[yi], self.zs.codes[zi]]
            out = np.ones((n, m), dtype=bool)
            for k, d in enumerate(self.it.intervals):
                if not d.is_empty:
                    out[:, k] = pts[:, d.lo : d.hi + 1].all(1)
            return out
        if isinstance(R, Proj1):
            return self.ytab(R.g)[yi]
        if isinstance(R, Proj2):
            return self.ztab(R.g)[zi]
        if isinstance(R, LitR):
            return np.full((n, m), R.value, dtype=bool)
        if isinstance(R, NonEmptyRel):
            out = self.table(R.R, yi, zi, memo).copy()
            out[:, self.it.empty_index] = False
            return out
        if isinstance(R, AndR):
            return self.table(R.left, yi, zi, memo) & self.table(R.right, yi, zi, memo)
        if isinstance(R, OrR):
            return self.table(R.left, yi, zi, memo) | self.table(R.right, yi, zi, memo)
        if isinstance(R, NotR):
            return ~self.table(R.R, yi, zi, memo)
        if isinstance(R, ChopRel):
            return chop_columns(self.table(R.left, yi, zi, memo), self.table(R.right, yi, zi, memo), self.it)
        if isinstance(R, Compose):
            return self._compose(R, yi, zi)
        raise TypeError(f"not an interval relation: {R!r}")

    def _compose(self, R: Compose, yi, zi) -> np.ndarray:
        ws = self.middle(R.middle)
        nw = len(ws)
        uy, yinv = np.unique(yi, return_inverse=True)
        uz, zinv = np.unique(zi, return_inverse=True)
        if (len(uy) + len(uz)) * nw > self.budget:
            raise BudgetExceeded("composition witnesses", (len(uy) + len(uz)) * nw, self.budget)
        left_ctx = self._sub(self.ys, ws)
        right_ctx = self._sub(ws, self.zs)
        all_w = np.arange(nw)
        # a[i, w, k]: left relation between y uy[i] and w; b[w, j, k] similarly
        a = left_ctx.table(R.left, np.repeat(uy, nw), np.tile(all_w, len(uy))).reshape(len(uy), nw, -1)
        b = right_ctx.table(R.right, np.repeat(all_w, len(uz)), np.tile(uz, nw)).reshape(nw, len(uz), -1)
        out = np.zeros((len(yi), len(self.it)), dtype=bool)
        for w in range(nw):
            out |= a[yinv, w] & b[w, zinv]
        return out


def pair_chunks(ny: int, nz: int, chunk: int = PAIR_CHUNK) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """All ``(y, z)`` index pairs, z-major, in blocks of about ``chunk`` pairs."""
    per = max(1, chunk // max(ny, 1))
    for z0 in range(0, nz, per):
        zs = np.arange(z0, min(nz, z0 + per))
        yield np.tile(np.arange(ny), len(zs)), np.repeat(zs, ny)


def _first(bad: np.ndarray, it) -> Optional[tuple[int, int]]:
    if not bad.any():
        return None
    for k in sorted(range(len(it)), key=lambda k: it.intervals[k].sort_key()):
        rows = np.flatnonzero(bad[:, k])
        if rows.size:
            return int(rows[0]), k
    return None


def _check_pairs(ctx: RelContext, bad_of, clause: str) -> Verdict:
    best = None
    for yi, zi in pair_chunks(len(ctx.ys), len(ctx.zs)):
        bad = bad_of(yi, zi, {})
        hit = _first(bad, ctx.it)
        if hit is None:
            continue
        row, k = hit
        key = (ctx.it.intervals[k].sort_key(), int(zi[row]), int(yi[row]))
        if best is None or key < best[0]:
            best = (key, ctx.it.intervals[k], int(yi[row]), int(zi[row]))
        if best[1].is_empty:
            break
    if best is None:
        return Verdict.ok(pairs=len(ctx.ys) * len(ctx.zs))
    _, d, y, z = best
    cex = Counterexample(
        clause=clause,
        carrier=ctx.carrier,
        intervals={"delta": d},
        streams={"y": ctx.ys.stream(y), "z": ctx.zs.stream(z)},
    )
    return Verdict.fail(cex)


def check_rel_implication(
    R1: IntvRel,
    R2: IntvRel,
    left: Universe,
    right: Universe,
    carrier: Carrier,
    budget: int = DEFAULT_BUDGET,
    clause: str = "implication",
) -> Verdict:
    """Is ``R1 ⟹ R2`` valid over every interval and every pair of streams?"""
    check_rel_term(R1, left, right)
    check_rel_term(R2, left, right)
    ctx = RelContext(StreamSet.all(left, carrier, budget), StreamSet.all(right, carrier, budget), budget)
    _pair_budget(ctx, budget)
    return _check_pairs(ctx, lambda yi, zi, memo: ctx.table(R1, yi, zi, memo) & ~ctx.table(R2, yi, zi, memo), clause)


def _pair_budget(ctx: RelContext, budget: int) -> None:
    size = len(ctx.ys) * len(ctx.zs)
    if size > budget:
        raise BudgetExceeded("stream pairs", size, budget)


def partition_closure(a: np.ndarray, it) -> np.ndarray:
    """Entries where the interval can be cut into one or more nonempty adjoining pieces each in ``a``."""
    out = a.copy()
    order = sorted(range(len(it)), key=lambda k: len(it.intervals[k]))
    for k in order:
        d = it.intervals[k]
        if d.is_empty:
            continue
        col = out[..., k]
        for i, j in it.splits[k]:
            if it.intervals[i].is_empty or it.intervals[j].is_empty:
                continue
            col |= a[..., i] & out[..., j]
    return out


def rel_joins(R: IntvRel, left: Universe, right: Universe, carrier: Carrier, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Is ``R`` closed under gluing adjoining nonempty pieces on which it holds?"""
    check_rel_term(R, left, right)
    ctx = RelContext(StreamSet.all(left, carrier, budget), StreamSet.all(right, carrier, budget), budget)
    _pair_budget(ctx, budget)

    def bad(yi, zi, memo):
        a = ctx.table(R, yi, zi, memo)
        return partition_closure(a, ctx.it) & ~a

    return _check_pairs(ctx, bad, "joins")


def pred_joins_partition(g: IntvPred, universe: Universe, carrier: Carrier, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Finite-partition closure for a predicate, the same reading ``rel_joins`` uses."""
    return rel_joins(Proj2(g), Universe.empty(), universe, carrier, budget)


# -- syntax -----------------------------------------------------------------------


def format_rel(R: IntvRel, qualify=None) -> str:
    def go(t: IntvRel, prec: int) -> str:
        if isinstance(t, AlwaysRel):
            text = st.format_expr(t.r, qualify)
            return f"always ({text})" if not isinstance(t.r, (st.Const, st.IsTrue, st.Neg)) else f"always {text}"
        if isinstance(t, LitR):
            return "true" if t.value else "false"
        if isinstance(t, Proj1):
            return f"left ({ip.format_term(t.g)})"
        if isinstance(t, Proj2):
            return f"right ({ip.format_term(t.g)})"
        if isinstance(t, NonEmptyRel):
            return "ne " + go(t.R, 5)
        if isinstance(t, NotR):
            return "not " + go(t.R, 5)
        if hasattr(t, "render"):
            return t.render()
        if isinstance(t, Compose):
            text, p = f"{go(t.left, 5)} o {go(t.right, 5)}", 4
        elif isinstance(t, ChopRel):
            text, p = f"{go(t.left, 4)} ; {go(t.right, 3)}", 3
        elif isinstance(t, AndR):
            text, p = f"{go(t.left, 2)} and {go(t.right, 3)}", 2
        elif isinstance(t, OrR):
            text, p = f"{go(t.left, 1)} or {go(t.right, 2)}", 1
        else:
            raise TypeError(f"not an interval relation: {t!r}")
        return f"({text})" if p < prec else text

    return go(R, 0)


def conj_rel(parts: Iterable[IntvRel]) -> IntvRel:
    parts = list(parts)
    if not parts:
        return TRUE_R
    out = parts[0]
    for p in parts[1:]:
        out = AndR(out, p)
    return out
