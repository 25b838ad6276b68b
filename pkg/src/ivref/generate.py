"""Seeded random generation of universes, state expressions, terms and streams."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from . import intv_pred as ip
from . import intv_rel as ir
from . import state as st
from .state import Stream, Universe
from .time_core import Carrier

PRED_ATOMS = ("always", "sometime", "definitely", "possibly", "empty", "lit")
PRED_NODES = ("and", "or", "not", "ne", "chop", "omega", "prev", "prevholds", "stable", "finite", "infinite")
LOCAL_NODES = ("and", "or", "not", "ne", "chop", "omega", "finite", "infinite")


@dataclass
class Weights:
    atoms: dict[str, float] = field(
        default_factory=lambda: {"always": 3, "sometime": 2, "definitely": 2, "possibly": 2, "empty": 1, "lit": 0.5}
    )
    nodes: dict[str, float] = field(
        default_factory=lambda: {
            "and": 2,
            "or": 2,
            "not": 0.7,
            "ne": 1.5,
            "chop": 2.5,
            "omega": 1.5,
            "prev": 0.8,
            "prevholds": 0.5,
            "stable": 0.5,
            "finite": 0.3,
            "infinite": 0.3,
        }
    )
    leaf_bias: float = 0.3


def _pick(rng: random.Random, table: dict[str, float], allowed: Sequence[str]) -> str:
    names = [k for k in allowed if table.get(k, 0) > 0]
    return rng.choices(names, weights=[table[k] for k in names])[0]


def random_universe(rng: random.Random, max_vars: int = 2, max_domain: int = 3, prefix: str = "x") -> Universe:
    n = rng.randint(1, max_vars)
    pairs = []
    for i in range(n):
        if rng.random() < 0.4:
            pairs.append((f"{prefix}{i}", (False, True)))
        else:
            pairs.append((f"{prefix}{i}", tuple(range(rng.randint(1, max_domain)))))
    return Universe.of(pairs)


def random_state_expr(rng: random.Random, u: Universe, depth: int = 1, side: Optional[str] = None) -> st.StateExpr:
    if depth <= 0 or rng.random() < 0.5:
        roll = rng.random()
        if roll < 0.08:
            return st.Const(rng.random() < 0.5)
        name = rng.choice(u.names)
        dom = u.domain(name)
        if all(isinstance(v, bool) for v in dom) and roll < 0.5:
            return st.IsTrue(st.Ref(name, side))
        others = [m for m in u.names if m != name and _same_kind(u.domain(m), dom)]
        op = rng.choice(("=", "!=", "<", "<="))
        if others and roll > 0.85:
            return st.Cmp(op, st.Ref(name, side), st.Ref(rng.choice(others), side))
        return st.Cmp(op, st.Ref(name, side), st.Val(rng.choice(dom)))
    kind = rng.choice(("and", "or", "not"))
    if kind == "not":
        return st.Neg(random_state_expr(rng, u, depth - 1, side))
    a = random_state_expr(rng, u, depth - 1, side)
    b = random_state_expr(rng, u, depth - 1, side)
    return st.Conj(a, b) if kind == "and" else st.Disj(a, b)


def _same_kind(d1, d2) -> bool:
    b1 = all(isinstance(v, bool) for v in d1)
    b2 = all(isinstance(v, bool) for v in d2)
    return b1 == b2


def random_term(
    rng: random.Random,
    u: Universe,
    depth: int = 3,
    local: bool = False,
    weights: Optional[Weights] = None,
    max_not: int = 1,
) -> ip.IntvPred:
    """A random interval predicate of at most ``depth`` constructor levels.

    ``local`` restricts to constructors whose value depends only on the
    interval itself.  Negation nesting is capped at ``max_not``.
    """
    w = weights or Weights()

    def go(d: int, nots: int) -> ip.IntvPred:
        if d <= 0 or rng.random() < w.leaf_bias:
            a = _pick(rng, w.atoms, PRED_ATOMS)
            if a == "empty":
                return ip.EmptyP()
            if a == "lit":
                return ip.Lit(rng.random() < 0.7)
            c = random_state_expr(rng, u, 1)
            return {"always": ip.Always, "sometime": ip.Sometime, "definitely": ip.Definitely, "possibly": ip.Possibly}[
                a
            ](c)
        allowed = [k for k in (LOCAL_NODES if local else PRED_NODES) if k != "not" or nots < max_not]
        k = _pick(rng, w.nodes, allowed)
        if k == "and":
            return ip.And(go(d - 1, nots), go(d - 1, nots))
        if k == "or":
            return ip.Or(go(d - 1, nots), go(d - 1, nots))
        if k == "not":
            return ip.Not(go(d - 1, nots + 1))
        if k == "ne":
            return ip.NonEmpty(go(d - 1, nots))
        if k == "chop":
            return ip.Chop(go(d - 1, nots), go(d - 1, nots))
        if k == "omega":
            return ip.Omega(go(d - 1, nots))
        if k == "prev":
            return ip.PrevP(go(d - 1, nots))
        if k == "prevholds":
            return ip.PrevHolds(random_state_expr(rng, u, 1))
        if k == "stable":
            if rng.random() < 0.5:
                return ip.StableVar(rng.choice(u.names))
            return ip.StableSet(tuple(rng.sample(u.names, rng.randint(0, len(u.names)))))
        if k == "finite":
            return ip.And(ip.FiniteP(), go(d - 1, nots))
        return ip.And(ip.InfiniteP(), go(d - 1, nots))

    return go(depth, 0)


def generate_terms(universe: Universe, depth: int = 3, seed: int = 0, local: bool = False, weights=None) -> Iterator[ip.IntvPred]:
    if depth > 4:
        raise ValueError("term depth is capped at 4")
    rng = random.Random(seed)
    while True:
        yield random_term(rng, universe, depth, local=local, weights=weights)


def random_rel_term(rng: random.Random, left: Universe, right: Universe, depth: int = 2) -> ir.IntvRel:
    """Local relation terms without composition."""

    def go(d: int) -> ir.IntvRel:
        if d <= 0 or rng.random() < 0.35:
            roll = rng.random()
            if roll < 0.45:
                return ir.AlwaysRel(random_state_rel(rng, left, right))
            if roll < 0.65:
                return ir.Proj1(random_term(rng, left, 1, local=True))
            if roll < 0.85:
                return ir.Proj2(random_term(rng, right, 1, local=True))
            return ir.LitR(rng.random() < 0.7)
        k = rng.choice(("and", "or", "ne", "chop", "not"))
        if k == "and":
            return ir.AndR(go(d - 1), go(d - 1))
        if k == "or":
            return ir.OrR(go(d - 1), go(d - 1))
        if k == "ne":
            return ir.NonEmptyRel(go(d - 1))
        if k == "not":
            return ir.NotR(go(d - 1))
        return ir.ChopRel(go(d - 1), go(d - 1))

    return go(depth)


def generate_rel_terms(left: Universe, right: Universe, depth: int = 2, seed: int = 0) -> Iterator[ir.IntvRel]:
    rng = random.Random(seed)
    while True:
        yield random_rel_term(rng, left, right, depth)


def random_state_rel(rng: random.Random, left: Universe, right: Universe) -> st.StateExpr:
    """Mostly links between same-kind variables on either side."""
    pairs = [(a, b) for a in left.names for b in right.names if _same_kind(left.domain(a), right.domain(b))]
    roll = rng.random()
    if pairs and roll < 0.6:
        a, b = rng.choice(pairs)
        e: st.StateExpr = st.Cmp(rng.choice(("=", "=", "<=", "!=")), st.Ref(a, "L"), st.Ref(b, "R"))
        if rng.random() < 0.3:
            e = st.Disj(e, random_state_expr(rng, right, 0, "R"))
        return e
    if roll < 0.8:
        return random_state_expr(rng, left, 1, "L")
    return random_state_expr(rng, right, 1, "R")


def random_stream(rng: random.Random, u: Universe, carrier: Carrier) -> Stream:
    return Stream.from_codes(u, [rng.randrange(u.n_states) for _ in range(carrier.horizon)])
