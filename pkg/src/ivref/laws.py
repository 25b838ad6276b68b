"""Executable law catalog.

Each law draws seeded random instances (terms, relations, universes and a
carrier), checks its side conditions by exhaustive search, and then checks
the conclusion exhaustively over every stream and interval of the instance.
Laws whose side conditions fail for an instance count that instance as
vacuous.  Negative controls are statements that are *not* laws; they pass
once a witness is found.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import generate as gen
from . import intv_pred as ip
from . import intv_rel as ir
from . import refine as rf
from . import state as st
from .intv_pred import IntvPred
from .intv_rel import IntvRel
from .state import Universe
from .time_core import Carrier
from .verdict import Verdict

DEFAULT_INSTANCES = 1000

LAW = "law"
NEGATIVE = "expected-counterexample"


class UnknownLaw(KeyError):
    pass


@dataclass
class Outcome:
    kind: str  # "ok", "fail" or "vacuous"
    witness: Optional[str] = None


OK = Outcome("ok")
VACUOUS = Outcome("vacuous")


@dataclass
class Law:
    law_id: str
    polarity: str
    statement: str
    instance: Callable[[random.Random], Outcome]
    seeds: tuple[Callable[[], Outcome], ...] = ()


@dataclass
class LawReport:
    law_id: str
    polarity: str
    statement: str
    generated: int = 0
    checked: int = 0
    vacuous: int = 0
    failures: int = 0
    witnesses: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def status(self) -> str:
        if self.polarity == NEGATIVE:
            return "pass" if self.failures else "inconclusive"
        if self.failures:
            return "fail"
        return "pass" if self.checked else "inconclusive"

    def to_json(self, timing: bool = False) -> dict:
        return {
            "law": self.law_id,
            "polarity": self.polarity,
            "status": self.status,
            "generated": self.generated,
            "checked": self.checked,
            "vacuous": self.vacuous,
            "failures": self.failures,
            "witnesses": self.witnesses,
            "seconds": round(self.seconds, 3) if timing else None,
        }


@dataclass
class CatalogReport:
    reports: list[LawReport]

    @property
    def ok(self) -> bool:
        return all(r.status == "pass" for r in self.reports)

    def to_json(self, timing: bool = False) -> dict:
        return {"ok": self.ok, "laws": [r.to_json(timing) for r in self.reports]}


# -- instance helpers -----------------------------------------------------------------


@dataclass
class Limits:
    """Caps on generated instances; the CLI's ``--horizon``/``--depth`` set these."""

    horizon: int = 3
    depth: int = 3


LIMITS = Limits()


def _carrier(rng: random.Random, max_h: Optional[int] = None) -> Carrier:
    return Carrier(rng.randint(1, max_h or LIMITS.horizon), rng.random() < 0.3)


def _pred_universe(rng: random.Random) -> Universe:
    return gen.random_universe(rng, max_vars=2, max_domain=3)


def _small_universe(rng: random.Random, prefix: str) -> Universe:
    """At most two variables of domain at most two, or one of domain three."""
    if rng.random() < 0.25:
        return Universe.of([(f"{prefix}0", (0, 1, 2))])
    return gen.random_universe(rng, max_vars=2, max_domain=2, prefix=prefix)


SPLITTY = gen.Weights(
    atoms={"always": 4, "definitely": 2, "sometime": 0.5, "possibly": 0.5, "empty": 1, "lit": 1},
    nodes={"and": 3, "or": 0.5, "ne": 2, "chop": 0.5, "omega": 1},
    leaf_bias=0.45,
)


def _term(rng, u, depth=2, local=True, weights=None) -> IntvPred:
    return gen.random_term(rng, u, rng.randint(0, min(depth, LIMITS.depth)), local=local, weights=weights)


def _implies(g1: IntvPred, g2: IntvPred, u: Universe, c: Carrier) -> Verdict:
    return ip.check_valid_implication(g1, g2, u, c, shrink=False)


def _equiv(g1: IntvPred, g2: IntvPred, u: Universe, c: Carrier) -> Verdict:
    v = _implies(g1, g2, u, c)
    return v if not v else _implies(g2, g1, u, c)


def _fail(v: Verdict, **objs) -> Outcome:
    parts = [f"{k} = {val}" for k, val in objs.items()]
    if v.counterexample is not None:
        parts.append(v.counterexample.describe())
    return Outcome("fail", "\n".join(parts))


def _judge(v: Verdict, **objs) -> Outcome:
    return OK if v else _fail(v, **objs)


def _vdash(h, ref, yu, zu, c) -> Verdict:
    return rf.check_vdash(h, ref, yu, zu, c, shrink=False)


def _sim(ref, g, h, yu, zu, c) -> Verdict:
    return rf.check_simulates(ref, g, h, yu, zu, c, shrink=False)


def _rel(rng, yu, zu, depth=1) -> IntvRel:
    return gen.random_rel_term(rng, yu, zu, depth)


def _linking_rel(rng, yu: Universe, zu: Universe) -> IntvRel:
    """Relations that often admit witnesses: pointwise links, possibly nonempty."""
    roll = rng.random()
    base = ir.AlwaysRel(gen.random_state_rel(rng, yu, zu))
    if roll < 0.5:
        return base
    if roll < 0.75:
        return ir.NonEmptyRel(base)
    return _rel(rng, yu, zu, 2)


def _yz(rng) -> tuple[Universe, Universe, Carrier]:
    return _small_universe(rng, "y"), _small_universe(rng, "z"), _carrier(rng)


# -- predicate laws ------------------------------------------------------------------------


def _chop_units(rng):
    u, c = _pred_universe(rng), _carrier(rng)
    g = _term(rng, u, 3, local=False)
    e = ip.EmptyP()
    v = _equiv(ip.Chop(e, g), g, u, c)
    if not v:
        return _fail(v, g=g, side="left unit")
    return _judge(_equiv(ip.Chop(g, e), g, u, c), g=g, side="right unit")


def _chop_assoc(rng):
    u, c = _pred_universe(rng), _carrier(rng)
    g1, g2, g3 = (_term(rng, u, 2, local=False) for _ in range(3))
    return _judge(_equiv(ip.Chop(ip.Chop(g1, g2), g3), ip.Chop(g1, ip.Chop(g2, g3)), u, c), g1=g1, g2=g2, g3=g3)


def _chop_monotone(rng):
    u, c = _pred_universe(rng), _carrier(rng)
    g1, g2 = _term(rng, u), _term(rng, u)
    g1w = ip.Or(g1, _term(rng, u, 1)) if rng.random() < 0.8 else _term(rng, u)
    g2w = ip.Or(g2, _term(rng, u, 1)) if rng.random() < 0.8 else _term(rng, u)
    if not (_implies(g1, g1w, u, c) and _implies(g2, g2w, u, c)):
        return VACUOUS
    return _judge(_implies(ip.Chop(g1, g2), ip.Chop(g1w, g2w), u, c), g1=g1, g2=g2, g1w=g1w, g2w=g2w)


def _omega_monotone(rng):
    u, c = _pred_universe(rng), _carrier(rng)
    g = _term(rng, u)
    gw = ip.Or(g, _term(rng, u, 1)) if rng.random() < 0.8 else _term(rng, u)
    if not _implies(g, gw, u, c):
        return VACUOUS
    return _judge(_implies(ip.Omega(g), ip.Omega(gw), u, c), g=g, gw=gw)


def _splits_omega(rng):
    u, c = _pred_universe(rng), _carrier(rng)
    g = _term(rng, u, 2, weights=SPLITTY)
    if not ip.check_splits(g, u, c, shrink=False):
        return VACUOUS
    return _judge(_implies(g, ip.Omega(g), u, c), g=g)


def _splits_chop(rng):
    u, c = _pred_universe(rng), _carrier(rng)
    g = _term(rng, u, 2, weights=SPLITTY)
    g1 = ip.Or(g, _term(rng, u, 1)) if rng.random() < 0.7 else _term(rng, u, 1, weights=SPLITTY)
    g2 = ip.Or(_term(rng, u, 1), g) if rng.random() < 0.7 else _term(rng, u, 1, weights=SPLITTY)
    if not (ip.check_splits(g, u, c, shrink=False) and _implies(g, g1, u, c) and _implies(g, g2, u, c)):
        return VACUOUS
    return _judge(_implies(g, ip.Chop(g1, g2), u, c), g=g, g1=g1, g2=g2)


def _joins_chop(rng):
    u, c = _pred_universe(rng), _carrier(rng)
    g = _term(rng, u, 2, weights=SPLITTY)
    if not ip.check_joins(g, u, c, shrink=False):
        return VACUOUS
    g1, g2 = _term(rng, u), _term(rng, u)
    lhs = ip.Chop(ip.And(g, g1), ip.And(g, g2))
    return _judge(_implies(lhs, ip.And(g, ip.Chop(g1, g2)), u, c), g=g, g1=g1, g2=g2)


def _iff(a: IntvPred, b: IntvPred) -> IntvPred:
    return ip.And(ip.Or(ip.Not(a), b), ip.Or(ip.Not(b), a))


def _stability(rng):
    u, c = _pred_universe(rng), _carrier(rng)
    cexp = gen.random_state_expr(rng, u, 2)
    fv = sorted(st.free_vars(cexp))
    v = rng.choice(fv + [rng.choice(u.names)])
    hyp = ip.StableSet(tuple(x for x in fv if x != v))
    concl = ip.And(_iff(ip.Definitely(cexp), ip.Always(cexp)), _iff(ip.Possibly(cexp), ip.Sometime(cexp)))
    return _judge(_implies(hyp, concl, u, c), c=cexp, var=v)


def _apparent_law(strong, weak):
    def run(rng):
        u, c = _pred_universe(rng), _carrier(rng)
        cexp = gen.random_state_expr(rng, u, 2)
        return _judge(_implies(strong(cexp), weak(cexp), u, c), c=cexp)

    return run


def _seed_converse(strong, weak):
    def run():
        u = Universe.of([("u", (0, 1)), ("v", (0, 1))])
        cexp = st.cmp("u", "<", "v")
        return _judge(_implies(strong(cexp), weak(cexp), u, Carrier(3)), c=cexp)

    return run


# -- relation and simulation laws ------------------------------------------------------------


def _refl(rng):
    u, c = _small_universe(rng, "x"), _carrier(rng)
    g = _term(rng, u, 3, local=False)
    return _judge(_sim(ir.AlwaysRel(ir.identity(u)), g, g, u, u, c), g=g)


def _renamed(u: Universe, prefix: str) -> tuple[Universe, dict[str, str]]:
    mapping = {n: f"{prefix}{n[1:]}" for n in u.names}
    return Universe.of([(mapping[n], u.domain(n)) for n in u.names]), mapping


def _id_between(mapping: dict[str, str]) -> st.StateExpr:
    return st.conj(*[st.Cmp("=", st.Ref(a, "L"), st.Ref(b, "R")) for a, b in mapping.items()]) if mapping else st.TRUE


def _trans(rng):
    c = Carrier(rng.randint(1, 3), rng.random() < 0.3)
    if rng.random() < 0.5:
        xu = gen.random_universe(rng, 1, 2, "x")
    else:
        xu = Universe.of([("x0", (False, True))])
    yu, xy = _renamed(xu, "y")
    zu, xz = _renamed(xu, "z")
    yz = {xy[k]: xz[k] for k in xy}
    f = _term(rng, xu, 2)
    g = ip.rename(f, xy) if rng.random() < 0.6 else _term(rng, yu, 2)
    if rng.random() < 0.5:
        g = ip.And(g, _term(rng, yu, 1))
    h = ip.rename(g, yz) if rng.random() < 0.6 else _term(rng, zu, 2)
    if rng.random() < 0.5:
        h = ip.And(h, _term(rng, zu, 1))
    ref1 = ir.AlwaysRel(_id_between(xy)) if rng.random() < 0.5 else _linking_rel(rng, xu, yu)
    ref2 = ir.AlwaysRel(_id_between(yz)) if rng.random() < 0.5 else _linking_rel(rng, yu, zu)
    if not (_sim(ref1, f, g, xu, yu, c) and _sim(ref2, g, h, yu, zu, c)):
        return VACUOUS
    comp = ir.Compose(ref1, ref2, yu)
    return _judge(_sim(comp, f, h, xu, zu, c), f=f, g=g, h=h, ref1=ref1, ref2=ref2)


def _decomp(rng):
    yu, zu, c = _yz(rng)
    ref = _linking_rel(rng, yu, zu)
    h = _term(rng, zu, 2)
    g = _term(rng, yu, 2)
    if not (_vdash(h, ref, yu, zu, c) and rf.check_ref2(ref, h, g, yu, zu, c)):
        return VACUOUS
    return _judge(_sim(ref, g, h, yu, zu, c), ref=ref, g=g, h=h)


def _seq_comp(check_joins: bool):
    def run(rng):
        yu, zu, c = _yz(rng)
        ref = _linking_rel(rng, yu, zu)
        joins = ir.rel_joins(ref, yu, zu, c)
        if check_joins and not joins:
            return VACUOUS
        if not check_joins and joins:
            return VACUOUS
        g1, g2 = _term(rng, zu, 2), _term(rng, zu, 2)
        if not (_vdash(g1, ref, yu, zu, c) and _vdash(g2, ref, yu, zu, c)):
            return VACUOUS
        return _judge(_vdash(ip.Chop(g1, g2), ref, yu, zu, c), ref=ref, g1=g1, g2=g2)

    return run


def _seed_seq_no_joins():
    # a relation that holds on intervals of at most one point fails to join
    yu = Universe.of([("y0", (False, True))])
    zu = Universe.of([("z0", (False, True))])
    c = Carrier(2)
    one = ip.Not(ip.Chop(ip.NonEmpty(ip.TRUE_P), ip.NonEmpty(ip.TRUE_P)))
    ref = ir.Proj2(one)
    point = ip.And(ip.NonEmpty(ip.TRUE_P), one)
    if ir.rel_joins(ref, yu, zu, c) or not _vdash(point, ref, yu, zu, c):
        return VACUOUS
    return _judge(_vdash(ip.Chop(point, point), ref, yu, zu, c), ref=ref, g1=point, g2=point)


def _iteration(guarded: bool):
    def run(rng):
        yu, zu, c = _yz(rng)
        ref = _linking_rel(rng, yu, zu)
        if not ir.rel_joins(ref, yu, zu, c):
            return VACUOUS
        g = _term(rng, zu, 2)
        if guarded:
            g = ip.NonEmpty(g)
            if not _vdash(ip.EmptyP(), ref, yu, zu, c):
                return VACUOUS
        if not _vdash(g, ref, yu, zu, c):
            return VACUOUS
        return _judge(_vdash(ip.Omega(g), ref, yu, zu, c), ref=ref, g=g)

    return run


def _weaken(rng):
    yu, zu, c = _yz(rng)
    ref = _linking_rel(rng, yu, zu)
    g2 = _term(rng, zu, 2)
    g1 = ip.And(g2, _term(rng, zu, 1)) if rng.random() < 0.7 else _term(rng, zu, 2)
    if not (_vdash(g2, ref, yu, zu, c) and _implies(g1, g2, zu, c)):
        return VACUOUS
    return _judge(_vdash(g1, ref, yu, zu, c), ref=ref, g1=g1, g2=g2)


def _disjunction(both: bool):
    def run(rng):
        yu, zu, c = _yz(rng)
        r1, r2 = _linking_rel(rng, yu, zu), _linking_rel(rng, yu, zu)
        g = _term(rng, zu, 2)
        h1, h2 = _vdash(g, r1, yu, zu, c), _vdash(g, r2, yu, zu, c)
        if not ((h1 and h2) if both else (h1 or h2)):
            return VACUOUS
        return _judge(_vdash(g, ir.OrR(r1, r2), yu, zu, c), g=g, ref1=r1, ref2=r2)

    return run


def _disjointness(conj: bool):
    def run(rng):
        c = _carrier(rng)
        wu = gen.random_universe(rng, 1, 2, "w")
        xu = gen.random_universe(rng, 1, 2, "x")
        yu = wu.union(xu)
        zu = _small_universe(rng, "z")
        rw, rx = _linking_rel(rng, wu, zu), _linking_rel(rng, xu, zu)
        g1, g2 = _term(rng, zu, 2), _term(rng, zu, 2)
        if not (_vdash(g1, rw, wu, zu, c) and _vdash(g2, rx, xu, zu, c)):
            return VACUOUS
        combined = ir.AndR(rw, rx) if conj else ir.OrR(rw, rx)
        return _judge(_vdash(ip.And(g1, g2), combined, yu, zu, c), g1=g1, g2=g2, ref_w=rw, ref_x=rx)

    return run


def _ref_change(weaker: bool):
    """Changing ref on one side of ⊩ is not sound in either direction."""

    def run(rng):
        yu, zu, c = _yz(rng)
        r1 = _linking_rel(rng, yu, zu)
        r2 = ir.OrR(r1, _rel(rng, yu, zu, 1)) if rng.random() < 0.7 else _linking_rel(rng, yu, zu)
        if not ir.check_rel_implication(r1, r2, yu, zu, c):
            return VACUOUS
        g = _term(rng, zu, 2)
        have, want = (r1, r2) if weaker else (r2, r1)
        if not _vdash(g, have, yu, zu, c):
            return VACUOUS
        return _judge(_vdash(g, want, yu, zu, c), g=g, ref_held=have, ref_claimed=want)

    return run


def _seed_ref_change(weaker: bool):
    def run():
        yu = Universe.of([("y0", (False, True))])
        zu = Universe.of([("z0", (False, True))])
        c = Carrier(2)
        strong = ir.AlwaysRel(st.Cmp("=", st.Ref("y0", "L"), st.Ref("z0", "R")))
        weak = ir.LitR(True)
        g = ip.TRUE_P
        if weaker:
            # true ⊩ (y0 = z0 pointwise) holds; a weaker relation that fixes y0 on the past but not the present
            strong, weak = ir.AlwaysRel(st.TRUE), ir.OrR(ir.NonEmptyRel(ir.AlwaysRel(st.is_true("y0", "L"))), ir.Proj2(ip.Sometime(st.is_true("z0"))))
            if not ir.check_rel_implication(strong, weak, yu, zu, c) or not _vdash(g, strong, yu, zu, c):
                return VACUOUS
            return _judge(_vdash(g, weak, yu, zu, c), g=g, ref_held=strong, ref_claimed=weak)
        if not _vdash(g, weak, yu, zu, c):
            return VACUOUS
        g2 = ip.NonEmpty(ip.Always(st.is_true("z0")))
        return _judge(_vdash(g2, strong, yu, zu, c), g=g2, ref_held=weak, ref_claimed=strong)

    return run


# -- soundness ---------------------------------------------------------------------------


def random_system_pair(rng: random.Random):
    """A small abstract/concrete pair and a candidate relation, often a renamed copy."""
    n = Universe.of([("M", (0, 1))])
    yu = _small_universe(rng, "y")
    y0 = yu.names[0]
    dom = yu.domain(y0)
    final_a = _final_rel(y0, dom)
    a_ops = {f"p{i}": _term(rng, yu, 2) for i in range(rng.randint(1, 2))}
    a_init = _term(rng, yu, 1)
    A = rf.SystemSpec("A", n, yu, a_init, a_ops, final_a)
    if rng.random() < 0.6:
        zu, ren = _renamed(yu, "z")
        c_ops = {p: ip.rename(g, ren) for p, g in a_ops.items()}
        if rng.random() < 0.5:
            p = rng.choice(list(c_ops))
            c_ops[p] = ip.And(c_ops[p], _term(rng, zu, 1))
        c_init = ip.rename(a_init, ren) if rng.random() < 0.8 else _term(rng, zu, 1)
        ref = ir.AlwaysRel(_id_between(ren)) if rng.random() < 0.7 else _linking_rel(rng, yu, zu)
        zfirst = ren[y0]
    else:
        zu = _small_universe(rng, "z")
        c_ops = {p: _term(rng, zu, 2) for p in a_ops}
        c_init = _term(rng, zu, 1)
        ref = _linking_rel(rng, yu, zu)
        zfirst = zu.names[0]
    final_c = _final_rel(zfirst, zu.domain(zfirst))
    C = rf.SystemSpec("C", n, zu, c_init, c_ops, final_c)
    return A, C, ref


def _final_rel(var: str, dom) -> st.StateExpr:
    if all(isinstance(v, bool) for v in dom):
        return st.Iff(st.IsTrue(st.Ref(var, "L")), st.Cmp("=", st.Ref("M", "R"), st.Val(1)))
    return st.Cmp("=", st.Ref(var, "L"), st.Ref("M", "R")) if set(dom) <= {0, 1} else st.Cmp(
        "<=", st.Ref("M", "R"), st.Ref(var, "L")
    )


def _soundness(rng):
    A, C, ref = random_system_pair(rng)
    c = _carrier(rng)
    if not rf.check_forward_simulation(ref, A, C, c):
        return VACUOUS
    v = rf.check_data_refinement(A, C, c)
    return _judge(v, A_ops=list(map(str, A.ops.values())), C_ops=list(map(str, C.ops.values())), ref=ref)


# -- catalog -------------------------------------------------------------------------------


def _catalog() -> dict[str, Law]:
    laws = [
        Law("refl", LAW, "always id simulates every g by itself", _refl),
        Law("trans", LAW, "simulation composes through relational composition", _trans),
        Law("decomp", LAW, "h ⊩ ref and ref ∧ h⇃2 ⟹ g⇃1 give simulation", _decomp),
        Law("seq-comp", LAW, "⊩ is closed under chop when ref joins", _seq_comp(True)),
        Law("iteration", LAW, "g ⊩ ref ⟹ gω ⊩ ref when ref joins", _iteration(False)),
        Law(
            "iteration-guarded",
            LAW,
            "g nonempty, empty ⊩ ref and g ⊩ ref give gω ⊩ ref when ref joins",
            _iteration(True),
        ),
        Law("weaken", LAW, "g2 ⊩ ref and g1 ⟹ g2 give g1 ⊩ ref", _weaken),
        Law("disjunction", LAW, "g ⊩ ref1 or g ⊩ ref2 give g ⊩ ref1 ∨ ref2", _disjunction(False)),
        Law("disjunction-both", LAW, "g ⊩ ref1 and g ⊩ ref2 give g ⊩ ref1 ∨ ref2", _disjunction(True)),
        Law("disjointness-and", LAW, "⊩ over disjoint variable sets combines with ∧", _disjointness(True)),
        Law("disjointness-or", LAW, "⊩ over disjoint variable sets combines with ∨", _disjointness(False)),
        Law("splits-chop", LAW, "g splits, g ⟹ g1, g ⟹ g2 give g ⟹ g1 ; g2", _splits_chop),
        Law("joins-chop", LAW, "g joins gives (g ∧ g1) ; (g ∧ g2) ⟹ g ∧ (g1 ; g2)", _joins_chop),
        Law("splits-omega", LAW, "g splits gives g ⟹ gω", _splits_omega),
        Law("chop-units", LAW, "empty ; g = g = g ; empty", _chop_units),
        Law("chop-assoc", LAW, "(g1 ; g2) ; g3 = g1 ; (g2 ; g3)", _chop_assoc),
        Law("chop-monotone", LAW, "chop is monotone in both arguments", _chop_monotone),
        Law("omega-monotone", LAW, "ω is monotone", _omega_monotone),
        Law("stability", LAW, "stable vars.c minus one variable makes apparent and actual evaluation agree", _stability),
        Law(
            "definitely-implies-always",
            LAW,
            "definitely c ⟹ always c",
            _apparent_law(ip.Definitely, ip.Always),
        ),
        Law(
            "sometime-implies-possibly",
            LAW,
            "sometime c ⟹ possibly c",
            _apparent_law(ip.Sometime, ip.Possibly),
        ),
        Law("soundness", LAW, "forward simulation implies data refinement", _soundness),
        Law(
            "seq-comp-no-joins",
            NEGATIVE,
            "sequential composition of ⊩ without the joins condition",
            _seq_comp(False),
            seeds=(_seed_seq_no_joins,),
        ),
        Law(
            "always-implies-definitely",
            NEGATIVE,
            "always c ⟹ definitely c",
            _apparent_law(ip.Always, ip.Definitely),
            seeds=(_seed_converse(ip.Always, ip.Definitely),),
        ),
        Law(
            "possibly-implies-sometime",
            NEGATIVE,
            "possibly c ⟹ sometime c",
            _apparent_law(ip.Possibly, ip.Sometime),
            seeds=(_seed_converse(ip.Possibly, ip.Sometime),),
        ),
        Law("ref-weaken", NEGATIVE, "g ⊩ ref1 and ref1 ⟹ ref2 give g ⊩ ref2", _ref_change(True), seeds=(_seed_ref_change(True),)),
        Law(
            "ref-strengthen",
            NEGATIVE,
            "g ⊩ ref2 and ref1 ⟹ ref2 give g ⊩ ref1",
            _ref_change(False),
            seeds=(_seed_ref_change(False),),
        ),
    ]
    return {law.law_id: law for law in laws}


CATALOG = _catalog()


def law_ids() -> list[str]:
    return list(CATALOG)


def run_law(
    law_id: str,
    budget: int = DEFAULT_INSTANCES,
    seed: int = 0,
    max_attempts: Optional[int] = None,
    depth: Optional[int] = None,
    horizon: Optional[int] = None,
) -> LawReport:
    """Run one law on up to ``budget`` checked instances.

    Vacuous draws (side conditions false) do not count towards the budget;
    at most ``max_attempts`` draws are made (default ``20 * budget``).
    Negative controls stop at their first witness.
    """
    if law_id not in CATALOG:
        raise UnknownLaw(law_id)
    saved = (LIMITS.horizon, LIMITS.depth)
    if horizon is not None:
        LIMITS.horizon = horizon
    if depth is not None:
        LIMITS.depth = depth
    try:
        return _run_law(CATALOG[law_id], budget, seed, max_attempts)
    finally:
        LIMITS.horizon, LIMITS.depth = saved


def _run_law(law: Law, budget: int, seed: int, max_attempts: Optional[int]) -> LawReport:
    law_id = law.law_id
    rep = LawReport(law_id, law.polarity, law.statement)
    start = time.perf_counter()
    if budget <= 0:
        rep.seconds = time.perf_counter() - start
        return rep
    attempts = max_attempts if max_attempts is not None else 20 * budget
    rng = random.Random(f"{law_id}:{seed}")

    def record(out: Outcome) -> None:
        rep.generated += 1
        if out.kind == "vacuous":
            rep.vacuous += 1
            return
        rep.checked += 1
        if out.kind == "fail":
            rep.failures += 1
            if len(rep.witnesses) < 3:
                rep.witnesses.append(out.witness)

    for s in law.seeds:
        record(s())
    while rep.checked < budget and rep.generated < attempts:
        if law.polarity == NEGATIVE and rep.failures:
            break
        record(law.instance(rng))
    rep.seconds = time.perf_counter() - start
    return rep


def run_all(
    budget: int = DEFAULT_INSTANCES,
    seed: int = 0,
    laws: Optional[list[str]] = None,
    jobs: int = 1,
    depth: Optional[int] = None,
    horizon: Optional[int] = None,
) -> CatalogReport:
    ids = laws or law_ids()
    for i in ids:
        if i not in CATALOG:
            raise UnknownLaw(i)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            n = len(ids)
            reports = list(pool.map(run_law, ids, [budget] * n, [seed] * n, [None] * n, [depth] * n, [horizon] * n))
    else:
        reports = [run_law(i, budget, seed, depth=depth, horizon=horizon) for i in ids]
    return CatalogReport(reports)
