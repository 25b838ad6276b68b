"""Systems, observation sets, data refinement and forward simulation.

Every check is an exhaustive search over all streams of the finite carrier.
Searches that quantify over concrete streams start from the concrete side:
concrete streams are filtered by the concrete predicate before any abstract
stream is looked at.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

import numpy as np

from . import intv_pred as ip
from . import intv_rel as ir
from . import state as st
from .intv_pred import IntvPred, PredTable
from .intv_rel import IntvRel, RelContext
from .state import DEFAULT_BUDGET, State, StateExpr, StreamSet, Universe, UniverseError
from .time_core import Carrier, Interval, interval_table
from .verdict import Counterexample, Verdict

PAIR_CHUNK = 1 << 17


@dataclass(frozen=True)
class ObsPair:
    pre: State
    post: State

    def to_json(self) -> dict:
        return {"pre": self.pre.to_json(), "post": self.post.to_json()}

    def __str__(self) -> str:
        return f"({self.pre}) -> ({self.post})"


@dataclass
class SystemSpec:
    """Initialisation, per-process behaviour and finalisation of a system.

    ``init`` is one interval predicate over ``rep`` used for every observable
    start state, or a table from observable states to predicates.  ``final``
    is a state relation whose left side is ``rep`` and right side is ``obs``.
    ``rely`` is conjoined to the processes; it records environment facts the
    processes themselves do not establish.
    """

    name: str
    obs: Universe
    rep: Universe
    init: Union[IntvPred, Mapping[State, IntvPred]]
    ops: dict[str, IntvPred]
    final: StateExpr
    rely: Optional[IntvPred] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        shared = set(self.obs.names) & set(self.rep.names)
        if shared:
            raise UniverseError(f"system {self.name}: observable and representation variables overlap: {sorted(shared)}")
        if not self.ops:
            raise UniverseError(f"system {self.name} has no processes")
        for g in self.ops.values():
            ip.check_term(g, self.rep)
        if self.rely is not None:
            ip.check_term(self.rely, self.rep)
        if isinstance(self.init, Mapping):
            for rho, g in self.init.items():
                ip.check_term(g, self.rep)
            missing = [s for s in self.obs.states() if s not in self.init]
            if missing:
                raise UniverseError(f"system {self.name}: no initialisation for {missing[0]}")
        else:
            ip.check_term(self.init, self.rep)
        st.check_rel(self.final, self.rep, self.obs)

    def init_for(self, rho: State) -> IntvPred:
        if isinstance(self.init, Mapping):
            return self.init[rho]
        return self.init

    def processes(self) -> IntvPred:
        return ip.conj(*self.ops.values())

    def behaviour(self) -> IntvPred:
        """Conjunction of all processes and the rely condition."""
        parts = list(self.ops.values())
        if self.rely is not None:
            parts.append(self.rely)
        return ip.conj(*parts)


# -- observations -------------------------------------------------------------


def _first_reached(hit: np.ndarray, codes: np.ndarray, it) -> dict[int, tuple[int, int, int]]:
    """For every rep state code reachable at some point of a hit interval, its first witness."""
    found: dict[int, tuple] = {}
    for k in sorted(range(len(it)), key=lambda k: it.intervals[k].sort_key()):
        d = it.intervals[k]
        rows = np.flatnonzero(hit[:, k])
        if not rows.size:
            continue
        for t in d:
            col = codes[rows, t]
            uniq, first = np.unique(col, return_index=True)
            for c, i in zip(uniq.tolist(), first.tolist()):
                key = (d.sort_key(), int(rows[i]), t)
                if c not in found or key < found[c][0]:
                    found[c] = (key, int(rows[i]), k, t)
    return {c: v[1:] for c, v in found.items()}


def obs_witnesses(
    system: SystemSpec, carrier: Carrier, budget: int = DEFAULT_BUDGET
) -> dict[ObsPair, tuple[int, Interval, int]]:
    """Observable pairs with a witness ``(stream index, interval, point)`` each."""
    zs = StreamSet.all(system.rep, carrier, budget)
    tab = PredTable(zs)
    body = tab(system.behaviour())
    it = tab.it
    fm = st.truth_matrix(system.final, system.rep, system.obs)
    obs_states = system.obs.states()
    out: dict[ObsPair, tuple[int, Interval, int]] = {}
    by_term: dict[IntvPred, list[State]] = {}
    for rho in obs_states:
        by_term.setdefault(system.init_for(rho), []).append(rho)
    for term, rhos in by_term.items():
        hit = body & tab(ip.PrevP(term))
        reached = _first_reached(hit, zs.codes, it)
        for code in sorted(reached):
            row, k, t = reached[code]
            for j in np.flatnonzero(fm[code]):
                post = obs_states[j]
                for rho in rhos:
                    pair = ObsPair(rho, post)
                    if pair not in out:
                        out[pair] = (row, it.intervals[k], t)
    return out


def obs_set(system: SystemSpec, carrier: Carrier, budget: int = DEFAULT_BUDGET) -> frozenset[ObsPair]:
    return frozenset(obs_witnesses(system, carrier, budget))


def _pair_order(p: ObsPair, u: Universe) -> tuple:
    return (u.code_of(p.pre), u.code_of(p.post))


def check_data_refinement(
    abstract: SystemSpec, concrete: SystemSpec, carrier: Carrier, budget: int = DEFAULT_BUDGET
) -> Verdict:
    """Is every observation of ``concrete`` also an observation of ``abstract``?"""
    if abstract.obs != concrete.obs:
        raise UniverseError("systems observe different variables")
    a = obs_set(abstract, carrier, budget)
    cw = obs_witnesses(concrete, carrier, budget)
    extra = sorted((p for p in cw if p not in a), key=lambda p: _pair_order(p, abstract.obs))
    stats = {"abstract_obs": len(a), "concrete_obs": len(cw)}
    if not extra:
        return Verdict.ok(**stats)
    pair = extra[0]
    row, delta, t = cw[pair]
    zs = StreamSet.all(concrete.rep, carrier, budget)
    cex = Counterexample(
        clause="data-refinement",
        carrier=carrier,
        intervals={"delta": delta},
        streams={"z": zs.stream(row)},
        states={"rho": pair.pre, "rho_post": pair.post},
        points={"t": t},
        note=f"observation {pair} of {concrete.name} is not an observation of {abstract.name}",
    )
    return Verdict.fail(cex, **stats)


# -- simulation -----------------------------------------------------------------


def _key_table(ys: StreamSet, d: Interval) -> tuple[np.ndarray, int]:
    """Index of each stream's restriction to ``d`` among all restrictions."""
    n = ys.universe.n_states
    keys = np.zeros(len(ys), dtype=np.int64)
    mult = 1
    for t in d:
        keys += ys.codes[:, t] * mult
        mult *= n
    return keys, mult


class _Grouper:
    """Any-reduction of boolean columns over streams sharing a restriction."""

    def __init__(self, ys: StreamSet, d: Interval):
        self.keys, self.n_keys = _key_table(ys, d)
        self.unique = len(np.unique(self.keys)) == len(self.keys)
        if not self.unique:
            self.onehot = np.zeros((len(ys), self.n_keys), dtype=np.float32)
            self.onehot[np.arange(len(ys)), self.keys] = 1.0

    def __call__(self, a: np.ndarray) -> np.ndarray:
        if self.unique:
            out = np.zeros((a.shape[0], self.n_keys), dtype=bool)
            out[:, self.keys] = a
            return out
        return (a.astype(np.float32) @ self.onehot) > 0


def _sim_search(args) -> Optional[tuple]:
    """Worker body: smallest violation among the given concrete streams."""
    ref, g, h, yu, zu, carrier, zcodes, zoffsets, budget = args
    ys = StreamSet.all(yu, carrier, budget)
    zs = StreamSet(zu, carrier, zcodes)
    ctx = RelContext(ys, zs, budget)
    it = ctx.it
    ny = len(ys)
    H = ctx.ztab(h)
    G = ctx.ytab(g) if g is not None else np.ones((ny, len(it)), dtype=bool)
    groupers: dict[int, _Grouper] = {}
    order = sorted(range(len(it)), key=lambda k: it.intervals[k].sort_key())
    best = None
    per = max(1, PAIR_CHUNK // ny)
    for z0 in range(0, len(zs), per):
        zsel = np.arange(z0, min(len(zs), z0 + per))
        yi = np.tile(np.arange(ny), len(zsel))
        zi = np.repeat(zsel, ny)
        R = ctx.table(ref, yi, zi).reshape(len(zsel), ny, len(it))
        for k in order:
            d = it.intervals[k]
            if best is not None and best[0][0] < d.sort_key():
                break
            zm = np.flatnonzero(H[zsel, k])
            if not zm.size:
                continue
            target = R[zm, :, k] & G[:, k]
            for k0 in sorted(it.preceders[k], key=lambda j: it.intervals[j].sort_key()):
                grp = groupers.get(k0)
                if grp is None:
                    grp = groupers[k0] = _Grouper(ys, it.intervals[k0])
                bad = grp(R[zm, :, k0]) & ~grp(target)
                if not bad.any():
                    continue
                r = int(np.flatnonzero(bad.any(1))[0])
                key_bad = int(np.flatnonzero(bad[r])[0])
                zrow = int(zsel[zm[r]])
                y0 = int(np.flatnonzero((grp.keys == key_bad) & R[zm[r], :, k0])[0])
                cand = ((d.sort_key(), int(zoffsets[zrow]), it.intervals[k0].sort_key(), y0), k, k0, zrow, y0)
                if best is None or cand[0] < best[0]:
                    best = cand
    if best is None:
        return None
    key, k, k0, zrow, y0 = best
    return key, k, k0, zcodes[zrow].copy(), y0


def _run_sim(ref, g, h, yu, zu, carrier, budget, jobs) -> Optional[tuple]:
    zs = StreamSet.all(zu, carrier, budget)
    StreamSet.all(yu, carrier, budget)
    hz = PredTable(zs)(h).any(1)
    idx = np.flatnonzero(hz)
    if not idx.size:
        return None
    parts = np.array_split(idx, max(1, min(jobs, idx.size)))
    tasks = [(ref, g, h, yu, zu, carrier, zs.codes[p], p, budget) for p in parts if p.size]
    if len(tasks) == 1:
        results = [_sim_search(tasks[0])]
    else:
        with ProcessPoolExecutor(max_workers=len(tasks)) as pool:
            results = list(pool.map(_sim_search, tasks))
    found = [r for r in results if r is not None]
    return min(found, key=lambda r: r[0]) if found else None


def _sim_verdict(ref, g, h, yu, zu, carrier, budget, jobs, clause) -> Verdict:
    hit = _run_sim(ref, g, h, yu, zu, carrier, budget, jobs)
    if hit is None:
        return Verdict.ok()
    _, k, k0, zc, y0 = hit
    it = interval_table(carrier)
    ys = StreamSet.all(yu, carrier, budget)
    cex = Counterexample(
        clause=clause,
        carrier=carrier,
        intervals={"delta": it.intervals[k], "delta0": it.intervals[k0]},
        streams={"z": st.Stream.from_codes(zu, zc), "y0": ys.stream(y0)},
        note="no abstract stream extends y0 on delta0 and satisfies the consequent on delta",
    )
    return Verdict.fail(cex)


def _check_universes(ref: IntvRel, yu: Universe, zu: Universe, *preds: tuple[IntvPred, Universe]) -> None:
    ir.check_rel_term(ref, yu, zu)
    for g, u in preds:
        if g is not None:
            ip.check_term(g, u)


def check_simulates(
    ref: IntvRel,
    g: IntvPred,
    h: IntvPred,
    abstract: Universe,
    concrete: Universe,
    carrier: Carrier,
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
    shrink: bool = True,
) -> Verdict:
    """Does ``h`` simulate ``g`` with respect to ``ref``?

    For every concrete stream z, adjoining intervals d0, d and abstract y0
    with ``ref`` on d0 and ``h`` on d, some y agreeing with y0 on d0 must
    satisfy ``ref`` and ``g`` on d.
    """
    _check_universes(ref, abstract, concrete, (g, abstract), (h, concrete))
    return _shrinking(
        lambda c: _sim_verdict(ref, g, h, abstract, concrete, c, budget, jobs, "simulation"), carrier, shrink
    )


def check_vdash(
    h: IntvPred,
    ref: IntvRel,
    abstract: Universe,
    concrete: Universe,
    carrier: Carrier,
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
    shrink: bool = True,
) -> Verdict:
    """``h ⊩ ref``: the simulation condition without an abstract predicate."""
    _check_universes(ref, abstract, concrete, (h, concrete))
    return _shrinking(
        lambda c: _sim_verdict(ref, None, h, abstract, concrete, c, budget, jobs, "vdash"), carrier, shrink
    )


def _shrinking(run, carrier: Carrier, shrink: bool) -> Verdict:
    v = run(carrier)
    if v or not shrink:
        return v
    for hz in range(1, carrier.horizon):
        small = run(Carrier(hz, carrier.open_ended))
        if not small:
            small.stats["shrunk_from"] = carrier.horizon
            return small
    return v


def check_ref2(
    ref: IntvRel,
    h: IntvPred,
    g: IntvPred,
    abstract: Universe,
    concrete: Universe,
    carrier: Carrier,
    budget: int = DEFAULT_BUDGET,
) -> Verdict:
    """Validity of ``ref ∧ (h ⇃ 2) ⟹ (g ⇃ 1)``, skipping concrete streams where h never holds."""
    _check_universes(ref, abstract, concrete, (g, abstract), (h, concrete))
    ys = StreamSet.all(abstract, carrier, budget)
    zall = StreamSet.all(concrete, carrier, budget)
    keep = np.flatnonzero(PredTable(zall)(h).any(1))
    if not keep.size:
        return Verdict.ok()
    zs = StreamSet(concrete, carrier, zall.codes[keep])
    ctx = RelContext(ys, zs, budget)
    lhs = ir.AndR(ref, ir.Proj2(h))
    rhs = ir.Proj1(g)
    return ir._check_pairs(
        ctx, lambda yi, zi, memo: ctx.table(lhs, yi, zi, memo) & ~ctx.table(rhs, yi, zi, memo), "ref2"
    )


# -- forward simulation ------------------------------------------------------------


def check_init(
    ref: IntvRel, abstract: SystemSpec, concrete: SystemSpec, carrier: Carrier, budget: int = DEFAULT_BUDGET
) -> Verdict:
    """Every concrete initialisation interval is matched by an abstract one related by ``ref``."""
    ys = StreamSet.all(abstract.rep, carrier, budget)
    zs = StreamSet.all(concrete.rep, carrier, budget)
    ctx = RelContext(ys, zs, budget)
    it = ctx.it
    ny = len(ys)
    groups: dict[tuple[IntvPred, IntvPred], State] = {}
    for sigma in abstract.obs.states():
        groups.setdefault((concrete.init_for(sigma), abstract.init_for(sigma)), sigma)
    best = None
    for (ci, ai), sigma in groups.items():
        cit = ctx.ztab(ci)
        ait = ctx.ytab(ai)
        zidx = np.flatnonzero(cit.any(1))
        per = max(1, PAIR_CHUNK // ny)
        for z0 in range(0, zidx.size, per):
            zsel = zidx[z0 : z0 + per]
            yi = np.tile(np.arange(ny), len(zsel))
            zi = np.repeat(zsel, ny)
            R = ctx.table(ref, yi, zi).reshape(len(zsel), ny, len(it))
            ok = (R & ait[None, :, :]).any(1)
            bad = cit[zsel] & ~ok
            hit = ir._first(bad, it)
            if hit is None:
                continue
            r, k = hit
            key = (it.intervals[k].sort_key(), int(zsel[r]), abstract.obs.code_of(sigma))
            if best is None or key < best[0]:
                best = (key, k, int(zsel[r]), sigma)
    if best is None:
        return Verdict.ok()
    _, k, z, sigma = best
    cex = Counterexample(
        clause="init",
        carrier=carrier,
        intervals={"delta": it.intervals[k]},
        streams={"z": zs.stream(z)},
        states={"sigma": sigma},
        note="no abstract initialisation related to the concrete one",
    )
    return Verdict.fail(cex)


def always_part(R: IntvRel) -> Optional[StateExpr]:
    """A state relation that ``R`` forces at every point of any interval where it holds."""
    if isinstance(R, ir.AlwaysRel):
        return R.r
    if isinstance(R, ir.NonEmptyRel):
        return always_part(R.R)
    if isinstance(R, ir.AndR):
        parts = [p for p in (always_part(R.left), always_part(R.right)) if p is not None]
        if len(parts) == 2:
            return st.Conj(*parts)
        return parts[0] if parts else None
    return None


def check_final(
    ref: IntvRel, abstract: SystemSpec, concrete: SystemSpec, carrier: Carrier, budget: int = DEFAULT_BUDGET
) -> Verdict:
    """Wherever ``ref`` holds, a concrete final observation is also an abstract one."""
    ys = StreamSet.all(abstract.rep, carrier, budget)
    zs = StreamSet.all(concrete.rep, carrier, budget)
    cf = st.truth_matrix(concrete.final, concrete.rep, concrete.obs)
    af = st.truth_matrix(abstract.final, abstract.rep, abstract.obs)
    # bad[a, c]: some observable state is a final of concrete state c but not of abstract state a
    bad = ((~af).astype(np.int32) @ cf.T.astype(np.int32)) > 0
    inv = always_part(ref)
    if inv is not None and not (bad & st.truth_matrix(inv, abstract.rep, concrete.rep)).any():
        return Verdict.ok(shortcut=True)
    risky = bad.any(0)
    zidx = np.flatnonzero(risky[zs.codes].any(1))
    ctx = RelContext(ys, zs, budget)
    it = ctx.it
    ny = len(ys)
    per = max(1, PAIR_CHUNK // ny)
    best = None
    for z0 in range(0, zidx.size, per):
        zsel = zidx[z0 : z0 + per]
        yi = np.tile(np.arange(ny), len(zsel))
        zi = np.repeat(zsel, ny)
        R = ctx.table(ref, yi, zi)
        badt = bad[ys.codes[yi], zs.codes[zi]]
        viol = np.zeros_like(R)
        for k, d in enumerate(it.intervals):
            if not d.is_empty:
                viol[:, k] = R[:, k] & badt[:, d.lo : d.hi + 1].any(1)
        hit = ir._first(viol, it)
        if hit is None:
            continue
        p, k = hit
        key = (it.intervals[k].sort_key(), int(zi[p]), int(yi[p]))
        if best is None or key < best[0]:
            best = (key, k, int(yi[p]), int(zi[p]))
    if best is None:
        return Verdict.ok()
    _, k, y, z = best
    d = it.intervals[k]
    t = next(t for t in d if bad[ys.codes[y, t], zs.codes[z, t]])
    a_state, c_state = ys.codes[y, t], zs.codes[z, t]
    obs_states = abstract.obs.states()
    j = int(np.flatnonzero(cf[c_state] & ~af[a_state])[0])
    cex = Counterexample(
        clause="final",
        carrier=carrier,
        intervals={"delta": d},
        streams={"y": ys.stream(y), "z": zs.stream(z)},
        states={"sigma": obs_states[j]},
        points={"t": t},
        note="concrete finalisation not matched by the abstract one",
    )
    return Verdict.fail(cex)


def check_forward_simulation(
    ref: IntvRel,
    abstract: SystemSpec,
    concrete: SystemSpec,
    carrier: Carrier,
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
) -> Verdict:
    """Simulation of the behaviours, then the initialisation and finalisation conditions."""
    if abstract.obs != concrete.obs:
        raise UniverseError("systems observe different variables")
    parts = {
        "simulation": lambda: check_simulates(
            ref, abstract.behaviour(), concrete.behaviour(), abstract.rep, concrete.rep, carrier, budget, jobs
        ),
        "init": lambda: check_init(ref, abstract, concrete, carrier, budget),
        "final": lambda: check_final(ref, abstract, concrete, carrier, budget),
    }
    for name, run in parts.items():
        v = run()
        if not v:
            v.stats["failed_clause"] = name
            return v
    return Verdict.ok()


# -- replay -----------------------------------------------------------------------


def replay_simulation(ref: IntvRel, g: Optional[IntvPred], h: IntvPred, cex: Counterexample, abstract: Universe) -> bool:
    """Re-derive a simulation or ⊩ failure from its witness by direct evaluation."""
    c = cex.carrier
    d, d0 = cex.intervals["delta"], cex.intervals["delta0"]
    z, y0 = cex.streams["z"], cex.streams["y0"]
    if not (ir.eval_rel(ref, d0, y0, z, c) and ip.eval(h, d, z, c)):
        return False
    for y in st.enumerate_streams(abstract, c):
        if not st.matches(d0, y0, y):
            continue
        if ir.eval_rel(ref, d, y, z, c) and (g is None or ip.eval(g, d, y, c)):
            return False
    return True


def replay_observation(system: SystemSpec, cex: Counterexample) -> bool:
    """Does the witness really produce the claimed observation of ``system``?"""
    c = cex.carrier
    z, d, t = cex.streams["z"], cex.intervals["delta"], cex.points["t"]
    rho, post = cex.states["rho"], cex.states["rho_post"]
    ok = ip.eval(ip.And(ip.PrevP(system.init_for(rho)), system.behaviour()), d, z, c)
    return ok and t in d and st.eval_state_rel(system.final, z.states[t], post)
