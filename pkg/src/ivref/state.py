"""Finite-domain variables, states, streams and state expressions.

Streams come in two shapes.  :class:`Stream` is a value object used by the
per-stream evaluators and for witnesses; :class:`StreamSet` packs many
streams over one universe into an integer array of state codes, which is what
the exhaustive checkers work on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union

import numpy as np

from .time_core import Carrier, Interval

DEFAULT_BUDGET = 2_000_000


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration would exceed the configured budget."""

    def __init__(self, what: str, size: int, budget: int):
        super().__init__(f"refusing to enumerate {what}: {size} items exceeds budget {budget}")
        self.what = what
        self.size = size
        self.budget = budget


class UniverseError(ValueError):
    pass


class _Infinity:
    __slots__ = ("sign",)

    def __init__(self, sign: int):
        self.sign = sign

    def __repr__(self) -> str:
        return "-inf" if self.sign < 0 else "+inf"

    def __reduce__(self):
        return (_infinity, (self.sign,))


def _infinity(sign: int) -> _Infinity:
    return NEG_INF if sign < 0 else POS_INF


NEG_INF = _Infinity(-1)
POS_INF = _Infinity(1)

Value = Union[bool, int, str, _Infinity]


def order_key(value: Value) -> tuple:
    if value is NEG_INF:
        return (-1, 0)
    if value is POS_INF:
        return (1, 0)
    if isinstance(value, str):
        return (0, 1, value)
    return (0, 0, int(value))


def format_value(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def value_to_json(value: Value):
    if isinstance(value, _Infinity):
        return repr(value)
    return value


def value_from_json(raw) -> Value:
    if raw == "-inf":
        return NEG_INF
    if raw == "+inf":
        return POS_INF
    return raw


# -- universes -------------------------------------------------------------


def _typed(value: Value) -> tuple:
    # keeps True and 1 apart, which plain tuple equality does not
    return (type(value).__name__, order_key(value))


@dataclass(frozen=True, eq=False)
class Universe:
    """Ordered variables, each with an ordered finite domain."""

    names: tuple[str, ...]
    domains: tuple[tuple[Value, ...], ...]

    def __post_init__(self) -> None:
        if len(self.names) != len(self.domains):
            raise UniverseError("names and domains differ in length")
        if len(set(self.names)) != len(self.names):
            raise UniverseError(f"duplicate variable names in {self.names}")
        for name, dom in zip(self.names, self.domains):
            if not dom:
                raise UniverseError(f"variable {name!r} has an empty domain")
            if len(set(map(order_key, dom))) != len(dom):
                raise UniverseError(f"variable {name!r} has repeated domain values")

    @classmethod
    def of(cls, pairs: Union[Mapping[str, Sequence[Value]], Iterable[tuple[str, Sequence[Value]]]]) -> "Universe":
        items = pairs.items() if isinstance(pairs, Mapping) else pairs
        names, domains = [], []
        for name, dom in items:
            names.append(name)
            domains.append(tuple(dom))
        return cls(tuple(names), tuple(domains))

    @classmethod
    def empty(cls) -> "Universe":
        return cls((), ())

    def _key(self) -> tuple:
        return (self.names, tuple(tuple(map(_typed, d)) for d in self.domains))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Universe) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def domain(self, name: str) -> tuple[Value, ...]:
        try:
            return self.domains[self.names.index(name)]
        except ValueError:
            raise UniverseError(f"unknown variable {name!r}") from None

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UniverseError(f"unknown variable {name!r}") from None

    @property
    def n_states(self) -> int:
        n = 1
        for dom in self.domains:
            n *= len(dom)
        return n

    @property
    def radices(self) -> tuple[int, ...]:
        return tuple(len(d) for d in self.domains)

    def states(self) -> list["State"]:
        return list(_states_of(self))

    def state_at(self, code: int) -> "State":
        return _states_of(self)[code]

    def code_of(self, state: "State") -> int:
        if state.names != self.names:
            raise UniverseError(f"state over {state.names} is not over {self.names}")
        code = 0
        for dom, val in zip(self.domains, state.values):
            code = code * len(dom) + _value_index(dom, val)
        return code

    def state(self, **values: Value) -> "State":
        return State.of(self, values)

    def restrict(self, names: Iterable[str]) -> "Universe":
        keep = set(names)
        missing = keep - set(self.names)
        if missing:
            raise UniverseError(f"unknown variables {sorted(missing)}")
        return Universe(
            tuple(n for n in self.names if n in keep),
            tuple(d for n, d in zip(self.names, self.domains) if n in keep),
        )

    def union(self, other: "Universe") -> "Universe":
        overlap = set(self.names) & set(other.names)
        if overlap:
            raise UniverseError(f"universes overlap on {sorted(overlap)}")
        return Universe(self.names + other.names, self.domains + other.domains)

    def __str__(self) -> str:
        parts = [f"{n}:{{{','.join(format_value(v) for v in d)}}}" for n, d in zip(self.names, self.domains)]
        return "{" + "; ".join(parts) + "}"


def _value_index(dom: tuple[Value, ...], value: Value) -> int:
    key = order_key(value)
    for i, v in enumerate(dom):
        if order_key(v) == key:
            return i
    raise UniverseError(f"value {format_value(value)} is outside domain {dom}")


@lru_cache(maxsize=256)
def _states_of(universe: Universe) -> tuple["State", ...]:
    return tuple(State(universe.names, vals) for vals in itertools.product(*universe.domains))


@lru_cache(maxsize=256)
def value_codes(universe: Universe) -> np.ndarray:
    """``(n_states, n_vars)`` array of per-variable value indices for each state code."""
    if not universe.names:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(r) for r in universe.radices], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


# -- states and streams ----------------------------------------------------


@dataclass(frozen=True)
class State:
    names: tuple[str, ...]
    values: tuple[Value, ...]

    @classmethod
    def of(cls, universe: Universe, values: Mapping[str, Value]) -> "State":
        if set(values) != set(universe.names):
            raise UniverseError(f"state must define exactly {universe.names}, got {sorted(values)}")
        vals = []
        for name, dom in zip(universe.names, universe.domains):
            v = values[name]
            vals.append(dom[_value_index(dom, v)])
        return cls(universe.names, tuple(vals))

    def __getitem__(self, name: str) -> Value:
        try:
            return self.values[self.names.index(name)]
        except ValueError:
            raise UniverseError(f"state has no variable {name!r}") from None

    def as_dict(self) -> dict[str, Value]:
        return dict(zip(self.names, self.values))

    def restrict(self, names: Iterable[str]) -> "State":
        keep = set(names)
        pairs = [(n, v) for n, v in zip(self.names, self.values) if n in keep]
        return State(tuple(n for n, _ in pairs), tuple(v for _, v in pairs))

    def to_json(self) -> dict:
        return {n: value_to_json(v) for n, v in zip(self.names, self.values)}

    def __str__(self) -> str:
        return "{" + ", ".join(f"{n}={format_value(v)}" for n, v in zip(self.names, self.values)) + "}"


@dataclass(frozen=True)
class Stream:
    universe: Universe
    states: tuple[State, ...]

    def __post_init__(self) -> None:
        if not self.states:
            raise UniverseError("a stream needs at least one time point")
        for st in self.states:
            if st.names != self.universe.names:
                raise UniverseError(f"stream state over {st.names} is not over {self.universe.names}")

    @classmethod
    def from_columns(cls, universe: Universe, columns: Mapping[str, Sequence[Value]]) -> "Stream":
        lengths = {len(col) for col in columns.values()}
        if len(lengths) > 1:
            raise UniverseError("stream columns differ in length")
        horizon = lengths.pop() if lengths else 1
        states = tuple(State.of(universe, {n: columns[n][t] for n in universe.names}) for t in range(horizon))
        return cls(universe, states)

    @classmethod
    def from_codes(cls, universe: Universe, codes: Sequence[int]) -> "Stream":
        return cls(universe, tuple(universe.state_at(int(c)) for c in codes))

    @property
    def horizon(self) -> int:
        return len(self.states)

    def at(self, t: int) -> State:
        return self.states[t]

    def codes(self) -> tuple[int, ...]:
        return tuple(self.universe.code_of(s) for s in self.states)

    def column(self, name: str) -> list[Value]:
        return [s[name] for s in self.states]

    def restrict(self, names: Iterable[str]) -> "Stream":
        sub = self.universe.restrict(names)
        return Stream(sub, tuple(s.restrict(sub.names) for s in self.states))

    def to_json(self, label: Optional[str] = None) -> list[dict]:
        out = []
        for name in self.universe.names:
            entry = {"var": name, "values": [value_to_json(v) for v in self.column(name)]}
            if label is not None:
                entry = {"stream": label, **entry}
            out.append(entry)
        return out

    def __str__(self) -> str:
        return " ".join(f"{n}=" + ",".join(format_value(v) for v in self.column(n)) for n in self.universe.names)


def check_same_space(y: Stream, z: Stream) -> None:
    if y.universe != z.universe:
        raise UniverseError("streams range over different universes")
    if y.horizon != z.horizon:
        raise UniverseError("streams range over different carriers")


def matches(delta: Interval, y: Stream, z: Stream) -> bool:
    """``y`` and ``z`` agree at every point of ``delta``."""
    check_same_space(y, z)
    return all(y.states[t] == z.states[t] for t in delta)


def join_streams(s1: Stream, s2: Stream) -> Stream:
    """Pointwise union of two streams over disjoint universes."""
    if s1.horizon != s2.horizon:
        raise UniverseError("streams range over different carriers")
    universe = s1.universe.union(s2.universe)
    states = tuple(State(universe.names, a.values + b.values) for a, b in zip(s1.states, s2.states))
    return Stream(universe, states)


def apparent(delta: Interval, s: Stream) -> frozenset[State]:
    """States assembled by reading each variable at some, possibly different, point of ``delta``."""
    if delta.is_empty:
        return frozenset()
    observed = []
    for name, dom in zip(s.universe.names, s.universe.domains):
        seen = {order_key(s.states[t][name]) for t in delta}
        observed.append([v for v in dom if order_key(v) in seen])
    return frozenset(State(s.universe.names, vals) for vals in itertools.product(*observed))


def stream_count(universe: Universe, carrier: Carrier) -> int:
    return universe.n_states ** carrier.horizon


def enumerate_streams(universe: Universe, carrier: Carrier, budget: int = DEFAULT_BUDGET) -> Iterator[Stream]:
    """Every stream over ``universe`` exactly once, lexicographic in the state codes by time."""
    total = stream_count(universe, carrier)
    if total > budget:
        raise BudgetExceeded(f"streams over {universe} at horizon {carrier.horizon}", total, budget)
    states = universe.states()
    for combo in itertools.product(states, repeat=carrier.horizon):
        yield Stream(universe, combo)


@dataclass(frozen=True, eq=False)
class StreamSet:
    """A batch of streams as an ``(n, horizon)`` array of state codes."""

    universe: Universe
    carrier: Carrier
    codes: np.ndarray = field(repr=False)

    @classmethod
    def all(cls, universe: Universe, carrier: Carrier, budget: int = DEFAULT_BUDGET) -> "StreamSet":
        total = stream_count(universe, carrier)
        if total > budget:
            raise BudgetExceeded(f"streams over {universe} at horizon {carrier.horizon}", total, budget)
        return cls(universe, carrier, _all_codes(universe.n_states, carrier.horizon))

    @classmethod
    def of(cls, streams: Sequence[Stream], carrier: Carrier) -> "StreamSet":
        if not streams:
            raise UniverseError("empty stream batch")
        universe = streams[0].universe
        codes = np.array([s.codes() for s in streams], dtype=np.int64).reshape(len(streams), carrier.horizon)
        return cls(universe, carrier, codes)

    def __len__(self) -> int:
        return self.codes.shape[0]

    def stream(self, i: int) -> Stream:
        return Stream.from_codes(self.universe, self.codes[i])

    def values(self) -> np.ndarray:
        """``(n, horizon, n_vars)`` value indices."""
        return value_codes(self.universe)[self.codes]


@lru_cache(maxsize=32)
def _all_codes(n_states: int, horizon: int) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(n_states)] * horizon, indexing="ij")
    out = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    out.setflags(write=False)
    return out


# -- state expressions -----------------------------------------------------
#
# One expression language serves both state predicates (references without a
# side) and state relations (references tagged "L" or "R").


class StateExpr:
    __slots__ = ()

    def __and__(self, other: "StateExpr") -> "StateExpr":
        return Conj(self, other)

    def __or__(self, other: "StateExpr") -> "StateExpr":
        return Disj(self, other)

    def __invert__(self) -> "StateExpr":
        return Neg(self)


@dataclass(frozen=True)
class Ref:
    name: str
    side: Optional[str] = None

    def __str__(self) -> str:
        return self.name if self.side is None else f"{self.side}.{self.name}"


@dataclass(frozen=True)
class Val:
    value: Value

    def __str__(self) -> str:
        return format_value(self.value)


Operand = Union[Ref, "Val"]

_CMP = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class Const(StateExpr):
    value: bool


@dataclass(frozen=True)
class IsTrue(StateExpr):
    """A boolean variable used as a predicate."""

    ref: Ref


@dataclass(frozen=True)
class Cmp(StateExpr):
    op: str
    left: Operand
    right: Operand

    def __post_init__(self) -> None:
        if self.op not in _CMP:
            raise ValueError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class Neg(StateExpr):
    arg: StateExpr


@dataclass(frozen=True)
class Conj(StateExpr):
    left: StateExpr
    right: StateExpr


@dataclass(frozen=True)
class Disj(StateExpr):
    left: StateExpr
    right: StateExpr


@dataclass(frozen=True)
class Iff(StateExpr):
    left: StateExpr
    right: StateExpr


TRUE = Const(True)
FALSE = Const(False)


def var(name: str, side: Optional[str] = None) -> Ref:
    return Ref(name, side)


def cmp(left: Union[Operand, str, Value], op: str, right: Union[Operand, str, Value]) -> Cmp:
    """Comparison helper: bare strings are variable names, other values literals."""
    return Cmp(op, _operand(left), _operand(right))


def _operand(x) -> Operand:
    if isinstance(x, (Ref, Val)):
        return x
    if isinstance(x, str):
        return Ref(x)
    return Val(x)


def eq(a, b) -> Cmp:
    return cmp(a, "=", b)


def is_true(name: str, side: Optional[str] = None) -> IsTrue:
    return IsTrue(Ref(name, side))


def conj(*parts: StateExpr) -> StateExpr:
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = Conj(out, p)
    return out


def refs(expr: StateExpr) -> set[Ref]:
    if isinstance(expr, Const):
        return set()
    if isinstance(expr, IsTrue):
        return {expr.ref}
    if isinstance(expr, Cmp):
        return {o for o in (expr.left, expr.right) if isinstance(o, Ref)}
    if isinstance(expr, Neg):
        return refs(expr.arg)
    if isinstance(expr, (Conj, Disj, Iff)):
        return refs(expr.left) | refs(expr.right)
    raise TypeError(f"not a state expression: {expr!r}")


def map_refs(expr: StateExpr, fn: Callable[[Ref], Ref]) -> StateExpr:
    """Rebuild ``expr`` with every variable reference replaced by ``fn(ref)``."""
    if isinstance(expr, Const):
        return expr
    if isinstance(expr, IsTrue):
        return IsTrue(fn(expr.ref))
    if isinstance(expr, Cmp):
        side = [fn(o) if isinstance(o, Ref) else o for o in (expr.left, expr.right)]
        return Cmp(expr.op, side[0], side[1])
    if isinstance(expr, Neg):
        return Neg(map_refs(expr.arg, fn))
    if isinstance(expr, (Conj, Disj, Iff)):
        return type(expr)(map_refs(expr.left, fn), map_refs(expr.right, fn))
    raise TypeError(f"not a state expression: {expr!r}")


def free_vars(expr: StateExpr) -> frozenset[str]:
    """Variables a state predicate refers to."""
    return frozenset(r.name for r in refs(expr))


def _lookup(ref: Ref, env: Mapping[Optional[str], State]) -> Value:
    try:
        state = env[ref.side]
    except KeyError:
        raise UniverseError(f"no state bound for side {ref.side!r} of {ref}") from None
    return state[ref.name]


def _operand_value(op: Operand, env) -> Value:
    return op.value if isinstance(op, Val) else _lookup(op, env)


def evaluate(expr: StateExpr, env: Mapping[Optional[str], State]) -> bool:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, IsTrue):
        return _lookup(expr.ref, env) is True
    if isinstance(expr, Cmp):
        a = _operand_value(expr.left, env)
        b = _operand_value(expr.right, env)
        return _CMP[expr.op](order_key(a), order_key(b))
    if isinstance(expr, Neg):
        return not evaluate(expr.arg, env)
    if isinstance(expr, Conj):
        return evaluate(expr.left, env) and evaluate(expr.right, env)
    if isinstance(expr, Disj):
        return evaluate(expr.left, env) or evaluate(expr.right, env)
    if isinstance(expr, Iff):
        return evaluate(expr.left, env) == evaluate(expr.right, env)
    raise TypeError(f"not a state expression: {expr!r}")


def eval_state_pred(expr: StateExpr, state: State) -> bool:
    return evaluate(expr, {None: state})


def eval_state_rel(expr: StateExpr, left: State, right: State) -> bool:
    return evaluate(expr, {"L": left, "R": right})


def check_pred(expr: StateExpr, universe: Universe) -> None:
    """Raise unless every reference resolves in ``universe`` with comparable operands."""
    _check(expr, {None: universe})


def check_rel(expr: StateExpr, left: Universe, right: Universe) -> None:
    _check(expr, {"L": left, "R": right})


def _check(expr: StateExpr, spaces: Mapping[Optional[str], Universe]) -> None:
    for r in refs(expr):
        if r.side not in spaces:
            raise UniverseError(f"reference {r} has no matching state space")
        if r.name not in spaces[r.side]:
            raise UniverseError(f"unknown variable {r}")
    for node in _walk(expr):
        if isinstance(node, IsTrue):
            dom = spaces[node.ref.side].domain(node.ref.name)
            if not all(isinstance(v, bool) for v in dom):
                raise UniverseError(f"{node.ref} is not boolean and cannot stand alone as a predicate")
        if isinstance(node, Cmp) and isinstance(node.left, Ref) and isinstance(node.right, Ref):
            d1 = spaces[node.left.side].domain(node.left.name)
            d2 = spaces[node.right.side].domain(node.right.name)
            if {type(v) for v in d1 if not isinstance(v, _Infinity)} != {
                type(v) for v in d2 if not isinstance(v, _Infinity)
            }:
                raise UniverseError(f"cannot compare {node.left} with {node.right}: domains differ in kind")


def _walk(expr: StateExpr) -> Iterator[StateExpr]:
    yield expr
    if isinstance(expr, Neg):
        yield from _walk(expr.arg)
    elif isinstance(expr, (Conj, Disj, Iff)):
        yield from _walk(expr.left)
        yield from _walk(expr.right)


@lru_cache(maxsize=4096)
def truth_vector(expr: StateExpr, universe: Universe) -> np.ndarray:
    """Truth value of a state predicate at every state code of ``universe``."""
    check_pred(expr, universe)
    out = np.array([eval_state_pred(expr, st) for st in universe.states()], dtype=bool)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=4096)
def truth_matrix(expr: StateExpr, left: Universe, right: Universe) -> np.ndarray:
    """``(left states, right states)`` truth table of a state relation."""
    check_rel(expr, left, right)
    ls, rs = left.states(), right.states()
    out = np.array([[eval_state_rel(expr, a, b) for b in rs] for a in ls], dtype=bool).reshape(len(ls), len(rs))
    out.setflags(write=False)
    return out


def format_expr(expr: StateExpr, qualify: Optional[Mapping[str, str]] = None) -> str:
    """Render in the concrete syntax of .ivdl files.

    ``qualify`` maps a side tag to the prefix printed before variables of that side.
    """

    def ref(r: Ref) -> str:
        if r.side is None:
            return r.name
        prefix = qualify.get(r.side, r.side) if qualify else r.side
        return f"{prefix}.{r.name}"

    def operand(o: Operand) -> str:
        return ref(o) if isinstance(o, Ref) else format_value(o.value)

    def go(e: StateExpr, prec: int) -> str:
        if isinstance(e, Const):
            return "true" if e.value else "false"
        if isinstance(e, IsTrue):
            return ref(e.ref)
        if isinstance(e, Cmp):
            text, p = f"{operand(e.left)} {e.op} {operand(e.right)}", 4
        elif isinstance(e, Neg):
            return "!" + go(e.arg, 5)
        elif isinstance(e, Conj):
            text, p = f"{go(e.left, 3)} & {go(e.right, 4)}", 3
        elif isinstance(e, Disj):
            text, p = f"{go(e.left, 2)} | {go(e.right, 3)}", 2
        elif isinstance(e, Iff):
            text, p = f"{go(e.left, 1)} <-> {go(e.right, 2)}", 1
        else:
            raise TypeError(f"not a state expression: {e!r}")
        return f"({text})" if p < prec else text

    return go(expr, 0)


def describe(x: Any) -> str:
    return format_expr(x) if isinstance(x, StateExpr) else str(x)
