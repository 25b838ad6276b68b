"""The ``.ivdl`` specification language.

A file declares a carrier, typed variables, observables, systems (init,
processes, rely, final), interval relations between systems, named
predicates and check directives.  ``parse_spec`` produces a source-level
AST (declaration nodes with positions; expressions are the library's term
types plus ``PredRef``/``RelRef`` placeholders), ``elaborate`` turns it into
``SystemSpec`` objects and closed terms, and ``format_spec`` prints an AST
back in parseable form.

Grammar::

    spec      := "carrier" INT ("open" | "closed") decl*
    decl      := ("var" | "observable") NAME ":" "{" value ("," value)* "}"
               | "system" NAME "{" "vars" names "init" ipred
                     process ("||"? process)* ["rely" ipred] "final" sexpr "}"
               | "relation" NAME ":" NAME "~" NAME "=" rexpr
               | "pred" NAME "(" [names] ")" "=" ipred
               | "check" kind args
    process   := "process" NAME ("=" ipred | stmt)
    kind      := "refinement" S S | "forward-sim" S S "via" R
               | "simulates" S S "via" R | "obligations" S S "via" R
               | "valid" P | "equiv" P P
    stmt      := seq ("|~|" seq)*
    seq       := sprim (";" seq)?
    sprim     := "[" sexpr "]" | NAME ":=" value | "skip" | "(" stmt ")"
               | "if" sexpr "then" stmt "else" stmt "fi" | "do" stmt "od"
    ipred     := iand ("or" iand)* ; iand := ichop ("and" ichop)*
    ichop     := iun (";" ichop)?
    iun       := ("not" | "ne" | "omega" | "prev") iun
               | ("always" | "sometime" | "definitely" | "possibly" | "prevholds") sarg
               | "stable" (NAME | "{" [names] "}") | "empty" | "finite" | "infinite"
               | "true" | "false" | "(" ipred ")" | NAME
    rexpr     := like ipred over: "always" sarg | "left" "(" ipred ")"
               | "right" "(" ipred ")" | NAME | run "o" run
    sexpr     := sor ("<->" sor)* ; sor := sand ("|" sand)* ; sand := sneg ("&" sneg)*
    sneg      := "!" sneg | "(" sexpr ")" | operand (cmp operand)*
    sarg      := "!" sarg | "(" sexpr ")" | "true" | "false" | ref
"""

from __future__ import annotations

import os
import re
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from . import intv_pred as ip
from . import intv_rel as ir
from . import refine as rf
from . import state as st
from .intv_pred import IntvPred
from .intv_rel import IntvRel
from .state import NEG_INF, POS_INF, StateExpr, Universe, Value
from .time_core import Carrier
from .verdict import Verdict

BUNDLED = os.path.join(os.path.dirname(__file__), "bundled")

KEYWORDS = frozenset(
    """carrier open closed var observable system vars init process rely final relation pred check via
    true false and or not ne omega prev prevholds stable empty finite infinite always sometime definitely
    possibly left right if then else fi do od skip o""".split()
)
DIRECTIVES = ("refinement", "forward-sim", "simulates", "obligations", "valid", "equiv")
_SYMBOLS = ("|~|", "<->", "-inf", "+inf", "||", ":=", "!=", "<=", ">=",
            "{", "}", "(", ")", "[", "]", ",", ":", ";", "=", "<", ">", "&", "|", "!", ".", "~")
_CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
_FLIP = {"=": "!=", "!=": "=", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}
_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<int>-?[0-9]+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z][A-Za-z0-9_]*)*)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in _SYMBOLS) + ")"
)


class DslError(Exception):
    """Lexical, syntax or resolution error with a source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0, expected=(), kind: str = "syntax"):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        self.kind = kind
        self.file: Optional[str] = None

    def __str__(self) -> str:
        where = f"{self.file or '<input>'}:{self.line}:{self.col}"
        return f"{where}: {self.kind} error: {self.message}"


class UnsupportedFeature(DslError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message, line, col, kind="unsupported-feature")


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOPOS = Pos(0, 0)


@dataclass(frozen=True)
class Token:
    kind: str  # name, kw, int, sym, eof
    text: str
    pos: Pos

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        return f"'{self.text}'"


def tokenize(text: str) -> list[Token]:
    out = []
    line, start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise DslError(f"unexpected character {text[i]!r}", line, i - start + 1, kind="lexical")
        kind = m.lastgroup
        pos = Pos(line, i - start + 1)
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind == "name":
            word = m.group()
            out.append(Token("kw" if word in KEYWORDS else "name", word, pos))
        elif kind in ("int", "sym"):
            out.append(Token(kind, m.group(), pos))
        i = m.end()
    out.append(Token("eof", "", Pos(line, i - start + 1)))
    return out


# -- AST ------------------------------------------------------------------------------


@dataclass(frozen=True)
class PredRef(IntvPred):
    """Use of a named predicate; replaced by its body during elaboration."""

    name: str

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class RelRef(IntvRel):
    name: str

    def render(self) -> str:
        return self.name


class Stmt:
    __slots__ = ()


@dataclass(frozen=True)
class Guard(Stmt):
    c: StateExpr


@dataclass(frozen=True)
class Assign(Stmt):
    var: str
    value: Union[st.Val, st.Ref]


@dataclass(frozen=True)
class Seq(Stmt):
    first: Stmt
    second: Stmt


@dataclass(frozen=True)
class If(Stmt):
    c: StateExpr
    then: Stmt
    orelse: Stmt


@dataclass(frozen=True)
class Choice(Stmt):
    left: Stmt
    right: Stmt


@dataclass(frozen=True)
class Loop(Stmt):
    body: Stmt


@dataclass(frozen=True)
class Skip(Stmt):
    pass


@dataclass(frozen=True)
class VarDecl:
    name: str
    domain: tuple[Value, ...]
    observable: bool = False
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class ProcessDecl:
    name: str
    body: Union[Stmt, IntvPred]
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class SystemDecl:
    name: str
    vars: tuple[str, ...]
    init: IntvPred
    processes: tuple[ProcessDecl, ...]
    rely: Optional[IntvPred]
    final: StateExpr
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class RelationDecl:
    name: str
    left: str
    right: str
    body: IntvRel
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class PredDecl:
    name: str
    vars: tuple[str, ...]
    body: IntvPred
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class Directive:
    kind: str
    args: tuple[str, ...]
    via: Optional[str] = None
    pos: Pos = field(default=NOPOS, compare=False)

    @property
    def name(self) -> str:
        text = f"{self.kind} {' '.join(self.args)}"
        return f"{text} via {self.via}" if self.via else text


Decl = Union[VarDecl, SystemDecl, RelationDecl, PredDecl, Directive]


@dataclass(frozen=True)
class SpecFile:
    horizon: int
    open_ended: bool
    decls: tuple[Decl, ...]

    def _of(self, kind) -> list:
        return [d for d in self.decls if isinstance(d, kind)]

    @property
    def variables(self) -> list[VarDecl]:
        return self._of(VarDecl)

    @property
    def systems(self) -> list[SystemDecl]:
        return self._of(SystemDecl)

    @property
    def relations(self) -> list[RelationDecl]:
        return self._of(RelationDecl)

    @property
    def preds(self) -> list[PredDecl]:
        return self._of(PredDecl)

    @property
    def directives(self) -> list[Directive]:
        return self._of(Directive)


# -- parser -----------------------------------------------------------------------------

Resolver = Callable[[Optional[str], str, Pos], st.Ref]


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.expected: set[str] = set()
        self.vars: dict[str, VarDecl] = {}
        self.names: dict[str, Pos] = {}
        self.systems: dict[str, SystemDecl] = {}
        self.relations: dict[str, RelationDecl] = {}
        self.preds: dict[str, PredDecl] = {}

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, *texts: str) -> bool:
        self.expected.update(f"'{t}'" for t in texts)
        t = self.tok
        return t.kind in ("kw", "sym") and t.text in texts

    def at_kind(self, kind: str, label: str) -> bool:
        self.expected.add(label)
        return self.tok.kind == kind

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        self.expected = set()
        return t

    def accept(self, *texts: str) -> Optional[Token]:
        return self.advance() if self.at(*texts) else None

    def expect(self, *texts: str) -> Token:
        if self.at(*texts):
            return self.advance()
        self.fail()

    def name(self, label: str = "name") -> Token:
        if self.at_kind("name", label):
            return self.advance()
        self.fail()

    def fail(self):
        exp = sorted(self.expected)
        what = exp[0] if len(exp) == 1 else "one of " + ", ".join(exp)
        t = self.tok
        raise DslError(f"expected {what}, found {t.describe()}", t.pos.line, t.pos.col, exp)

    def resolve_error(self, message: str, pos: Pos):
        raise DslError(message, pos.line, pos.col, kind="resolution")

    def declare(self, table: dict, name: str, pos: Pos, what: str) -> None:
        if name in table:
            prev = table[name]
            prev = prev if isinstance(prev, Pos) else prev.pos
            self.resolve_error(f"duplicate {what} {name!r} (first declared at {prev}, again at {pos})", pos)

    # file structure

    def spec(self) -> SpecFile:
        self.expect("carrier")
        h = self.integer()
        if h < 1:
            self.resolve_error("horizon must be at least 1", self.toks[self.i - 1].pos)
        open_ended = self.expect("open", "closed").text == "open"
        decls = []
        while not self.at_kind("eof", "end of input"):
            decls.append(self.decl())
        return SpecFile(h, open_ended, tuple(decls))

    def integer(self) -> int:
        if self.at_kind("int", "integer"):
            return int(self.advance().text)
        self.fail()

    def decl(self) -> Decl:
        if self.at("var", "observable"):
            return self.var_decl()
        if self.at("system"):
            return self.system()
        if self.at("relation"):
            return self.relation()
        if self.at("pred"):
            return self.pred()
        if self.at("check"):
            return self.directive()
        self.fail()

    def value(self) -> Value:
        if self.at_kind("int", "integer"):
            return int(self.advance().text)
        t = self.expect("true", "false", "-inf", "+inf")
        return {"true": True, "false": False, "-inf": NEG_INF, "+inf": POS_INF}[t.text]

    def var_decl(self) -> VarDecl:
        kw = self.advance()
        n = self.name("variable name")
        self.declare(self.vars, n.text, n.pos, "variable")
        self.expect(":")
        self.expect("{")
        dom = [self.value()]
        while self.accept(","):
            dom.append(self.value())
        self.expect("}")
        keys = [st.order_key(v) for v in dom]
        if len(set(keys)) != len(keys):
            self.resolve_error(f"variable {n.text!r} has repeated domain values", n.pos)
        d = VarDecl(n.text, tuple(dom), kw.text == "observable", n.pos)
        self.vars[n.text] = d
        return d

    def name_list(self, closing: Optional[str] = None) -> list[Token]:
        out = []
        if closing and self.at(closing):
            return out
        out.append(self.name())
        while self.accept(","):
            out.append(self.name())
        return out

    def rep_vars(self, toks: list[Token]) -> tuple[str, ...]:
        seen: dict[str, Pos] = {}
        for t in toks:
            if t.text not in self.vars:
                self.resolve_error(f"undeclared variable {t.text!r}", t.pos)
            if self.vars[t.text].observable:
                self.resolve_error(f"{t.text!r} is observable, not a representation variable", t.pos)
            self.declare(seen, t.text, t.pos, "variable in list")
            seen[t.text] = t.pos
        return tuple(t.text for t in toks)

    def global_name(self, tok: Token, what: str) -> None:
        self.declare(self.names, tok.text, tok.pos, "declaration of")
        self.names[tok.text] = tok.pos

    def system(self) -> SystemDecl:
        self.advance()
        n = self.name("system name")
        self.global_name(n, "system")
        self.expect("{")
        self.expect("vars")
        names = self.rep_vars(self.name_list())
        local = self.local_resolver(set(names))
        self.expect("init")
        init = self.ipred(local, set(names))
        procs: list[ProcessDecl] = []
        seen: dict[str, Pos] = {}
        self.expect("process")
        while True:
            p = self.name("process name")
            self.declare(seen, p.text, p.pos, "process")
            seen[p.text] = p.pos
            if self.accept("="):
                body: Union[Stmt, IntvPred] = self.ipred(local, set(names))
            else:
                body = self.stmt(local)
            procs.append(ProcessDecl(p.text, body, p.pos))
            if self.accept("||"):
                self.expect("process")
            elif not self.accept("process"):
                break
        rely = self.ipred(local, set(names)) if self.accept("rely") else None
        self.expect("final")
        final = self.sexpr(self.final_resolver(set(names)))
        self.expect("}")
        d = SystemDecl(n.text, names, init, tuple(procs), rely, final, n.pos)
        self.systems[n.text] = d
        return d

    def relation(self) -> RelationDecl:
        self.advance()
        n = self.name("relation name")
        self.global_name(n, "relation")
        self.expect(":")
        left = self.system_ref()
        self.expect("~")
        right = self.system_ref()
        self.expect("=")
        body = self.rexpr(left.name, right.name)
        d = RelationDecl(n.text, left.name, right.name, body, n.pos)
        self.relations[n.text] = d
        return d

    def system_ref(self) -> SystemDecl:
        t = self.name("system name")
        if t.text not in self.systems:
            self.resolve_error(f"undeclared system {t.text!r}", t.pos)
        return self.systems[t.text]

    def pred(self) -> PredDecl:
        self.advance()
        n = self.name("predicate name")
        self.global_name(n, "predicate")
        self.expect("(")
        names = self.rep_vars(self.name_list(")"))
        self.expect(")")
        self.expect("=")
        body = self.ipred(self.local_resolver(set(names)), set(names))
        d = PredDecl(n.text, names, body, n.pos)
        self.preds[n.text] = d
        return d

    def directive(self) -> Directive:
        start = self.advance().pos
        kinds = [f"'{k}'" for k in DIRECTIVES]
        self.expected.update(kinds)
        t = self.tok
        if t.kind != "name" or t.text not in DIRECTIVES:
            self.fail()
        kind = self.advance().text
        if kind == "valid":
            return Directive(kind, (self.pred_arg(),), None, start)
        if kind == "equiv":
            return Directive(kind, (self.pred_arg(), self.pred_arg()), None, start)
        a, c = self.system_ref(), self.system_ref()
        via = None
        if kind != "refinement":
            self.expect("via")
            r = self.name("relation name")
            if r.text not in self.relations:
                self.resolve_error(f"undeclared relation {r.text!r}", r.pos)
            rel = self.relations[r.text]
            if (rel.left, rel.right) != (a.name, c.name):
                self.resolve_error(
                    f"relation {r.text!r} relates {rel.left} to {rel.right}, not {a.name} to {c.name}", r.pos
                )
            via = r.text
        return Directive(kind, (a.name, c.name), via, start)

    def pred_arg(self) -> str:
        t = self.name("predicate name")
        if self.accept("."):
            p = self.name("process name")
            sysd = self.systems.get(t.text)
            if sysd is None:
                self.resolve_error(f"undeclared system {t.text!r}", t.pos)
            if p.text not in {q.name for q in sysd.processes}:
                self.resolve_error(f"system {t.text} has no process {p.text!r}", p.pos)
            return f"{t.text}.{p.text}"
        if t.text not in self.preds:
            self.resolve_error(f"undeclared predicate {t.text!r}", t.pos)
        return t.text

    # name resolution

    def local_resolver(self, allowed: set[str]) -> Resolver:
        def resolve(qual: Optional[str], name: str, pos: Pos) -> st.Ref:
            if qual is not None:
                self.resolve_error(f"qualified name {qual}.{name} is only allowed in relations", pos)
            if name not in allowed:
                self.resolve_error(f"variable {name!r} is not in scope here", pos)
            return st.Ref(name)

        return resolve

    def final_resolver(self, rep: set[str]) -> Resolver:
        def resolve(qual: Optional[str], name: str, pos: Pos) -> st.Ref:
            if qual is not None:
                self.resolve_error("final relations use unqualified names", pos)
            if name in rep:
                return st.Ref(name, "L")
            d = self.vars.get(name)
            if d is not None and d.observable:
                return st.Ref(name, "R")
            self.resolve_error(f"{name!r} is neither a variable of this system nor observable", pos)

        return resolve

    def rel_resolver(self, left: str, right: str) -> Resolver:
        lv, rv = set(self.systems[left].vars), set(self.systems[right].vars)

        def resolve(qual: Optional[str], name: str, pos: Pos) -> st.Ref:
            if qual is None:
                self.resolve_error(f"qualify {name!r} with L, R or a system name", pos)
            if qual == "L" or (qual == left and left != right):
                side, scope = "L", lv
            elif qual == "R" or (qual == right and left != right):
                side, scope = "R", rv
            elif qual in (left, right):
                self.resolve_error(f"both sides are {qual}; use L.{name} or R.{name}", pos)
            else:
                self.resolve_error(f"{qual!r} is not a side of this relation", pos)
            if name not in scope:
                self.resolve_error(f"variable {name!r} is not on side {qual}", pos)
            return st.Ref(name, side)

        return resolve

    def check_bool(self, ref: st.Ref, pos: Pos) -> None:
        d = self.vars.get(ref.name)
        if d is None or not all(isinstance(v, bool) for v in d.domain):
            self.resolve_error(f"{ref.name!r} is not boolean; compare it with a value", pos)

    # state expressions

    def sexpr(self, res: Resolver) -> StateExpr:
        e = self.s_or(res)
        while self.accept("<->"):
            e = st.Iff(e, self.s_or(res))
        return e

    def s_or(self, res: Resolver) -> StateExpr:
        e = self.s_and(res)
        while self.accept("|"):
            e = st.Disj(e, self.s_and(res))
        return e

    def s_and(self, res: Resolver) -> StateExpr:
        e = self.s_neg(res)
        while self.accept("&"):
            e = st.Conj(e, self.s_neg(res))
        return e

    def s_neg(self, res: Resolver) -> StateExpr:
        if self.accept("!"):
            return st.Neg(self.s_neg(res))
        if self.accept("("):
            e = self.sexpr(res)
            self.expect(")")
            return e
        pos = self.tok.pos
        first = self.operand(res)
        ops = []
        while self.at(*_CMP_OPS):
            op = self.advance().text
            ops.append((op, self.operand(res)))
        if not ops:
            return self.bare(first, pos)
        out: Optional[StateExpr] = None
        left = first
        for op, right in ops:
            c = st.Cmp(op, left, right)
            out = c if out is None else st.Conj(out, c)
            left = right
        return out

    def bare(self, o, pos: Pos) -> StateExpr:
        if isinstance(o, st.Ref):
            self.check_bool(o, pos)
            return st.IsTrue(o)
        if isinstance(o.value, bool):
            return st.Const(o.value)
        raise DslError(f"expected a comparison after {st.format_value(o.value)}", pos.line, pos.col, _quoted(_CMP_OPS))

    def operand(self, res: Resolver):
        if self.at_kind("name", "name"):
            return self.ref(res)
        return st.Val(self.value())

    def ref(self, res: Resolver) -> st.Ref:
        t = self.name()
        if self.accept("."):
            n = self.name("variable name")
            return res(t.text, n.text, t.pos)
        return res(None, t.text, t.pos)

    def sarg(self, res: Resolver) -> StateExpr:
        if self.accept("!"):
            return st.Neg(self.sarg(res))
        if self.accept("("):
            e = self.sexpr(res)
            self.expect(")")
            return e
        if self.at("true", "false"):
            return st.Const(self.advance().text == "true")
        pos = self.tok.pos
        r = self.ref(res)
        self.check_bool(r, pos)
        return st.IsTrue(r)

    # interval predicates

    def ipred(self, res: Resolver, scope: set[str]) -> IntvPred:
        g = self.i_and(res, scope)
        while self.accept("or"):
            g = ip.Or(g, self.i_and(res, scope))
        return g

    def i_and(self, res: Resolver, scope: set[str]) -> IntvPred:
        g = self.i_chop(res, scope)
        while self.accept("and"):
            g = ip.And(g, self.i_chop(res, scope))
        return g

    def i_chop(self, res: Resolver, scope: set[str]) -> IntvPred:
        g = self.i_unary(res, scope)
        if self.accept(";"):
            return ip.Chop(g, self.i_chop(res, scope))
        return g

    _UNARY = {"not": ip.Not, "ne": ip.NonEmpty, "omega": ip.Omega, "prev": ip.PrevP}
    _STATE = {
        "always": ip.Always,
        "sometime": ip.Sometime,
        "definitely": ip.Definitely,
        "possibly": ip.Possibly,
        "prevholds": ip.PrevHolds,
    }
    _NULLARY = {"empty": ip.EmptyP, "finite": ip.FiniteP, "infinite": ip.InfiniteP}

    def i_unary(self, res: Resolver, scope: set[str]) -> IntvPred:
        if self.at(*self._UNARY):
            return self._UNARY[self.advance().text](self.i_unary(res, scope))
        if self.at(*self._STATE):
            return self._STATE[self.advance().text](self.sarg(res))
        if self.at(*self._NULLARY):
            return self._NULLARY[self.advance().text]()
        if self.at("true", "false"):
            return ip.Lit(self.advance().text == "true")
        if self.accept("stable"):
            if self.accept("{"):
                toks = self.name_list("}")
                self.expect("}")
                for t in toks:
                    if t.text not in scope:
                        self.resolve_error(f"variable {t.text!r} is not in scope here", t.pos)
                return ip.StableSet(tuple(t.text for t in toks))
            t = self.name("variable name")
            if t.text not in scope:
                self.resolve_error(f"variable {t.text!r} is not in scope here", t.pos)
            return ip.StableVar(t.text)
        if self.accept("("):
            g = self.ipred(res, scope)
            self.expect(")")
            return g
        t = self.name("predicate name")
        d = self.preds.get(t.text)
        if d is None:
            self.resolve_error(f"undeclared predicate {t.text!r}", t.pos)
        missing = [v for v in d.vars if v not in scope]
        if missing:
            self.resolve_error(f"predicate {t.text!r} uses {missing[0]!r}, which is not in scope here", t.pos)
        return PredRef(t.text)

    # relations

    def rexpr(self, left: str, right: str) -> IntvRel:
        R = self.r_and(left, right)
        while self.accept("or"):
            R = ir.OrR(R, self.r_and(left, right))
        return R

    def r_and(self, left: str, right: str) -> IntvRel:
        R = self.r_chop(left, right)
        while self.accept("and"):
            R = ir.AndR(R, self.r_chop(left, right))
        return R

    def r_chop(self, left: str, right: str) -> IntvRel:
        R = self.r_comp(left, right)
        if self.accept(";"):
            return ir.ChopRel(R, self.r_chop(left, right))
        return R

    def r_comp(self, left: str, right: str) -> IntvRel:
        pos = self.tok.pos
        if not self.at("o"):
            save, exp = self.i, set(self.expected)
            try:
                a, ta = self.r_named()
            except DslError:
                a = None
            if a is not None and self.accept("o"):
                b, tb = self.r_named()
                if ta[1] != tb[0]:
                    self.resolve_error(f"cannot compose {ta[0]}~{ta[1]} with {tb[0]}~{tb[1]}", pos)
                R = ir.Compose(a, b, self._universe(ta[1]))
                return self._typed(R, (ta[0], tb[1]), (left, right), pos)
            self.i, self.expected = save, exp
        return self.r_unary(left, right)

    def _typed(self, R: IntvRel, have, want, pos: Pos) -> IntvRel:
        if have != want:
            self.resolve_error(f"relation relates {have[0]} to {have[1]}; expected {want[0]} to {want[1]}", pos)
        return R

    def r_named(self) -> tuple[IntvRel, tuple[str, str]]:
        """A relation name or a parenthesised composition, with its type."""
        if self.accept("("):
            a, ta = self.r_named()
            self.expect("o")
            b, tb = self.r_named()
            self.expect(")")
            if ta[1] != tb[0]:
                raise DslError("ill-typed composition", self.tok.pos.line, self.tok.pos.col, kind="resolution")
            return ir.Compose(a, b, self._universe(ta[1])), (ta[0], tb[1])
        t = self.name("relation name")
        d = self.relations.get(t.text)
        if d is None:
            raise DslError(f"undeclared relation {t.text!r}", t.pos.line, t.pos.col, kind="resolution")
        return RelRef(t.text), (d.left, d.right)

    def _universe(self, system: str) -> Universe:
        return Universe.of([(v, self.vars[v].domain) for v in self.systems[system].vars])

    def r_unary(self, left: str, right: str) -> IntvRel:
        if self.accept("ne"):
            return ir.NonEmptyRel(self.r_unary(left, right))
        if self.accept("not"):
            return ir.NotR(self.r_unary(left, right))
        if self.accept("always"):
            return ir.AlwaysRel(self.sarg(self.rel_resolver(left, right)))
        if self.at("left", "right"):
            side = self.advance().text
            sysd = self.systems[left if side == "left" else right]
            self.expect("(")
            g = self.ipred(self.local_resolver(set(sysd.vars)), set(sysd.vars))
            self.expect(")")
            return ir.Proj1(g) if side == "left" else ir.Proj2(g)
        if self.at("true", "false"):
            return ir.LitR(self.advance().text == "true")
        if self.accept("("):
            R = self.rexpr(left, right)
            self.expect(")")
            return R
        t = self.name("relation name")
        d = self.relations.get(t.text)
        if d is None:
            self.resolve_error(f"undeclared relation {t.text!r}", t.pos)
        return self._typed(RelRef(t.text), (d.left, d.right), (left, right), t.pos)

    # statements

    def stmt(self, res: Resolver) -> Stmt:
        s = self.seq(res)
        while self.accept("|~|"):
            s = Choice(s, self.seq(res))
        return s

    def seq(self, res: Resolver) -> Stmt:
        s = self.s_prim(res)
        if self.accept(";"):
            return Seq(s, self.seq(res))
        return s

    def s_prim(self, res: Resolver) -> Stmt:
        if self.accept("["):
            c = self.sexpr(res)
            self.expect("]")
            return Guard(c)
        if self.accept("skip"):
            return Skip()
        if self.accept("("):
            s = self.stmt(res)
            self.expect(")")
            return s
        if self.accept("if"):
            c = self.sexpr(res)
            self.expect("then")
            s1 = self.stmt(res)
            self.expect("else")
            s2 = self.stmt(res)
            self.expect("fi")
            return If(c, s1, s2)
        if self.accept("do"):
            body = self.stmt(res)
            self.expect("od")
            return Loop(body)
        t = self.name("statement")
        target = res(None, t.text, t.pos)
        self.expect(":=")
        vpos = self.tok.pos
        if self.at_kind("name", "value"):
            raise UnsupportedFeature(
                f"assignment {t.text} := {self.tok.text}: only literal right-hand sides are supported",
                vpos.line,
                vpos.col,
            )
        return Assign(target.name, st.Val(self.value()))


def _quoted(items) -> list[str]:
    return [f"'{x}'" for x in items]


def parse_spec(text: str, filename: Optional[str] = None) -> SpecFile:
    """Parse and resolve a whole file; raises ``DslError`` on the first problem."""
    try:
        return _Parser(text).spec()
    except DslError as e:
        e.file = filename
        raise


def parse_file(path: str) -> SpecFile:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read(), os.path.basename(path))


def bundled(name: str) -> str:
    return os.path.join(BUNDLED, name)


# -- compilation ------------------------------------------------------------------------


def negate_guard(c: StateExpr) -> StateExpr:
    if isinstance(c, st.Cmp):
        return st.Cmp(_FLIP[c.op], c.left, c.right)
    return st.Neg(c)


def _assigned(var: str, value) -> StateExpr:
    if not isinstance(value, st.Val):
        raise UnsupportedFeature(f"assignment to {var}: only literal right-hand sides are supported")
    if value.value is True:
        return st.IsTrue(st.Ref(var))
    if value.value is False:
        return st.Neg(st.IsTrue(st.Ref(var)))
    return st.Cmp("=", st.Ref(var), value)


def _chop(a: IntvPred, b: IntvPred) -> IntvPred:
    if isinstance(a, ip.EmptyP):
        return b
    if isinstance(b, ip.EmptyP):
        return a
    return ip.Chop(a, b)


def compile_program(s: Stmt) -> IntvPred:
    """Interval-predicate meaning of a statement."""
    if isinstance(s, Guard):
        return ip.Possibly(s.c)
    if isinstance(s, Assign):
        return ip.NonEmpty(ip.Always(_assigned(s.var, s.value)))
    if isinstance(s, Seq):
        return _chop(compile_program(s.first), compile_program(s.second))
    if isinstance(s, If):
        return ip.Or(
            _chop(ip.Possibly(s.c), compile_program(s.then)),
            _chop(ip.Possibly(negate_guard(s.c)), compile_program(s.orelse)),
        )
    if isinstance(s, Choice):
        return ip.Or(compile_program(s.left), compile_program(s.right))
    if isinstance(s, Loop):
        return ip.Omega(compile_program(s.body))
    if isinstance(s, Skip):
        return ip.EmptyP()
    raise TypeError(f"not a statement: {s!r}")


# -- elaboration ------------------------------------------------------------------------


@dataclass
class Model:
    """Elaborated file: closed terms and ``SystemSpec`` objects."""

    spec: SpecFile
    carrier: Carrier
    obs: Universe
    systems: dict[str, rf.SystemSpec]
    relations: dict[str, tuple[IntvRel, str, str]]
    preds: dict[str, tuple[IntvPred, Universe]]

    def with_horizon(self, horizon: Optional[int]) -> "Model":
        if horizon is None:
            return self
        c = Carrier(horizon, self.carrier.open_ended)
        return Model(self.spec, c, self.obs, self.systems, self.relations, self.preds)

    def predicate(self, name: str) -> tuple[IntvPred, Universe]:
        """A named predicate or ``Sys.proc``, with the universe it ranges over."""
        if "." in name:
            sname, proc = name.split(".", 1)
            s = self.systems.get(sname)
            if s is None or proc not in s.ops:
                raise KeyError(name)
            return s.ops[proc], s.rep
        return self.preds[name]


def _expand(g: IntvPred, preds: dict[str, tuple[IntvPred, Universe]]) -> IntvPred:
    if isinstance(g, PredRef):
        return preds[g.name][0]
    kids = ip.children(g)
    if not kids:
        return g
    if isinstance(g, (ip.And, ip.Or, ip.Chop)):
        return type(g)(_expand(g.left, preds), _expand(g.right, preds))
    return type(g)(_expand(kids[0], preds))


def _expand_rel(R: IntvRel, rels: dict, preds: dict) -> IntvRel:
    if isinstance(R, RelRef):
        return rels[R.name][0]
    if isinstance(R, (ir.AndR, ir.OrR, ir.ChopRel)):
        return type(R)(_expand_rel(R.left, rels, preds), _expand_rel(R.right, rels, preds))
    if isinstance(R, ir.Compose):
        return ir.Compose(_expand_rel(R.left, rels, preds), _expand_rel(R.right, rels, preds), R.middle)
    if isinstance(R, (ir.NonEmptyRel, ir.NotR)):
        return type(R)(_expand_rel(R.R, rels, preds))
    if isinstance(R, (ir.Proj1, ir.Proj2)):
        return type(R)(_expand(R.g, preds))
    return R


def process_term(body: Union[Stmt, IntvPred], preds: dict) -> IntvPred:
    if isinstance(body, Stmt):
        return compile_program(body)
    return _expand(body, preds)


def elaborate(spec: SpecFile) -> Model:
    domains = {v.name: v.domain for v in spec.variables}
    obs = Universe.of([(v.name, v.domain) for v in spec.variables if v.observable])
    preds: dict[str, tuple[IntvPred, Universe]] = {}
    rels: dict[str, tuple[IntvRel, str, str]] = {}
    systems: dict[str, rf.SystemSpec] = {}
    for d in spec.decls:
        if isinstance(d, PredDecl):
            preds[d.name] = (_expand(d.body, preds), Universe.of([(v, domains[v]) for v in d.vars]))
        elif isinstance(d, SystemDecl):
            rep = Universe.of([(v, domains[v]) for v in d.vars])
            ops = {p.name: process_term(p.body, preds) for p in d.processes}
            rely = _expand(d.rely, preds) if d.rely is not None else None
            try:
                systems[d.name] = rf.SystemSpec(d.name, obs, rep, _expand(d.init, preds), ops, d.final, rely)
            except st.UniverseError as e:
                raise DslError(str(e), d.pos.line, d.pos.col, kind="resolution") from None
        elif isinstance(d, RelationDecl):
            rels[d.name] = (_expand_rel(d.body, rels, preds), d.left, d.right)
    return Model(spec, Carrier(spec.horizon, spec.open_ended), obs, systems, rels, preds)


def load(path: str) -> Model:
    try:
        return elaborate(parse_file(path))
    except DslError as e:
        e.file = e.file or os.path.basename(path)
        raise


# -- printing ---------------------------------------------------------------------------


def format_stmt(s: Stmt) -> str:
    def go(t: Stmt, prec: int) -> str:
        if isinstance(t, Guard):
            return f"[{st.format_expr(t.c)}]"
        if isinstance(t, Assign):
            return f"{t.var} := {st.format_value(t.value.value)}"
        if isinstance(t, Skip):
            return "skip"
        if isinstance(t, If):
            return f"if {st.format_expr(t.c)} then {go(t.then, 0)} else {go(t.orelse, 0)} fi"
        if isinstance(t, Loop):
            return f"do {go(t.body, 0)} od"
        if isinstance(t, Seq):
            text, p = f"{go(t.first, 3)} ; {go(t.second, 2)}", 2
        elif isinstance(t, Choice):
            text, p = f"{go(t.left, 1)} |~| {go(t.right, 2)}", 1
        else:
            raise TypeError(f"not a statement: {t!r}")
        return f"({text})" if p < prec else text

    return go(s, 0)


def _unsided(e: StateExpr) -> StateExpr:
    return st.map_refs(e, lambda r: st.Ref(r.name))


def format_spec(spec: SpecFile) -> str:
    lines = [f"carrier {spec.horizon} {'open' if spec.open_ended else 'closed'}"]
    prev = None
    for d in spec.decls:
        if type(d) is not prev or isinstance(d, SystemDecl):
            lines.append("")
        prev = type(d)
        if isinstance(d, VarDecl):
            kw = "observable" if d.observable else "var"
            lines.append(f"{kw} {d.name} : {{{', '.join(st.format_value(v) for v in d.domain)}}}")
        elif isinstance(d, SystemDecl):
            lines.append(f"system {d.name} {{")
            lines.append(f"  vars {', '.join(d.vars)}")
            lines.append(f"  init {ip.format_term(d.init)}")
            for k, p in enumerate(d.processes):
                lead = "  process" if k == 0 else "  || process"
                if isinstance(p.body, Stmt):
                    lines.append(f"{lead} {p.name} {format_stmt(p.body)}")
                else:
                    lines.append(f"{lead} {p.name} = {ip.format_term(p.body)}")
            if d.rely is not None:
                lines.append(f"  rely {ip.format_term(d.rely)}")
            lines.append(f"  final {st.format_expr(_unsided(d.final))}")
            lines.append("}")
        elif isinstance(d, RelationDecl):
            qualify = None if d.left == d.right else {"L": d.left, "R": d.right}
            lines.append(f"relation {d.name} : {d.left} ~ {d.right} = {ir.format_rel(d.body, qualify)}")
        elif isinstance(d, PredDecl):
            lines.append(f"pred {d.name} ({', '.join(d.vars)}) = {ip.format_term(d.body)}")
        elif isinstance(d, Directive):
            lines.append(f"check {d.name}")
    return "\n".join(lines) + "\n"


# -- directive execution ----------------------------------------------------------------


@dataclass
class Result:
    name: str
    kind: str
    verdict: Verdict
    seconds: float

    def to_json(self, timing: bool = False) -> dict:
        out = {
            "name": self.name,
            "kind": self.kind,
            "verdict": "pass" if self.verdict.passed else "fail",
            "runtime_ms": round(self.seconds * 1000) if timing else None,
        }
        if self.verdict.counterexample is not None:
            out["counterexample"] = self.verdict.counterexample.to_json()
        return out


def obligations(model: Model, d: Directive) -> list[tuple[str, Callable[..., Verdict]]]:
    """The individual checks behind an ``obligations`` directive, in report order."""
    A, C = model.systems[d.args[0]], model.systems[d.args[1]]
    ref = model.relations[d.via][0]
    y, z = A.rep, C.rep
    if len(A.ops) != len(C.ops):
        raise DslError(
            f"obligations pair processes by position, but {A.name} has {len(A.ops)} and {C.name} has {len(C.ops)}",
            d.pos.line,
            d.pos.col,
            kind="resolution",
        )
    ga, hc = A.behaviour(), C.behaviour()
    out: list[tuple[str, Callable[..., Verdict]]] = [
        ("simulation", lambda c, b, j: rf.check_simulates(ref, ga, hc, y, z, c, b, j)),
        ("init", lambda c, b, j: rf.check_init(ref, A, C, c, b)),
        ("final", lambda c, b, j: rf.check_final(ref, A, C, c, b)),
        ("vdash", lambda c, b, j: rf.check_vdash(hc, ref, y, z, c, b, j)),
        ("ref2", lambda c, b, j: rf.check_ref2(ref, hc, ga, y, z, c, b)),
    ]
    for (an, ag), (cn, cg) in zip(A.ops.items(), C.ops.items()):
        h = ip.And(cg, C.rely) if C.rely is not None else cg
        g = ip.And(ag, A.rely) if A.rely is not None else ag
        out.append((f"ref2 {cn}/{an}", lambda c, b, j, h=h, g=g: rf.check_ref2(ref, h, g, y, z, c, b)))
    return out


def _merge(u1: Universe, u2: Universe) -> Universe:
    extra = [(n, d) for n, d in zip(u2.names, u2.domains) if n not in u1.names]
    return Universe.of(list(zip(u1.names, u1.domains)) + extra)


def execute(model: Model, d: Directive, budget: int = st.DEFAULT_BUDGET, jobs: int = 1) -> list[Result]:
    c = model.carrier
    if d.kind == "obligations":
        results = []
        for label, run in obligations(model, d):
            t0 = time.perf_counter()
            v = run(c, budget, jobs)
            results.append(Result(f"{d.name}: {label}", "obligation", v, time.perf_counter() - t0))
        return results
    t0 = time.perf_counter()
    if d.kind in ("valid", "equiv"):
        g, u = model.predicate(d.args[0])
        if d.kind == "valid":
            v = ip.check_valid_implication(ip.TRUE_P, g, u, c, budget)
        else:
            g2, u2 = model.predicate(d.args[1])
            v = ip.check_equivalent(g, g2, _merge(u, u2), c, budget=budget)
    else:
        A, C = model.systems[d.args[0]], model.systems[d.args[1]]
        if d.kind == "refinement":
            v = rf.check_data_refinement(A, C, c, budget)
        else:
            ref = model.relations[d.via][0]
            if d.kind == "forward-sim":
                v = rf.check_forward_simulation(ref, A, C, c, budget, jobs)
            else:
                v = rf.check_simulates(ref, A.behaviour(), C.behaviour(), A.rep, C.rep, c, budget, jobs)
    return [Result(d.name, d.kind, v, time.perf_counter() - t0)]
