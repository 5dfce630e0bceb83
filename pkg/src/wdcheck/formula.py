"""Constraint formula language: abstract syntax, parser and printer.

The language is first-order logic over multi-attributed statements.  A
relational atom ``P26(?x, ?y)@?SQ`` matches a statement together with its
qualifier set; a set atom ``(P585 : ?v) in ?SQ`` tests qualifier membership.
Connectives are ``!``, ``&``, ``|`` and ``->`` (in decreasing precedence,
``->`` right-associative); quantifiers are ``exists ?x . f``, ``forall ?x . f``
and the counting form ``exists[k] ?x . f``.  Variables starting with a
lowercase letter range over values, uppercase ones over qualifier sets.
Bare lowercase names are resolved through the label table (``spouse``), as
are backtick-quoted labels; datatype relations (``less_than``) and functions
(``difference``) are invoked by name.

A relational atom written without ``@...`` places no condition on the
statement's qualifier set.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import datetime
from decimal import Decimal
from typing import Iterable, Optional, Union

from .labels import DEFAULT_LABELS, LabelTable
from .model import (
    DATATYPE_FUNCTIONS,
    DATATYPE_RELATIONS,
    AttrSet,
    EntityId,
    PropRef,
    Pseudo,
    QuantityVal,
    StringVal,
    TimeVal,
    Value,
    entity_value,
)

BUILTIN_PREDICATES = ("no_value", "Commons_namespace")


class FormulaError(Exception):
    pass


class ParseError(FormulaError):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Abstract syntax
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: Value


@dataclass(frozen=True)
class ObjVar:
    name: str  # without the leading '?'


@dataclass(frozen=True)
class FuncApp:
    name: str
    args: tuple


Term = Union[Const, ObjVar, FuncApp]


@dataclass(frozen=True)
class SetVar:
    name: str


@dataclass(frozen=True)
class SetLiteral:
    pairs: tuple  # of (Term, Term)


SetTerm = Union[SetVar, SetLiteral]


@dataclass(frozen=True)
class Rel:
    """Relational atom; predicate is a term or a builtin predicate name."""

    pred: Union[Term, str]
    args: tuple  # (Term, Term)
    attrs: Optional[SetTerm] = None


@dataclass(frozen=True)
class SetMember:
    attr: Term
    value: Term
    set: SetTerm


@dataclass(frozen=True)
class Eq:
    left: Union[Term, SetTerm]
    right: Union[Term, SetTerm]


@dataclass(frozen=True)
class DtRel:
    name: str
    args: tuple


Atom = Union[Rel, SetMember, Eq, DtRel]


@dataclass(frozen=True)
class AtomF:
    atom: Atom
    span: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    body: "Formula"
    span: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class And:
    items: tuple
    span: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Or:
    items: tuple
    span: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Implies:
    body: "Formula"
    head: "Formula"
    span: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"
    span: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"
    span: Optional[tuple] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class CountExists:
    min: int
    var: str
    body: "Formula"
    span: Optional[tuple] = field(default=None, compare=False, repr=False)


Formula = Union[AtomF, Not, And, Or, Implies, Exists, Forall, CountExists]

QUANTIFIERS = (Exists, Forall, CountExists)


def is_set_name(name: str) -> bool:
    return name[:1].isupper() or name.startswith("_A")


# ---------------------------------------------------------------------------
# Variable accounting
# ---------------------------------------------------------------------------


def _term_vars(t: Union[Term, SetTerm, str]) -> set:
    if isinstance(t, ObjVar):
        return {t.name}
    if isinstance(t, SetVar):
        return {t.name}
    if isinstance(t, FuncApp):
        out: set = set()
        for a in t.args:
            out |= _term_vars(a)
        return out
    if isinstance(t, SetLiteral):
        out = set()
        for a, v in t.pairs:
            out |= _term_vars(a) | _term_vars(v)
        return out
    return set()


def _atom_vars(atom: Atom) -> set:
    if isinstance(atom, Rel):
        out = set() if isinstance(atom.pred, str) else _term_vars(atom.pred)
        for a in atom.args:
            out |= _term_vars(a)
        if atom.attrs is not None:
            out |= _term_vars(atom.attrs)
        return out
    if isinstance(atom, SetMember):
        return _term_vars(atom.attr) | _term_vars(atom.value) | _term_vars(atom.set)
    if isinstance(atom, Eq):
        return _term_vars(atom.left) | _term_vars(atom.right)
    if isinstance(atom, DtRel):
        out = set()
        for a in atom.args:
            out |= _term_vars(a)
        return out
    raise TypeError(atom)


def free_variables(f: Formula) -> set:
    """Free object- and set-variable names of a formula."""
    if isinstance(f, AtomF):
        return _atom_vars(f.atom)
    if isinstance(f, Not):
        return free_variables(f.body)
    if isinstance(f, (And, Or)):
        out: set = set()
        for g in f.items:
            out |= free_variables(g)
        return out
    if isinstance(f, Implies):
        return free_variables(f.body) | free_variables(f.head)
    if isinstance(f, QUANTIFIERS):
        return free_variables(f.body) - {f.var}
    raise TypeError(f)


def all_constants(f: Formula) -> set:
    """All constant values occurring in a formula, including inside set literals."""

    out: set = set()

    def term(t) -> None:
        if isinstance(t, Const):
            out.add(t.value)
        elif isinstance(t, FuncApp):
            for a in t.args:
                term(a)
        elif isinstance(t, SetLiteral):
            for a, v in t.pairs:
                term(a)
                term(v)

    def walk(g: Formula) -> None:
        if isinstance(g, AtomF):
            atom = g.atom
            if isinstance(atom, Rel):
                if not isinstance(atom.pred, str):
                    term(atom.pred)
                for a in atom.args:
                    term(a)
                if atom.attrs is not None:
                    term(atom.attrs)
            elif isinstance(atom, SetMember):
                term(atom.attr)
                term(atom.value)
                term(atom.set)
            elif isinstance(atom, Eq):
                term(atom.left)
                term(atom.right)
            elif isinstance(atom, DtRel):
                for a in atom.args:
                    term(a)
        elif isinstance(g, Not):
            walk(g.body)
        elif isinstance(g, (And, Or)):
            for h in g.items:
                walk(h)
        elif isinstance(g, Implies):
            walk(g.body)
            walk(g.head)
        elif isinstance(g, QUANTIFIERS):
            walk(g.body)

    walk(f)
    return out


def ground_set_literals(f: Formula) -> set:
    """Variable-free set literals of a formula, as AttrSet values."""

    out: set = set()

    def check(st) -> None:
        if isinstance(st, SetLiteral) and not _term_vars(st):
            out.add(AttrSet.of((a.value, v.value) for a, v in st.pairs))

    def walk(g: Formula) -> None:
        if isinstance(g, AtomF):
            atom = g.atom
            if isinstance(atom, Rel) and atom.attrs is not None:
                check(atom.attrs)
            elif isinstance(atom, SetMember):
                check(atom.set)
            elif isinstance(atom, Eq):
                check(atom.left)
                check(atom.right)
        elif isinstance(g, Not):
            walk(g.body)
        elif isinstance(g, (And, Or)):
            for h in g.items:
                walk(h)
        elif isinstance(g, Implies):
            walk(g.body)
            walk(g.head)
        elif isinstance(g, QUANTIFIERS):
            walk(g.body)

    walk(f)
    return out


# ---------------------------------------------------------------------------
# Substitution and renaming
# ---------------------------------------------------------------------------


def substitute(f: Formula, objmap: dict, setmap: Optional[dict] = None) -> Formula:
    """Replace free variables by constants (objmap: name -> Value,
    setmap: name -> AttrSet)."""
    setmap = setmap or {}

    def set_literal_of(attrs: AttrSet) -> SetLiteral:
        pairs = sorted(((Const(a), Const(v)) for a, v in attrs),
                       key=lambda p: (_print_term(p[0]), _print_term(p[1])))
        return SetLiteral(tuple(pairs))

    def term(t):
        if isinstance(t, ObjVar) and t.name in objmap:
            return Const(objmap[t.name])
        if isinstance(t, SetVar) and t.name in setmap:
            return set_literal_of(setmap[t.name])
        if isinstance(t, FuncApp):
            return FuncApp(t.name, tuple(term(a) for a in t.args))
        if isinstance(t, SetLiteral):
            return SetLiteral(tuple((term(a), term(v)) for a, v in t.pairs))
        return t

    def walk(g: Formula, bound: frozenset) -> Formula:
        def term_b(t):
            if isinstance(t, (ObjVar, SetVar)) and t.name in bound:
                return t
            return term(t)

        if isinstance(g, AtomF):
            atom = g.atom
            if isinstance(atom, Rel):
                pred = atom.pred if isinstance(atom.pred, str) else term_b(atom.pred)
                new = Rel(pred, tuple(term_b(a) for a in atom.args),
                          None if atom.attrs is None else term_b(atom.attrs))
            elif isinstance(atom, SetMember):
                new = SetMember(term_b(atom.attr), term_b(atom.value), term_b(atom.set))
            elif isinstance(atom, Eq):
                new = Eq(term_b(atom.left), term_b(atom.right))
            else:
                new = DtRel(atom.name, tuple(term_b(a) for a in atom.args))
            return AtomF(new, g.span)
        if isinstance(g, Not):
            return Not(walk(g.body, bound), g.span)
        if isinstance(g, And):
            return And(tuple(walk(h, bound) for h in g.items), g.span)
        if isinstance(g, Or):
            return Or(tuple(walk(h, bound) for h in g.items), g.span)
        if isinstance(g, Implies):
            return Implies(walk(g.body, bound), walk(g.head, bound), g.span)
        if isinstance(g, Exists):
            return Exists(g.var, walk(g.body, bound | {g.var}), g.span)
        if isinstance(g, Forall):
            return Forall(g.var, walk(g.body, bound | {g.var}), g.span)
        if isinstance(g, CountExists):
            return CountExists(g.min, g.var, walk(g.body, bound | {g.var}), g.span)
        raise TypeError(g)

    return walk(f, frozenset())


def rename_variable(f: Formula, old: str, new: str) -> Formula:
    """Rename every occurrence (free or binding) of a variable."""

    def term(t):
        if isinstance(t, ObjVar) and t.name == old:
            return ObjVar(new)
        if isinstance(t, SetVar) and t.name == old:
            return SetVar(new)
        if isinstance(t, FuncApp):
            return FuncApp(t.name, tuple(term(a) for a in t.args))
        if isinstance(t, SetLiteral):
            return SetLiteral(tuple((term(a), term(v)) for a, v in t.pairs))
        return t

    def walk(g: Formula) -> Formula:
        if isinstance(g, AtomF):
            atom = g.atom
            if isinstance(atom, Rel):
                pred = atom.pred if isinstance(atom.pred, str) else term(atom.pred)
                new_atom: Atom = Rel(pred, tuple(term(a) for a in atom.args),
                                     None if atom.attrs is None else term(atom.attrs))
            elif isinstance(atom, SetMember):
                new_atom = SetMember(term(atom.attr), term(atom.value), term(atom.set))
            elif isinstance(atom, Eq):
                new_atom = Eq(term(atom.left), term(atom.right))
            else:
                new_atom = DtRel(atom.name, tuple(term(a) for a in atom.args))
            return AtomF(new_atom, g.span)
        if isinstance(g, Not):
            return Not(walk(g.body), g.span)
        if isinstance(g, And):
            return And(tuple(walk(h) for h in g.items), g.span)
        if isinstance(g, Or):
            return Or(tuple(walk(h) for h in g.items), g.span)
        if isinstance(g, Implies):
            return Implies(walk(g.body), walk(g.head), g.span)
        if isinstance(g, Exists):
            return Exists(new if g.var == old else g.var, walk(g.body), g.span)
        if isinstance(g, Forall):
            return Forall(new if g.var == old else g.var, walk(g.body), g.span)
        if isinstance(g, CountExists):
            return CountExists(g.min, new if g.var == old else g.var, walk(g.body), g.span)
        raise TypeError(g)

    return walk(f)


def ensure_unique_bound(f: Formula) -> Formula:
    """Alpha-rename so no bound variable name repeats along any path."""
    used = set(free_variables(f))

    def fresh(name: str) -> str:
        if name not in used:
            used.add(name)
            return name
        n = 2
        while f"{name}_{n}" in used:
            n += 1
        used.add(f"{name}_{n}")
        return f"{name}_{n}"

    def walk(g: Formula) -> Formula:
        if isinstance(g, AtomF):
            return g
        if isinstance(g, Not):
            return Not(walk(g.body), g.span)
        if isinstance(g, And):
            return And(tuple(walk(h) for h in g.items), g.span)
        if isinstance(g, Or):
            return Or(tuple(walk(h) for h in g.items), g.span)
        if isinstance(g, Implies):
            return Implies(walk(g.body), walk(g.head), g.span)
        if isinstance(g, QUANTIFIERS):
            new_name = fresh(g.var)
            body = g.body if new_name == g.var else rename_variable(g.body, g.var, new_name)
            body = walk(body)
            if isinstance(g, Exists):
                return Exists(new_name, body, g.span)
            if isinstance(g, Forall):
                return Forall(new_name, body, g.span)
            return CountExists(g.min, new_name, body, g.span)
        raise TypeError(g)

    return walk(f)


def alpha_normalize(f: Formula) -> Formula:
    """Canonical bound-variable names, for structural comparison."""
    counter = [0]

    def walk(g: Formula) -> Formula:
        if isinstance(g, AtomF):
            return g
        if isinstance(g, Not):
            return Not(walk(g.body), None)
        if isinstance(g, And):
            return And(tuple(walk(h) for h in g.items), None)
        if isinstance(g, Or):
            return Or(tuple(walk(h) for h in g.items), None)
        if isinstance(g, Implies):
            return Implies(walk(g.body), walk(g.head), None)
        if isinstance(g, QUANTIFIERS):
            counter[0] += 1
            name = ("B%d" if is_set_name(g.var) else "b%d") % counter[0]
            body = walk(rename_variable(g.body, g.var, name))
            if isinstance(g, Exists):
                return Exists(name, body, None)
            if isinstance(g, Forall):
                return Forall(name, body, None)
            return CountExists(g.min, name, body, None)
        raise TypeError(g)

    return walk(f)


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<time>\d{4}-\d{2}-\d{2}(T\d{2}:\d{2}:\d{2})?(/\d+)?)
  | (?P<number>-?\d+(\.\d+)?)
  | (?P<string>"(\\.|[^"\\])*")
  | (?P<entity>[QP][1-9][0-9]*\b)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<label>`[^`]+`)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|!=|[()\[\]{},:@.&|!=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    line, col = 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        raw = m.group(0)
        if kind != "ws":
            tokens.append(Token(kind, raw, line, col))
        nl = raw.count("\n")
        if nl:
            line += nl
            col = len(raw) - raw.rfind("\n")
        else:
            col += len(raw)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class Parser:
    def __init__(self, text: str, labels: Optional[LabelTable] = None) -> None:
        self.tokens = tokenize(text)
        self.pos = 0
        self.labels = labels or DEFAULT_LABELS

    # -- machinery ----------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text:
            self.fail(f"expected {text!r}", tok)
        return self.advance()

    def fail(self, message: str, tok: Optional[Token] = None) -> None:
        tok = tok or self.peek()
        shown = tok.text or "end of input"
        raise ParseError(f"{message}, found {shown!r}", tok.line, tok.col)

    # -- entry points -------------------------------------------------------

    def parse_formula(self) -> Formula:
        f = self.implies()
        if self.peek().kind != "eof":
            self.fail("unexpected trailing input")
        return ensure_unique_bound(f)

    # -- grammar ------------------------------------------------------------

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.peek().text == "->":
            tok = self.advance()
            right = self.implies()
            return Implies(left, right, (tok.line, tok.col))
        return left

    def disjunction(self) -> Formula:
        items = [self.conjunction()]
        while self.peek().text == "|":
            self.advance()
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction(self) -> Formula:
        items = [self.unary()]
        while self.peek().text == "&":
            self.advance()
            items.append(self.unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.text == "!":
            self.advance()
            return Not(self.unary(), (tok.line, tok.col))
        if tok.kind == "ident" and tok.text in ("exists", "forall"):
            return self.quantifier()
        return self.primary()

    def quantifier(self) -> Formula:
        tok = self.advance()
        kind = tok.text
        count = None
        if kind == "exists" and self.peek().text == "[":
            self.advance()
            num = self.peek()
            if num.kind != "number" or "." in num.text or int(num.text) < 1:
                self.fail("expected a positive integer count")
            count = int(self.advance().text)
            self.expect("]")
        names = [self.variable_name()]
        while self.peek().text == ",":
            self.advance()
            names.append(self.variable_name())
        self.expect(".")
        body = self.implies()
        span = (tok.line, tok.col)
        for name in reversed(names):
            if count is not None and name == names[0]:
                if is_set_name(name):
                    self.fail("counting quantifier binds object variables only", tok)
                body = CountExists(count, name, body, span)
            elif kind == "exists":
                body = Exists(name, body, span)
            else:
                body = Forall(name, body, span)
        return body

    def variable_name(self) -> str:
        tok = self.peek()
        if tok.kind != "var":
            self.fail("expected a variable")
        name = self.advance().text[1:]
        if name.startswith("_"):
            self.fail("variable names starting with '_' are reserved", tok)
        return name

    def primary(self) -> Formula:
        tok = self.peek()
        if tok.text == "(":
            saved = self.pos
            self.advance()
            atom = self.try_set_atom(tok)
            if atom is not None:
                return atom
            self.pos = saved
            self.advance()
            inner = self.implies()
            self.expect(")")
            return inner
        return self.atom()

    def try_set_atom(self, open_tok: Token) -> Optional[Formula]:
        """After '(': attempt '(a : b) in S'; None if it is not a set atom."""
        saved = self.pos
        try:
            attr = self.term()
            if self.peek().text != ":":
                self.pos = saved
                return None
            self.advance()
            value = self.term()
            self.expect(")")
            if not (self.peek().kind == "ident" and self.peek().text == "in"):
                self.pos = saved
                return None
            self.advance()
            sterm = self.set_term()
            return AtomF(SetMember(attr, value, sterm), (open_tok.line, open_tok.col))
        except ParseError:
            self.pos = saved
            return None

    def atom(self) -> Formula:
        tok = self.peek()
        # predicate application?
        if self.peek(1).text == "(" and tok.kind in ("ident", "entity", "var", "label"):
            name = tok.text
            if tok.kind == "ident" and name in DATATYPE_RELATIONS:
                return self.dt_relation()
            if tok.kind == "ident" and name in DATATYPE_FUNCTIONS:
                pass  # function application inside a comparison; fall through
            else:
                return self.relational_atom()
        left = self.term_or_set()
        op = self.peek()
        if op.text == "=":
            self.advance()
            right = self.term_or_set()
            return AtomF(Eq(left, right), (op.line, op.col))
        if op.text == "!=":
            self.advance()
            right = self.term_or_set()
            return Not(AtomF(Eq(left, right), (op.line, op.col)), (op.line, op.col))
        self.fail("expected '=' or '!=' after term")

    def dt_relation(self) -> Formula:
        tok = self.advance()
        name = tok.text
        arity = DATATYPE_RELATIONS[name][0]
        self.expect("(")
        args = [self.term()]
        while self.peek().text == ",":
            self.advance()
            args.append(self.term())
        self.expect(")")
        if len(args) != arity:
            self.fail(f"{name} takes {arity} argument(s)", tok)
        return AtomF(DtRel(name, tuple(args)), (tok.line, tok.col))

    def relational_atom(self) -> Formula:
        tok = self.advance()
        pred: Union[Term, str]
        if tok.kind == "var":
            if is_set_name(tok.text[1:]):
                self.fail("set variable cannot be a predicate", tok)
            pred = ObjVar(tok.text[1:])
        elif tok.kind == "entity":
            ent = EntityId.parse(tok.text)
            pred = Const(entity_value(ent))
        elif tok.text in BUILTIN_PREDICATES:
            pred = tok.text
        else:
            label = tok.text[1:-1] if tok.kind == "label" else tok.text
            ent = self.labels.resolve_entity(label)
            if ent is None:
                self.fail(f"unknown predicate label {label!r}", tok)
            pred = Const(entity_value(ent))
        self.expect("(")
        args = [self.term()]
        self.expect(",")
        args.append(self.term())
        self.expect(")")
        attrs: Optional[SetTerm] = None
        if self.peek().text == "@":
            self.advance()
            attrs = self.set_term()
        return AtomF(Rel(pred, tuple(args), attrs), (tok.line, tok.col))

    def term_or_set(self) -> Union[Term, SetTerm]:
        tok = self.peek()
        if tok.kind == "var" and is_set_name(tok.text[1:]):
            self.advance()
            return SetVar(tok.text[1:])
        if tok.text == "{":
            return self.set_literal()
        return self.term()

    def set_term(self) -> SetTerm:
        tok = self.peek()
        if tok.kind == "var":
            name = tok.text[1:]
            if not is_set_name(name):
                self.fail("expected a set variable (uppercase) or '{'", tok)
            self.advance()
            return SetVar(name)
        if tok.text == "{":
            return self.set_literal()
        self.fail("expected a set term")
        raise AssertionError  # unreachable

    def set_literal(self) -> SetLiteral:
        self.expect("{")
        pairs = []
        if self.peek().text != "}":
            while True:
                attr = self.term()
                self.expect(":")
                value = self.term()
                pairs.append((attr, value))
                if self.peek().text != ",":
                    break
                self.advance()
        self.expect("}")
        # canonical pair order, so printing and reparsing is the identity
        pairs.sort(key=lambda p: (_print_term(p[0]), _print_term(p[1])))
        return SetLiteral(tuple(pairs))

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "var":
            name = tok.text[1:]
            if is_set_name(name):
                self.fail("set variable not allowed in term position", tok)
            self.advance()
            return ObjVar(name)
        if tok.kind == "entity":
            self.advance()
            return Const(entity_value(EntityId.parse(tok.text)))
        if tok.kind == "string":
            self.advance()
            return Const(StringVal(_unquote(tok.text)))
        if tok.kind == "time":
            self.advance()
            return Const(_parse_time(tok))
        if tok.kind == "number":
            return self.quantity()
        if tok.kind in ("ident", "label"):
            name = tok.text[1:-1] if tok.kind == "label" else tok.text
            if tok.kind == "ident" and name in DATATYPE_FUNCTIONS and self.peek(1).text == "(":
                return self.func_app()
            resolved = self.labels.resolve(name)
            if resolved is None:
                self.fail(f"unknown label {name!r}", tok)
            self.advance()
            return Const(resolved)
        self.fail("expected a term")
        raise AssertionError  # unreachable

    def func_app(self) -> Term:
        tok = self.advance()
        name = tok.text
        arity = DATATYPE_FUNCTIONS[name][0]
        self.expect("(")
        args = [self.term()]
        while self.peek().text == ",":
            self.advance()
            args.append(self.term())
        self.expect(")")
        if len(args) != arity:
            self.fail(f"{name} takes {arity} argument(s)", tok)
        return FuncApp(name, tuple(args))

    def quantity(self) -> Term:
        tok = self.advance()
        amount = Decimal(tok.text)
        lower = upper = None
        if self.peek().text == "[":
            self.advance()
            lo = self.peek()
            if lo.kind != "number":
                self.fail("expected a lower bound")
            lower = Decimal(self.advance().text)
            self.expect(",")
            hi = self.peek()
            if hi.kind != "number":
                self.fail("expected an upper bound")
            upper = Decimal(self.advance().text)
            self.expect("]")
        unit = None
        if self.peek().kind == "ident" and self.peek().text == "unit" and self.peek(1).text == "=":
            self.advance()
            self.advance()
            ut = self.peek()
            if ut.kind != "entity":
                self.fail("expected a unit entity id")
            unit = EntityId.parse(self.advance().text)
        return Const(QuantityVal(amount, unit, lower, upper))


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


def _parse_time(tok: Token) -> TimeVal:
    text = tok.text
    precision = 11
    if "/" in text:
        text, prec = text.split("/")
        precision = int(prec)
        if precision > 14:
            raise ParseError(f"time precision out of range: {precision}", tok.line, tok.col)
    if "T" in text:
        ts = datetime.strptime(text, "%Y-%m-%dT%H:%M:%S")
    else:
        ts = datetime.strptime(text, "%Y-%m-%d")
    return TimeVal(ts, precision)


def parse(text: str, labels: Optional[LabelTable] = None) -> Formula:
    """Parse a single formula; '!=' parses to a negated equality atom."""
    return Parser(text, labels).parse_formula()


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------


def _print_term(t: Union[Term, SetTerm]) -> str:
    if isinstance(t, ObjVar):
        return "?" + t.name
    if isinstance(t, SetVar):
        return "?" + t.name
    if isinstance(t, Const):
        return str(t.value)
    if isinstance(t, FuncApp):
        return f"{t.name}({', '.join(_print_term(a) for a in t.args)})"
    if isinstance(t, SetLiteral):
        pairs = sorted(((_print_term(a), _print_term(v)) for a, v in t.pairs))
        return "{" + ", ".join(f"{a}: {v}" for a, v in pairs) + "}"
    raise TypeError(t)


def _print_atom(atom: Atom) -> str:
    if isinstance(atom, Rel):
        pred = atom.pred if isinstance(atom.pred, str) else _print_term(atom.pred)
        out = f"{pred}({_print_term(atom.args[0])}, {_print_term(atom.args[1])})"
        if atom.attrs is not None:
            out += "@" + _print_term(atom.attrs)
        return out
    if isinstance(atom, SetMember):
        return f"({_print_term(atom.attr)} : {_print_term(atom.value)}) in {_print_term(atom.set)}"
    if isinstance(atom, Eq):
        return f"{_print_term(atom.left)} = {_print_term(atom.right)}"
    if isinstance(atom, DtRel):
        return f"{atom.name}({', '.join(_print_term(a) for a in atom.args)})"
    raise TypeError(atom)


# precedence levels: implies/quantifier 0, or 1, and 2, not/atom 3
def _prec(f: Formula) -> int:
    if isinstance(f, (Implies,) + QUANTIFIERS):
        return 0
    if isinstance(f, Or):
        return 1
    if isinstance(f, And):
        return 2
    return 3


def _print(f: Formula, min_prec: int) -> str:
    text: str
    prec = _prec(f)
    if isinstance(f, AtomF):
        text = _print_atom(f.atom)
    elif isinstance(f, Not):
        if isinstance(f.body, AtomF) and isinstance(f.body.atom, Eq):
            eq = f.body.atom
            text = f"{_print_term(eq.left)} != {_print_term(eq.right)}"
            prec = 3
        elif isinstance(f.body, AtomF):
            text = "!" + _print(f.body, 3)
        else:
            text = "!(" + _print(f.body, 0) + ")"
    elif isinstance(f, And):
        text = " & ".join(_print(g, 3) for g in f.items)
    elif isinstance(f, Or):
        text = " | ".join(_print(g, 2) for g in f.items)
    elif isinstance(f, Implies):
        text = _print(f.body, 1) + " -> " + _print(f.head, 0)
    elif isinstance(f, Exists):
        text = f"exists ?{f.var} . " + _print(f.body, 0)
    elif isinstance(f, Forall):
        text = f"forall ?{f.var} . " + _print(f.body, 0)
    elif isinstance(f, CountExists):
        text = f"exists[{f.min}] ?{f.var} . " + _print(f.body, 0)
    else:
        raise TypeError(f)
    if prec < min_prec:
        return "(" + text + ")"
    return text


def print_formula(f: Formula) -> str:
    return _print(f, 0)


# ---------------------------------------------------------------------------
# Negative formulation
# ---------------------------------------------------------------------------


def negate(f: Formula) -> Formula:
    """Negation with connectives pushed through; stops at atoms/quantifiers."""
    if isinstance(f, Not):
        return f.body
    if isinstance(f, And):
        return Or(tuple(negate(g) for g in f.items))
    if isinstance(f, Or):
        return And(tuple(negate(g) for g in f.items))
    if isinstance(f, Implies):
        return _flat_and((f.body, negate(f.head)))
    return Not(f)


def _flat_and(items: Iterable[Formula]) -> Formula:
    flat: list = []
    for g in items:
        if isinstance(g, And):
            flat.extend(g.items)
        else:
            flat.append(g)
    return And(tuple(flat)) if len(flat) > 1 else flat[0]


def negate_to_violation_query(f: Formula) -> Formula:
    """Turn a positive constraint (an implication) into its violation query."""
    if not isinstance(f, Implies):
        raise FormulaError("positive constraint formulation must be an implication")
    return _flat_and((f.body, negate(f.head)))


# ---------------------------------------------------------------------------
# Formula/rule text files
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FormulaBlock:
    name: str
    kind: str  # "constraint" or "rule"
    formula: Formula


def parse_blocks(text: str, labels: Optional[LabelTable] = None) -> list:
    """Parse a catalog/rule file: '---'-separated blocks with header lines."""
    blocks = []
    for chunk in re.split(r"^---\s*$", text, flags=re.MULTILINE):
        lines = chunk.splitlines()
        name = None
        kind = "constraint"
        body_lines = []
        in_header = True
        for ln in lines:
            stripped = ln.strip()
            if in_header and (not stripped or stripped.startswith("#")):
                continue
            m = re.match(r"(name|kind|rule)\s*:\s*(\S+)\s*$", stripped) if in_header else None
            if m:
                if m.group(1) == "name":
                    name = m.group(2)
                elif m.group(1) == "kind":
                    kind = m.group(2)
                else:
                    name = m.group(2)
                    kind = "rule"
                continue
            in_header = False
            body_lines.append(ln)
        body = "\n".join(body_lines).strip()
        if not body:
            continue
        if name is None:
            raise FormulaError("formula block missing a 'name:' header")
        blocks.append(FormulaBlock(name, kind, parse(body, labels)))
    return blocks
