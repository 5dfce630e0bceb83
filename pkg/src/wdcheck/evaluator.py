"""Formula evaluation over a knowledge base.

``evaluate`` yields the bindings of a formula's free variables that satisfy
it, with object quantifiers ranging over the active domain (KB constants plus
the formula's own constants) and set quantifiers over the qualifier sets
realized in the KB plus the formula's ground set literals.

The main evaluator orders conjuncts greedily so that index lookups drive the
search; ``brute_force_evaluate`` enumerates every total binding and filters
with ``holds``, serving as the independent oracle the main path is tested
against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .formula import (
    And,
    AtomF,
    Const,
    CountExists,
    DtRel,
    Eq,
    Exists,
    Forall,
    Formula,
    FuncApp,
    Implies,
    Not,
    ObjVar,
    Or,
    QUANTIFIERS,
    Rel,
    SetLiteral,
    SetMember,
    SetVar,
    all_constants,
    free_variables,
    ground_set_literals,
    is_set_name,
)
from .model import (
    AttrSet,
    DatatypeError,
    EMPTY_ATTRS,
    KnowledgeBase,
    PropRef,
    Pseudo,
    Statement,
    StringVal,
    Value,
    datatype_function,
    datatype_relation,
    entity_value,
)


class EvalError(Exception):
    pass


class UnsafeFormulaError(EvalError):
    pass


class DomainTooLarge(EvalError):
    """Brute-force evaluation refused: the active domain exceeds the bound."""


@dataclass(frozen=True)
class Binding:
    """An assignment of free variables to values / qualifier sets."""

    data: tuple  # sorted tuple of (name, Value-or-AttrSet)

    @staticmethod
    def of(env: dict) -> "Binding":
        return Binding(tuple(sorted(env.items(), key=lambda kv: kv[0])))

    def as_dict(self) -> dict:
        return dict(self.data)

    def __getitem__(self, name: str):
        return dict(self.data)[name]

    def __contains__(self, name: str) -> bool:
        return any(k == name for k, _ in self.data)


@dataclass
class EvalConfig:
    max_bindings: Optional[int] = None
    include_deprecated: bool = False
    oracle_domain_limit: int = 12

    def __post_init__(self) -> None:
        if self.max_bindings is not None and self.max_bindings < 1:
            raise ValueError("max_bindings must be at least 1 when bounded")


@dataclass
class Diagnostic:
    message: str
    env: dict = field(default_factory=dict)

    def __str__(self) -> str:
        return self.message


@dataclass
class _Ctx:
    kb: KnowledgeBase
    cfg: EvalConfig
    domain: list  # object-variable domain, deterministic order
    set_domain: list  # set-variable domain
    diagnostics: list
    literal_cache: dict = field(default_factory=dict)  # id(lit) -> AttrSet for variable-free literals


def _make_ctx(kb: KnowledgeBase, f: Formula, cfg: EvalConfig, diagnostics: Optional[list]) -> _Ctx:
    dom = set(kb.active_domain()) | all_constants(f)
    sets = set(kb.attr_sets()) | ground_set_literals(f)
    key = lambda x: (type(x).__name__, str(x))
    return _Ctx(kb, cfg, sorted(dom, key=key), sorted(sets, key=lambda s: str(s)),
                diagnostics if diagnostics is not None else [])


# ---------------------------------------------------------------------------
# Term resolution and unification
# ---------------------------------------------------------------------------


def _resolve_term(ctx: _Ctx, t, env: dict):
    """Ground value of a term under env, or None if a variable is unbound."""
    if isinstance(t, Const):
        return t.value
    if isinstance(t, (ObjVar, SetVar)):
        return env.get(t.name)
    if isinstance(t, FuncApp):
        args = []
        for a in t.args:
            v = _resolve_term(ctx, a, env)
            if v is None:
                return None
            args.append(v)
        return datatype_function(t.name, *args)
    if isinstance(t, SetLiteral):
        return _resolve_literal(ctx, t, env)
    raise TypeError(t)


def _ground_literal(ctx: _Ctx, lit: SetLiteral) -> Optional[AttrSet]:
    """Resolved AttrSet for a variable-free literal, memoized per evaluation."""
    key = id(lit)
    if key not in ctx.literal_cache:
        result = None
        if all(isinstance(a, Const) and isinstance(v, Const) for a, v in lit.pairs):
            result = AttrSet.of((a.value, v.value) for a, v in lit.pairs)
        ctx.literal_cache[key] = result
    return ctx.literal_cache[key]


def _resolve_literal(ctx: _Ctx, lit: SetLiteral, env: dict) -> Optional[AttrSet]:
    ground = _ground_literal(ctx, lit)
    if ground is not None:
        return ground
    pairs = []
    for a, v in lit.pairs:
        av = _resolve_term(ctx, a, env)
        vv = _resolve_term(ctx, v, env)
        if av is None or vv is None:
            return None
        pairs.append((av, vv))
    return AttrSet.of(pairs)


def _unify_term(ctx: _Ctx, t, value, env: dict) -> Optional[dict]:
    if isinstance(t, (ObjVar, SetVar)):
        bound = env.get(t.name)
        if bound is None:
            out = dict(env)
            out[t.name] = value
            return out
        return env if bound == value else None
    ground = _resolve_term(ctx, t, env)
    return env if ground == value else None


def _literal_has_pseudo(lit: SetLiteral, env: dict, ctx: _Ctx) -> bool:
    for a, _v in lit.pairs:
        if isinstance(a, Const) and isinstance(a.value, Pseudo):
            return True
    return False


def _match_literal(ctx: _Ctx, lit: SetLiteral, target: AttrSet, env: dict) -> Iterator[dict]:
    """Unify a set literal against a concrete qualifier set (bijectively).

    Pseudo-attribute pairs (mirrored rank/references) are ignored on the
    target side unless the literal mentions pseudo-attributes itself.
    """
    if not _literal_has_pseudo(lit, env, ctx):
        target = target.without_pseudo()
    ground = _ground_literal(ctx, lit)
    if ground is not None and len(ground) == len(lit.pairs):
        if ground == target:
            yield env
        return
    pairs = list(lit.pairs)
    targets = target.sorted_pairs()
    if len(pairs) != len(targets):
        return

    def backtrack(i: int, used: set, env: dict) -> Iterator[dict]:
        if i == len(pairs):
            yield env
            return
        a_term, v_term = pairs[i]
        for j, (a_val, v_val) in enumerate(targets):
            if j in used:
                continue
            env2 = _unify_term(ctx, a_term, a_val, env)
            if env2 is None:
                continue
            env3 = _unify_term(ctx, v_term, v_val, env2)
            if env3 is None:
                continue
            yield from backtrack(i + 1, used | {j}, env3)

    yield from backtrack(0, set(), env)


def _unify_attrs(ctx: _Ctx, attrs, qualifiers: AttrSet, env: dict) -> Iterator[dict]:
    if attrs is None:
        yield env
    elif isinstance(attrs, SetVar):
        bound = env.get(attrs.name)
        if bound is None:
            out = dict(env)
            out[attrs.name] = qualifiers
            yield out
        elif bound == qualifiers:
            yield env
    else:
        yield from _match_literal(ctx, attrs, qualifiers, env)


# ---------------------------------------------------------------------------
# Atom matching
# ---------------------------------------------------------------------------


def match_rel(ctx: _Ctx, rel: Rel, env: dict, statements=None) -> Iterator[dict]:
    """Extend env over statements (or builtin fact tables) matching the atom.

    ``statements`` restricts matching to the given statements (used by the
    rule engine's delta-driven evaluation).
    """
    if rel.pred == "no_value":
        for fact in ctx.kb.no_value_facts:
            env1 = _unify_term(ctx, rel.args[0], PropRef(fact.property), env)
            if env1 is None:
                continue
            env2 = _unify_term(ctx, rel.args[1], entity_value(fact.subject), env1)
            if env2 is None:
                continue
            yield from _unify_attrs(ctx, rel.attrs, fact.qualifiers, env2)
        return
    if rel.pred == "Commons_namespace":
        for page, ns in sorted(ctx.kb.commons_ns.items()):
            env1 = _unify_term(ctx, rel.args[0], StringVal(page), env)
            if env1 is None:
                continue
            env2 = _unify_term(ctx, rel.args[1], StringVal(ns), env1)
            if env2 is None:
                continue
            yield from _unify_attrs(ctx, rel.attrs, EMPTY_ATTRS, env2)
        return

    pred_val = _resolve_term(ctx, rel.pred, env)
    if pred_val is not None and not isinstance(pred_val, PropRef):
        return
    candidates: list
    if statements is not None:
        candidates = statements
    elif pred_val is not None:
        prop = pred_val.entity
        subj = _try_resolve(ctx, rel.args[0], env)
        val = _try_resolve(ctx, rel.args[1], env)
        if subj is not None and (ent := _as_entity_val(subj)) is not None:
            candidates = ctx.kb.by_prop_subject.get((prop, ent), [])
        elif val is not None:
            candidates = ctx.kb.by_prop_value.get((prop, val), [])
        else:
            candidates = ctx.kb.by_property.get(prop, [])
    else:
        candidates = list(ctx.kb.statements.values())

    for st in candidates:
        if st.rank == "deprecated" and not ctx.cfg.include_deprecated:
            continue
        env1 = _unify_term(ctx, rel.pred, PropRef(st.property), env)
        if env1 is None:
            continue
        env2 = _unify_term(ctx, rel.args[0], entity_value(st.subject), env1)
        if env2 is None:
            continue
        env3 = _unify_term(ctx, rel.args[1], st.value, env2)
        if env3 is None:
            continue
        yield from _unify_attrs(ctx, rel.attrs, st.qualifiers, env3)


def _as_entity_val(v: Value):
    from .model import as_entity

    return as_entity(v)


def _try_resolve(ctx: _Ctx, t, env: dict):
    try:
        return _resolve_term(ctx, t, env)
    except DatatypeError:
        return None


def _match_member(ctx: _Ctx, atom: SetMember, env: dict) -> Iterator[dict]:
    target = _resolve_term(ctx, atom.set, env) if not isinstance(atom.set, SetLiteral) \
        else _resolve_literal(ctx, atom.set, env)
    if target is None:
        raise EvalError("set atom evaluated before its set term was bound")
    for a_val, v_val in target.sorted_pairs():
        env1 = _unify_term(ctx, atom.attr, a_val, env)
        if env1 is None:
            continue
        env2 = _unify_term(ctx, atom.value, v_val, env1)
        if env2 is not None:
            yield env2


def _match_eq(ctx: _Ctx, atom: Eq, env: dict) -> Iterator[dict]:
    lv = _try_resolve(ctx, atom.left, env)
    rv = _try_resolve(ctx, atom.right, env)
    if lv is not None and rv is not None:
        if lv == rv:
            yield env
    elif lv is not None and isinstance(atom.right, (ObjVar, SetVar)):
        out = dict(env)
        out[atom.right.name] = lv
        yield out
    elif rv is not None and isinstance(atom.left, (ObjVar, SetVar)):
        out = dict(env)
        out[atom.left.name] = rv
        yield out
    else:
        raise EvalError("equality with both sides unbound")


def _eval_dtrel(ctx: _Ctx, atom: DtRel, env: dict) -> bool:
    args = []
    for t in atom.args:
        try:
            v = _resolve_term(ctx, t, env)
        except DatatypeError as exc:
            ctx.diagnostics.append(Diagnostic(str(exc), dict(env)))
            return False
        if v is None:
            raise EvalError(f"datatype relation {atom.name} evaluated with unbound argument")
        args.append(v)
    try:
        return datatype_relation(atom.name, *args)
    except DatatypeError as exc:
        ctx.diagnostics.append(Diagnostic(str(exc), dict(env)))
        return False


# ---------------------------------------------------------------------------
# Satisfaction search
# ---------------------------------------------------------------------------


def _vars_of(f: Formula) -> set:
    return free_variables(f)


def _is_ready(ctx: _Ctx, f: Formula, env: dict) -> bool:
    """Can this conjunct run under env without domain fallback?"""
    unbound = _vars_of(f) - env.keys()
    if not unbound:
        return True
    if isinstance(f, AtomF):
        atom = f.atom
        if isinstance(atom, Rel):
            return True
        if isinstance(atom, SetMember):
            return not (_term_unbound_vars(atom.set, env))
        if isinstance(atom, Eq):
            left_unbound = _term_unbound_vars(atom.left, env)
            right_unbound = _term_unbound_vars(atom.right, env)
            return not left_unbound or not right_unbound
        return False
    if isinstance(f, Exists):
        inner = _strip_exists(f)
        return _generates(inner[1], env, set(inner[0]))
    if isinstance(f, And):
        return True  # satisfy() recurses and applies its own ordering
    if isinstance(f, Or):
        return all(_is_ready(ctx, g, env) for g in f.items)
    return False


def _term_unbound_vars(t, env: dict) -> set:
    from .formula import _term_vars

    return _term_vars(t) - env.keys()


def _strip_exists(f: Formula):
    names = []
    while isinstance(f, Exists):
        names.append(f.var)
        f = f.body
    return names, f


def _generates(f: Formula, env: dict, targets: set) -> bool:
    """Rough check that evaluating f can bind the target variables."""
    if isinstance(f, AtomF):
        return isinstance(f.atom, (Rel, SetMember))
    if isinstance(f, And):
        return any(_generates(g, env, targets) for g in f.items)
    if isinstance(f, Or):
        return all(_generates(g, env, targets) for g in f.items)
    if isinstance(f, Exists):
        return _generates(f.body, env, targets)
    return False


def _rel_cost(ctx: _Ctx, rel: Rel, env: dict) -> int:
    if isinstance(rel.pred, str):
        return len(ctx.kb.no_value_facts) if rel.pred == "no_value" else len(ctx.kb.commons_ns)
    pred_val = _try_resolve(ctx, rel.pred, env)
    if pred_val is None:
        return len(ctx.kb.statements)
    if not isinstance(pred_val, PropRef):
        return 0
    prop = pred_val.entity
    subj = _try_resolve(ctx, rel.args[0], env)
    val = _try_resolve(ctx, rel.args[1], env)
    if subj is not None and (ent := _as_entity_val(subj)) is not None:
        return len(ctx.kb.by_prop_subject.get((prop, ent), []))
    if val is not None:
        return len(ctx.kb.by_prop_value.get((prop, val), []))
    return len(ctx.kb.by_property.get(prop, []))


def _cost(ctx: _Ctx, f: Formula, env: dict) -> int:
    unbound = _vars_of(f) - env.keys()
    if not unbound:
        return 0  # pure test, run first
    if isinstance(f, AtomF):
        atom = f.atom
        if isinstance(atom, Eq):
            return 1
        if isinstance(atom, SetMember):
            return 2
        if isinstance(atom, Rel):
            return 3 + _rel_cost(ctx, atom, env)
    return 10_000


def _satisfy_and(ctx: _Ctx, items: tuple, env: dict) -> Iterator[dict]:
    if not items:
        yield env
        return
    ready = [(i, f) for i, f in enumerate(items) if _is_ready(ctx, f, env)]
    if ready:
        i, chosen = min(ready, key=lambda pair: _cost(ctx, pair[1], env))
        rest = items[:i] + items[i + 1:]
        for env2 in satisfy(ctx, chosen, env):
            yield from _satisfy_and(ctx, rest, env2)
        return
    # fallback: enumerate one needed variable over the active domain
    needed = sorted(_vars_of(items[0]) - env.keys())
    var = needed[0]
    pool = ctx.set_domain if is_set_name(var) else ctx.domain
    for value in pool:
        env2 = dict(env)
        env2[var] = value
        yield from _satisfy_and(ctx, items, env2)


def satisfy(ctx: _Ctx, f: Formula, env: dict) -> Iterator[dict]:
    """All extensions of env over f's free variables under which f holds."""
    if isinstance(f, AtomF):
        atom = f.atom
        if isinstance(atom, Rel):
            yield from match_rel(ctx, atom, env)
        elif isinstance(atom, SetMember):
            yield from _match_member(ctx, atom, env)
        elif isinstance(atom, Eq):
            yield from _match_eq(ctx, atom, env)
        else:
            if _eval_dtrel(ctx, atom, env):
                yield env
    elif isinstance(f, Not):
        unbound = _vars_of(f.body) - env.keys()
        if unbound:
            # negation over unrestricted variables: enumerate them (the
            # safe-range gate rejects such queries at the API boundary)
            yield from _enumerate_then(ctx, f, env, unbound)
            return
        if isinstance(f.body, Forall):
            # !forall v.g  ==  exists v.!g, which can search by index
            from .formula import negate

            if _any_satisfy(ctx, Exists(f.body.var, negate(f.body.body)), env):
                yield env
            return
        if not _any_satisfy(ctx, f.body, env):
            yield env
    elif isinstance(f, And):
        yield from _satisfy_and(ctx, f.items, env)
    elif isinstance(f, Or):
        for g in f.items:
            for env2 in satisfy(ctx, g, env):
                yield env2
    elif isinstance(f, Implies):
        # closed propositional test: !body | head
        unbound = _vars_of(f) - env.keys()
        if unbound:
            yield from _enumerate_then(ctx, f, env, unbound)
            return
        if not _any_satisfy(ctx, f.body, env) or _any_satisfy(ctx, f.head, env):
            yield env
    elif isinstance(f, Exists):
        seen = set()
        if _generates(f.body, env, {f.var}) or not (_vars_of(f.body) - env.keys()):
            for env2 in satisfy(ctx, f.body, env):
                out = {k: v for k, v in env2.items() if k != f.var}
                key = frozenset(out.items())
                if key not in seen:
                    seen.add(key)
                    yield out
        else:
            pool = ctx.set_domain if is_set_name(f.var) else ctx.domain
            for value in pool:
                env2 = dict(env)
                env2[f.var] = value
                for env3 in satisfy(ctx, f.body, env2):
                    out = {k: v for k, v in env3.items() if k != f.var}
                    key = frozenset(out.items())
                    if key not in seen:
                        seen.add(key)
                        yield out
    elif isinstance(f, Forall):
        unbound = _vars_of(f) - env.keys()
        if unbound:
            yield from _enumerate_then(ctx, f, env, unbound)
            return
        # forall v.g  ==  !exists v.!g; the existential search can use indexes
        from .formula import negate

        if not _any_satisfy(ctx, Exists(f.var, negate(f.body)), env):
            yield env
    elif isinstance(f, CountExists):
        unbound = _vars_of(f) - env.keys()
        if unbound:
            yield from _enumerate_then(ctx, f, env, unbound)
            return
        witnesses = set()
        if _generates(f.body, env, {f.var}):
            for env2 in satisfy(ctx, f.body, env):
                if f.var in env2:
                    witnesses.add(env2[f.var])
                if len(witnesses) >= f.min:
                    break
        else:
            for value in ctx.domain:
                env2 = dict(env)
                env2[f.var] = value
                if _any_satisfy(ctx, f.body, env2):
                    witnesses.add(value)
                    if len(witnesses) >= f.min:
                        break
        if len(witnesses) >= f.min:
            yield env
    else:
        raise TypeError(f)


def _enumerate_then(ctx: _Ctx, f: Formula, env: dict, unbound: set) -> Iterator[dict]:
    var = sorted(unbound)[0]
    pool = ctx.set_domain if is_set_name(var) else ctx.domain
    for value in pool:
        env2 = dict(env)
        env2[var] = value
        yield from satisfy(ctx, f, env2)


def _any_satisfy(ctx: _Ctx, f: Formula, env: dict) -> bool:
    for _ in satisfy(ctx, f, env):
        return True
    return False


# ---------------------------------------------------------------------------
# Safe-range analysis
# ---------------------------------------------------------------------------


def check_safe_range(f: Formula) -> Optional[str]:
    """None if every variable is range-restricted; else a diagnostic."""
    problems: list = []
    bound = _rr(f, frozenset(), problems)
    missing = free_variables(f) - bound
    if missing:
        problems.append(f"free variable(s) not range-restricted: {', '.join(sorted(missing))}")
    if problems:
        return "; ".join(problems)
    return None


def _rr(f: Formula, pre: frozenset, problems: list) -> frozenset:
    from .formula import _term_vars

    if isinstance(f, AtomF):
        atom = f.atom
        if isinstance(atom, Rel):
            return pre | _vars_of(f)
        if isinstance(atom, SetMember):
            set_vars = _term_vars(atom.set)
            if set_vars <= pre or isinstance(atom.set, SetLiteral):
                return pre | _vars_of(f)
            return pre
        if isinstance(atom, Eq):
            if _term_vars(atom.left) <= pre:
                return pre | _term_vars(atom.right)
            if _term_vars(atom.right) <= pre:
                return pre | _term_vars(atom.left)
            return pre
        return pre  # DtRel restricts nothing
    if isinstance(f, And):
        bound = pre
        changed = True
        while changed:
            changed = False
            for g in f.items:
                new = _rr(g, bound, [])
                if not new <= bound:
                    bound = bound | new
                    changed = True
        for g in f.items:
            _rr(g, bound, problems)
            _require_supported(g, bound, problems)
        return bound
    if isinstance(f, Or):
        branch_bounds = [_rr(g, pre, problems) for g in f.items]
        for g in f.items:
            _require_supported(g, pre, problems)
        out = branch_bounds[0]
        for b in branch_bounds[1:]:
            out = out & (b | pre)
        return frozenset(out)
    if isinstance(f, Not):
        inner = _rr(f.body, pre, problems)
        loose = free_variables(f.body) - inner
        if loose:
            problems.append(
                "variable(s) under negation not range-restricted: " + ", ".join(sorted(loose)))
        return pre
    if isinstance(f, Implies):
        body_bound = _rr(f.body, pre, problems)
        loose = free_variables(f.body) - body_bound
        if loose:
            problems.append(
                "implication body variable(s) not range-restricted: " + ", ".join(sorted(loose)))
        head_bound = _rr(f.head, body_bound, problems)
        loose = free_variables(f.head) - head_bound
        if loose:
            problems.append(
                "implication head variable(s) not range-restricted: " + ", ".join(sorted(loose)))
        return pre
    if isinstance(f, Exists):
        inner = _rr(f.body, pre, problems)
        return frozenset((pre | inner) - {f.var})
    if isinstance(f, Forall):
        inner = _rr(f.body, pre, problems)
        return pre
    if isinstance(f, CountExists):
        inner = _rr(f.body, pre, problems)
        if f.var not in inner:
            problems.append(f"counting variable not range-restricted: {f.var}")
        return frozenset((pre | inner) - {f.var})
    raise TypeError(f)


def _require_supported(g: Formula, bound: frozenset, problems: list) -> None:
    if isinstance(g, AtomF) and isinstance(g.atom, (DtRel, Eq)):
        loose = _vars_of(g) - bound
        if loose:
            kind = "datatype relation" if isinstance(g.atom, DtRel) else "equality"
            problems.append(f"{kind} variable(s) not range-restricted: " + ", ".join(sorted(loose)))


# ---------------------------------------------------------------------------
# Public evaluation entry points
# ---------------------------------------------------------------------------


def evaluate(
    kb: KnowledgeBase,
    f: Formula,
    cfg: Optional[EvalConfig] = None,
    diagnostics: Optional[list] = None,
) -> Iterator[Binding]:
    """Bindings of f's free variables satisfied by the KB (deduplicated)."""
    cfg = cfg or EvalConfig()
    problem = check_safe_range(f)
    if problem:
        raise UnsafeFormulaError(problem)
    ctx = _make_ctx(kb, f, cfg, diagnostics)
    fv = free_variables(f)
    seen = set()
    count = 0
    for env in satisfy(ctx, f, {}):
        proj = {k: v for k, v in env.items() if k in fv}
        b = Binding.of(proj)
        if b in seen:
            continue
        seen.add(b)
        yield b
        count += 1
        if cfg.max_bindings is not None and count >= cfg.max_bindings:
            return


def holds(
    kb: KnowledgeBase,
    f: Formula,
    binding: Union[Binding, dict],
    cfg: Optional[EvalConfig] = None,
    diagnostics: Optional[list] = None,
) -> bool:
    """Truth of f under a total binding of its free variables."""
    cfg = cfg or EvalConfig()
    env = binding.as_dict() if isinstance(binding, Binding) else dict(binding)
    missing = free_variables(f) - env.keys()
    if missing:
        raise EvalError(f"binding missing variable(s): {', '.join(sorted(missing))}")
    ctx = _make_ctx(kb, f, cfg, diagnostics)
    return _holds(ctx, f, env)


def _holds(ctx: _Ctx, f: Formula, env: dict) -> bool:
    if isinstance(f, AtomF):
        atom = f.atom
        if isinstance(atom, Rel):
            for _ in match_rel(ctx, atom, env):
                return True
            return False
        if isinstance(atom, SetMember):
            for _ in _match_member(ctx, atom, env):
                return True
            return False
        if isinstance(atom, Eq):
            lv = _try_resolve(ctx, atom.left, env)
            rv = _try_resolve(ctx, atom.right, env)
            return lv is not None and lv == rv
        return _eval_dtrel(ctx, atom, env)
    if isinstance(f, Not):
        return not _holds(ctx, f.body, env)
    if isinstance(f, And):
        return all(_holds(ctx, g, env) for g in f.items)
    if isinstance(f, Or):
        return any(_holds(ctx, g, env) for g in f.items)
    if isinstance(f, Implies):
        return not _holds(ctx, f.body, env) or _holds(ctx, f.head, env)
    if isinstance(f, (Exists, Forall, CountExists)):
        pool = ctx.set_domain if is_set_name(f.var) else ctx.domain
        if isinstance(f, Forall):
            return all(_holds(ctx, f.body, {**env, f.var: v}) for v in pool)
        if isinstance(f, Exists):
            return any(_holds(ctx, f.body, {**env, f.var: v}) for v in pool)
        count = 0
        for v in pool:
            if _holds(ctx, f.body, {**env, f.var: v}):
                count += 1
                if count >= f.min:
                    return True
        return False
    raise TypeError(f)


def brute_force_evaluate(
    kb: KnowledgeBase,
    f: Formula,
    cfg: Optional[EvalConfig] = None,
    diagnostics: Optional[list] = None,
) -> Iterator[Binding]:
    """Enumerate every total binding and filter by holds (testing oracle)."""
    cfg = cfg or EvalConfig()
    ctx = _make_ctx(kb, f, cfg, diagnostics)
    if len(ctx.domain) > cfg.oracle_domain_limit:
        raise DomainTooLarge(
            f"active domain has {len(ctx.domain)} constants, oracle limit is {cfg.oracle_domain_limit}")
    fv = sorted(free_variables(f))
    pools = [ctx.set_domain if is_set_name(v) else ctx.domain for v in fv]
    count = 0
    for combo in itertools.product(*pools):
        env = dict(zip(fv, combo))
        if _holds(ctx, f, env):
            yield Binding.of(env)
            count += 1
            if cfg.max_bindings is not None and count >= cfg.max_bindings:
                return
