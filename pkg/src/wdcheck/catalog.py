"""Constraint declaration extraction, violation checking and reporting.

A property constraint is declared as a statement
``property_constraint(P_x, <type item>) @ {params...}``.  For each
declaration we instantiate the matching template's positive formulae with the
property and the declaration's parameter set, negate them into violation
queries and evaluate those over the knowledge base.  Global templates (the
non-property constraints plus asymmetry) have no declarations and are
evaluated as written.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional

from . import labels as L
from .evaluator import EvalConfig, check_safe_range, evaluate
from .formula import (
    Formula,
    free_variables,
    negate_to_violation_query,
    parse,
    print_formula,
    substitute,
)
from .labels import DEFAULT_LABELS, LabelTable
from .model import (
    AttrSet,
    EntityId,
    ItemRef,
    KnowledgeBase,
    PropRef,
    QuantityVal,
    Statement,
    StringVal,
    UnsupportedPattern,
    Value,
    as_entity,
    compile_pattern,
)
from .templates import ConstraintTemplate, Variant, builtin_templates


class CatalogError(Exception):
    pass


@dataclass
class Declaration:
    """One property_constraint statement, decoded."""

    statement_id: str
    property: EntityId  # the constrained property
    type_item: EntityId
    params: AttrSet  # the declaration's qualifier set, pseudo pairs included
    severity: str = "regular"  # "mandatory", "suggestion" or "regular"
    exceptions: tuple = ()  # entity ids exempted via exception_to_constraint


@dataclass
class Violation:
    template: str
    variant: str
    declaration_property: Optional[str]  # "P26" or None for global templates
    params: list  # [[attr, value], ...] as strings
    binding: dict  # variable -> printable value
    severity: str
    suppressed: bool
    message: str
    diagnostics: list = field(default_factory=list)

    def sort_key(self) -> tuple:
        return (self.template, self.declaration_property or "", self.variant,
                json.dumps(self.binding, sort_keys=True))


@dataclass
class CheckResult:
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)  # skipped declarations etc.

    @property
    def unsuppressed(self) -> list:
        return [v for v in self.violations if not v.suppressed]

    def summary(self) -> dict:
        by_severity: dict = {}
        for v in self.unsuppressed:
            by_severity[v.severity] = by_severity.get(v.severity, 0) + 1
        return {
            "total": len(self.unsuppressed),
            "suppressed": len(self.violations) - len(self.unsuppressed),
            "by_severity": by_severity,
        }


def extract_declarations(kb: KnowledgeBase) -> list:
    """Decode all property_constraint statements in the KB."""
    out = []
    for st in kb.facts_for(L.PROPERTY_CONSTRAINT):
        if st.subject.kind != "property" or not isinstance(st.value, ItemRef):
            continue
        params = st.qualifiers
        severity = "regular"
        for v in params.values_for(PropRef(L.PARAM_STATUS)):
            if v == ItemRef(L.MANDATORY_STATUS):
                severity = "mandatory"
            elif v == ItemRef(L.SUGGESTION_STATUS):
                severity = "suggestion"
        exceptions = tuple(
            ent for v in params.values_for(PropRef(L.PARAM_EXCEPTION))
            if (ent := as_entity(v)) is not None)
        out.append(Declaration(st.id, st.subject, st.value.entity, params,
                               severity, exceptions))
    return out


def _has_param(params: AttrSet, attr: EntityId) -> bool:
    return bool(params.values_for(PropRef(attr)))


def _count_value(params: AttrSet, attr: EntityId) -> Optional[int]:
    for v in params.values_for(PropRef(attr)):
        if isinstance(v, QuantityVal) and v.amount == int(v.amount) and v.amount >= 1:
            return int(v.amount)
    return None


_PARSE_CACHE: dict = {}


def _parse_variant(text: str, labels: LabelTable) -> Formula:
    key = (text, id(labels))
    if key not in _PARSE_CACHE:
        _PARSE_CACHE[key] = parse(text, labels)
    return _PARSE_CACHE[key]


def applicable_variants(tpl: ConstraintTemplate, decl: Declaration) -> list:
    out = []
    for var in tpl.variants:
        if not var.enabled:
            continue
        if any(not _has_param(decl.params, a) for a in var.requires):
            continue
        if any(_has_param(decl.params, a) for a in var.forbids):
            continue
        out.append(var)
    return out


def derive_violation_queries(
    tpl: ConstraintTemplate,
    decl: Optional[Declaration] = None,
    labels: Optional[LabelTable] = None,
) -> list:
    """(variant, query) pairs: negated formulae, parametrized if declared."""
    labels = labels or DEFAULT_LABELS
    out = []
    if tpl.type_item is None:
        for var in tpl.variants:
            if var.enabled:
                out.append((var, negate_to_violation_query(
                    _parse_variant(var.text, labels))))
        return out
    if decl is None:
        raise CatalogError(f"template {tpl.name} needs a declaration")
    for var in applicable_variants(tpl, decl):
        text = var.text
        if var.count_param is not None:
            k = _count_value(decl.params, var.count_param)
            if k is None:
                continue
            text = text.replace("<K>", str(k))
        f = _parse_variant(text, labels)
        f = substitute(f, {"p": PropRef(decl.property)}, {"CQ": decl.params})
        out.append((var, negate_to_violation_query(f)))
    return out


def _printable(v) -> str:
    return str(v)


def _params_list(params: AttrSet) -> list:
    return [[_printable(a), _printable(v)] for a, v in params.without_pseudo().sorted_pairs()]


def _message(tpl: ConstraintTemplate, var: Variant, decl: Optional[Declaration],
             binding: dict) -> str:
    parts = [f"{tpl.name}" + (f" ({var.name})" if var.name != "main" else "")]
    if decl is not None:
        parts.append(f"on {decl.property}")
    shown = ", ".join(f"?{k}={_printable(v)}" for k, v in sorted(binding.items())
                      if not isinstance(v, AttrSet))
    if shown:
        parts.append("with " + shown)
    return " ".join(parts)


def _canonical_binding(binding: dict, pairs: tuple) -> frozenset:
    """Order-normalize symmetric variable pairs for deduplication."""
    items = dict(binding)
    swapped = dict(binding)
    for a, b in pairs:
        if a in swapped and b in swapped:
            swapped[a], swapped[b] = swapped[b], swapped[a]
    def key(d):
        return tuple(sorted((k, _printable(v)) for k, v in d.items()))
    return frozenset(min(key(items), key(swapped)))


def check(
    kb: KnowledgeBase,
    templates: Optional[list] = None,
    labels: Optional[LabelTable] = None,
    cfg: Optional[EvalConfig] = None,
    max_violations: Optional[int] = None,
) -> CheckResult:
    """Evaluate all (selected) constraint templates over the KB."""
    labels = labels or DEFAULT_LABELS
    cfg = cfg or EvalConfig()
    templates = builtin_templates() if templates is None else templates
    result = CheckResult()
    declarations = extract_declarations(kb)

    for tpl in templates:
        if tpl.type_item is None:
            _check_queries(kb, tpl, None, derive_violation_queries(tpl, None, labels),
                           cfg, result, max_violations)
            continue
        for decl in declarations:
            if decl.type_item != tpl.type_item:
                continue
            note = _prevalidate(tpl, decl)
            if note:
                result.notes.append(note)
                continue
            queries = derive_violation_queries(tpl, decl, labels)
            _check_queries(kb, tpl, decl, queries, cfg, result, max_violations)
        if max_violations is not None and len(result.violations) >= max_violations:
            break

    result.violations.sort(key=Violation.sort_key)
    return result


def _prevalidate(tpl: ConstraintTemplate, decl: Declaration) -> Optional[str]:
    if tpl.name == "format":
        for v in decl.params.values_for(PropRef(L.PARAM_REGEX)):
            if isinstance(v, StringVal):
                try:
                    compile_pattern(v.text)
                except UnsupportedPattern as exc:
                    return (f"skipped format declaration {decl.statement_id} "
                            f"on {decl.property}: {exc}")
    return None


def _check_queries(kb, tpl, decl, queries, cfg, result, max_violations) -> None:
    seen: set = set()
    for var, query in queries:
        problem = check_safe_range(query)
        if problem:
            result.notes.append(
                f"skipped {tpl.name}/{var.name}: query not range-restricted ({problem})")
            continue
        diagnostics: list = []
        for binding in evaluate(kb, query, cfg, diagnostics):
            env = binding.as_dict()
            if var.symmetric_pairs:
                key = (var.name, _canonical_binding(env, var.symmetric_pairs))
                if key in seen:
                    continue
                seen.add(key)
            suppressed = False
            if decl is not None and decl.exceptions:
                subj = env.get(tpl.subject_var)
                ent = as_entity(subj) if subj is not None else None
                suppressed = ent is not None and ent in decl.exceptions
            result.violations.append(Violation(
                template=tpl.name,
                variant=var.name,
                declaration_property=str(decl.property) if decl else None,
                params=_params_list(decl.params) if decl else [],
                binding={k: _printable(v) for k, v in sorted(env.items())},
                severity=decl.severity if decl else "regular",
                suppressed=suppressed,
                message=_message(tpl, var, decl, env),
                diagnostics=[str(d) for d in diagnostics],
            ))
            if max_violations is not None and len(result.violations) >= max_violations:
                return


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def render_json(result: CheckResult) -> str:
    doc = {
        "summary": result.summary(),
        "violations": [
            {
                "template": v.template,
                "declaration_property": v.declaration_property,
                "params": v.params,
                "binding": v.binding,
                "severity": v.severity,
                "suppressed": v.suppressed,
                "message": v.message,
                "diagnostics": v.diagnostics,
            }
            for v in result.violations
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def render_text(result: CheckResult) -> str:
    lines = []
    summary = result.summary()
    for v in result.violations:
        flag = "suppressed" if v.suppressed else v.severity
        lines.append(f"[{flag}] {v.message}")
    for note in result.notes:
        lines.append(f"note: {note}")
    lines.append(
        f"{summary['total']} violation(s), {summary['suppressed']} suppressed")
    for sev, count in sorted(summary["by_severity"].items()):
        lines.append(f"  {sev}: {count}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Catalog self-test
# ---------------------------------------------------------------------------


def validate_catalog(labels: Optional[LabelTable] = None) -> list:
    """Parse every template variant and safe-range check its violation query.

    Returns a list of problems; an empty list means the catalog is sound.
    """
    labels = labels or DEFAULT_LABELS
    problems = []
    dummy_params = AttrSet.of([
        (PropRef(L.PARAM_PROPERTY), PropRef(L.INSTANCE_OF)),
        (PropRef(L.PARAM_ITEM), ItemRef(L.MANDATORY_STATUS)),
        (PropRef(L.PARAM_CLASS), ItemRef(L.MANDATORY_STATUS)),
    ])
    for tpl in builtin_templates():
        for var in tpl.variants:
            text = var.text.replace("<K>", "2")
            try:
                f = parse(text, labels)
            except Exception as exc:
                problems.append(f"{tpl.name}/{var.name}: parse failed: {exc}")
                continue
            if tpl.type_item is not None:
                f = substitute(f, {"p": PropRef(L.SPOUSE)}, {"CQ": dummy_params})
            try:
                query = negate_to_violation_query(f)
            except Exception as exc:
                problems.append(f"{tpl.name}/{var.name}: negation failed: {exc}")
                continue
            issue = check_safe_range(query)
            if issue:
                problems.append(f"{tpl.name}/{var.name}: {issue}")
    return problems
