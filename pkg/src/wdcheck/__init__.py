"""Qualifier-aware constraint checking for Wikidata-style knowledge bases."""

from .model import (
    AnonConst,
    AttrSet,
    DatatypeError,
    EMPTY_ATTRS,
    EntityId,
    ItemRef,
    KnowledgeBase,
    ModelError,
    NoValueFact,
    P,
    PropRef,
    Pseudo,
    Q,
    QuantityVal,
    Statement,
    StringVal,
    TimeVal,
    Value,
    make_statement,
)
from .formula import (
    Formula,
    FormulaError,
    ParseError,
    free_variables,
    negate,
    negate_to_violation_query,
    parse,
    print_formula,
)
from .evaluator import (
    Binding,
    EvalConfig,
    EvalError,
    UnsafeFormulaError,
    brute_force_evaluate,
    check_safe_range,
    evaluate,
    holds,
)

__version__ = "0.1.0"
