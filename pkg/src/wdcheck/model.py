"""In-memory knowledge base with multi-attributed statements.

A statement is a relational fact ``p(subject, value)`` carrying a finite set
of attribute-value pairs (its qualifiers).  Rank and reference tokens are
mirrored into the qualifier set as reserved pseudo-attributes so that logic
formulae can test them with ordinary set atoms.
"""

from __future__ import annotations

import calendar
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from decimal import Decimal
from typing import Iterable, Iterator, Optional, Union


class ModelError(Exception):
    """Malformed entity ids, values or statements."""


class DatatypeError(ModelError):
    """A datatype relation or function was applied to values of the wrong kind."""


# ---------------------------------------------------------------------------
# Entities and values
# ---------------------------------------------------------------------------

ITEM = "item"
PROPERTY = "property"

_ENTITY_RE = re.compile(r"([QP])([1-9][0-9]*)$")


@dataclass(frozen=True, order=True)
class EntityId:
    kind: str
    num: int

    def __post_init__(self) -> None:
        if self.kind not in (ITEM, PROPERTY):
            raise ModelError(f"bad entity kind: {self.kind!r}")
        if self.num <= 0:
            raise ModelError(f"entity numeric id must be positive: {self.num}")

    def __str__(self) -> str:
        return ("Q" if self.kind == ITEM else "P") + str(self.num)

    @staticmethod
    def parse(text: str) -> "EntityId":
        m = _ENTITY_RE.match(text)
        if not m:
            raise ModelError(f"not an entity id: {text!r}")
        return EntityId(ITEM if m.group(1) == "Q" else PROPERTY, int(m.group(2)))


def Q(num: int) -> EntityId:
    return EntityId(ITEM, num)


def P(num: int) -> EntityId:
    return EntityId(PROPERTY, num)


@dataclass(frozen=True)
class ItemRef:
    entity: EntityId

    def __str__(self) -> str:
        return str(self.entity)


@dataclass(frozen=True)
class PropRef:
    entity: EntityId

    def __str__(self) -> str:
        return str(self.entity)


@dataclass(frozen=True)
class StringVal:
    text: str

    def __str__(self) -> str:
        return '"' + self.text.replace("\\", "\\\\").replace('"', '\\"') + '"'


@dataclass(frozen=True)
class QuantityVal:
    amount: Decimal
    unit: Union[EntityId, str, None] = None  # str only for the reserved "@days" unit
    lower: Optional[Decimal] = None
    upper: Optional[Decimal] = None

    def __post_init__(self) -> None:
        if self.lower is not None and self.lower > self.amount:
            raise ModelError(f"quantity lower bound {self.lower} above amount {self.amount}")
        if self.upper is not None and self.upper < self.amount:
            raise ModelError(f"quantity upper bound {self.upper} below amount {self.amount}")

    def __str__(self) -> str:
        s = format(self.amount, "f")
        if self.lower is not None or self.upper is not None:
            s += f"[{format(self.lower, 'f')},{format(self.upper, 'f')}]"
        if self.unit is not None:
            s += f" unit={self.unit}"
        return s


#: Wikibase time precision codes (subset relevant here).
PRECISION_SECOND = 14
PRECISION_DAY = 11
PRECISION_MONTH = 10
PRECISION_YEAR = 9


@dataclass(frozen=True)
class TimeVal:
    timestamp: datetime
    precision: int = PRECISION_DAY

    def __post_init__(self) -> None:
        if not (0 <= self.precision <= 14):
            raise ModelError(f"time precision out of range: {self.precision}")

    def __str__(self) -> str:
        return self.timestamp.strftime("%Y-%m-%dT%H:%M:%S") + f"/{self.precision}"


@dataclass(frozen=True)
class AnonConst:
    """Fresh constant standing for an unknown ("somevalue") value."""

    uid: int

    def __str__(self) -> str:
        return f"_:{self.uid}"


@dataclass(frozen=True)
class Pseudo:
    """Reserved attribute/constant names outside the entity id space."""

    name: str

    def __str__(self) -> str:
        return self.name


RANK_ATTR = Pseudo("rank")
REFERENCE_ATTR = Pseudo("reference")
NOVALUE = Pseudo("novalue")

Value = Union[ItemRef, PropRef, StringVal, QuantityVal, TimeVal, AnonConst, Pseudo]

RANKS = ("preferred", "normal", "deprecated")


def entity_value(entity: EntityId) -> Value:
    """The value a subject or predicate position denotes."""
    return ItemRef(entity) if entity.kind == ITEM else PropRef(entity)


def as_entity(value: Value) -> Optional[EntityId]:
    if isinstance(value, (ItemRef, PropRef)):
        return value.entity
    return None


# ---------------------------------------------------------------------------
# Attribute sets
# ---------------------------------------------------------------------------


def _value_sort_key(v: Value) -> tuple:
    return (type(v).__name__, str(v))


@dataclass(frozen=True)
class AttrSet:
    """A finite set of (attribute, value) pairs.

    Attributes may occur with several distinct values.  Equality is
    extensional over the pairs, including pseudo-attributes.
    """

    pairs: frozenset = frozenset()

    @staticmethod
    def of(items: Iterable[tuple[Value, Value]]) -> "AttrSet":
        return AttrSet(frozenset(items))

    def __iter__(self) -> Iterator[tuple[Value, Value]]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair: tuple[Value, Value]) -> bool:
        return pair in self.pairs

    def values_for(self, attr: Value) -> list:
        return [v for a, v in self.pairs if a == attr]

    def without_pseudo(self) -> "AttrSet":
        return AttrSet(frozenset((a, v) for a, v in self.pairs if not isinstance(a, Pseudo)))

    def sorted_pairs(self) -> list:
        cached = getattr(self, "_sorted", None)
        if cached is None:
            cached = sorted(self.pairs,
                            key=lambda p: (_value_sort_key(p[0]), _value_sort_key(p[1])))
            object.__setattr__(self, "_sorted", cached)
        return cached

    def __str__(self) -> str:
        inner = ", ".join(f"{a}: {v}" for a, v in self.sorted_pairs())
        return "{" + inner + "}"


EMPTY_ATTRS = AttrSet()


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Statement:
    id: str
    subject: EntityId
    property: EntityId
    value: Value
    qualifiers: AttrSet  # includes mirrored rank/reference pseudo-pairs
    rank: str = "normal"
    references: tuple = ()

    def content_key(self) -> tuple:
        """Identity of the fact irrespective of statement id, rank and references."""
        return (self.subject, self.property, self.value, self.qualifiers.without_pseudo())


def make_statement(
    id: str,
    subject: EntityId,
    property: EntityId,
    value: Value,
    qualifiers: Iterable[tuple[Value, Value]] = (),
    rank: str = "normal",
    references: Iterable[str] = (),
) -> Statement:
    """Build a statement, mirroring rank and references into the qualifier set."""
    if rank not in RANKS:
        raise ModelError(f"bad rank: {rank!r}")
    refs = tuple(references)
    pairs = set(qualifiers)
    for a, _v in pairs:
        if isinstance(a, Pseudo):
            raise ModelError(f"pseudo-attribute {a} may not be supplied directly")
    pairs.add((RANK_ATTR, StringVal(rank)))
    for tok in refs:
        pairs.add((REFERENCE_ATTR, StringVal(tok)))
    return Statement(id, subject, property, value, AttrSet.of(pairs), rank, refs)


@dataclass(frozen=True)
class NoValueFact:
    property: EntityId
    subject: EntityId
    qualifiers: AttrSet = EMPTY_ATTRS


# ---------------------------------------------------------------------------
# Knowledge base
# ---------------------------------------------------------------------------


class KnowledgeBase:
    """Statements plus no-value and Commons-namespace facts, with lookup indexes.

    Treated as immutable once loading (and, where requested, rule closure)
    has finished; all read paths are side-effect free.
    """

    def __init__(self) -> None:
        self.statements: dict[str, Statement] = {}
        self.by_property: dict[EntityId, list[Statement]] = {}
        self.by_prop_subject: dict[tuple[EntityId, EntityId], list[Statement]] = {}
        self.by_prop_value: dict[tuple[EntityId, Value], list[Statement]] = {}
        self.no_value_facts: list[NoValueFact] = []
        self.commons_ns: dict[str, str] = {}
        self.labels: dict[EntityId, str] = {}
        self._content_keys: set = set()
        self._anon_counter: int = 0
        self._domain_cache: Optional[frozenset] = None

    # -- construction -------------------------------------------------------

    def fresh_anon(self) -> AnonConst:
        self._anon_counter += 1
        return AnonConst(self._anon_counter)

    def fresh_statement_id(self, prefix: str = "s") -> str:
        n = len(self.statements) + 1
        while f"{prefix}{n}" in self.statements:
            n += 1
        return f"{prefix}{n}"

    def add_statement(self, st: Statement) -> None:
        if st.id in self.statements:
            raise ModelError(f"duplicate statement id: {st.id}")
        self.statements[st.id] = st
        self.by_property.setdefault(st.property, []).append(st)
        self.by_prop_subject.setdefault((st.property, st.subject), []).append(st)
        self.by_prop_value.setdefault((st.property, st.value), []).append(st)
        self._content_keys.add(st.content_key())
        self._domain_cache = None

    def has_fact(self, subject: EntityId, property: EntityId, value: Value, qualifiers: AttrSet) -> bool:
        return (subject, property, value, qualifiers.without_pseudo()) in self._content_keys

    def add_no_value(self, fact: NoValueFact) -> None:
        if fact not in self.no_value_facts:
            self.no_value_facts.append(fact)
            self._domain_cache = None

    def add_commons_page(self, page: str, namespace: str) -> None:
        self.commons_ns[page] = namespace
        self._domain_cache = None

    # -- lookup -------------------------------------------------------------

    def facts_for(self, property: EntityId, include_deprecated: bool = False) -> list[Statement]:
        out = self.by_property.get(property, [])
        if include_deprecated:
            return list(out)
        return [st for st in out if st.rank != "deprecated"]

    def all_statements(self, include_deprecated: bool = False) -> Iterator[Statement]:
        for st in self.statements.values():
            if include_deprecated or st.rank != "deprecated":
                yield st

    def properties_in_use(self) -> list[EntityId]:
        return sorted(self.by_property)

    def attr_sets(self) -> set:
        """Attribute sets realized anywhere in the KB (set-variable domain)."""
        out = {st.qualifiers for st in self.statements.values()}
        out.update(f.qualifiers for f in self.no_value_facts)
        out.add(EMPTY_ATTRS)
        return out

    def active_domain(self) -> frozenset:
        """All constants occurring in statements, facts and qualifier sets."""
        if self._domain_cache is not None:
            return self._domain_cache
        dom: set = set()
        for st in self.statements.values():
            dom.add(entity_value(st.subject))
            dom.add(PropRef(st.property))
            dom.add(st.value)
            for a, v in st.qualifiers:
                dom.add(a)
                dom.add(v)
        for f in self.no_value_facts:
            dom.add(PropRef(f.property))
            dom.add(entity_value(f.subject))
            for a, v in f.qualifiers:
                dom.add(a)
                dom.add(v)
        for page, ns in self.commons_ns.items():
            dom.add(StringVal(page))
            dom.add(StringVal(ns))
        self._domain_cache = frozenset(dom)
        return self._domain_cache

    def copy(self) -> "KnowledgeBase":
        kb = KnowledgeBase()
        for st in self.statements.values():
            kb.add_statement(st)
        kb.no_value_facts = list(self.no_value_facts)
        kb.commons_ns = dict(self.commons_ns)
        kb.labels = dict(self.labels)
        kb._anon_counter = self._anon_counter
        kb._domain_cache = None
        return kb


# ---------------------------------------------------------------------------
# Datatype relations and functions
# ---------------------------------------------------------------------------

DAYS_UNIT = "@days"


def time_interval(t: TimeVal) -> tuple[datetime, datetime]:
    """The closed interval covered by a time value at its stated precision.

    Precisions coarser than a day are expanded to the full calendar unit;
    very coarse precisions are clipped to the representable datetime range.
    """
    ts, p = t.timestamp, t.precision
    if p >= 14:
        return ts, ts
    if p == 13:
        start = ts.replace(second=0)
        return start, start + timedelta(minutes=1) - timedelta(seconds=1)
    if p == 12:
        start = ts.replace(minute=0, second=0)
        return start, start + timedelta(hours=1) - timedelta(seconds=1)
    if p == 11:
        start = ts.replace(hour=0, minute=0, second=0)
        return start, start + timedelta(days=1) - timedelta(seconds=1)
    if p == 10:
        start = ts.replace(day=1, hour=0, minute=0, second=0)
        last = calendar.monthrange(ts.year, ts.month)[1]
        return start, start.replace(day=last, hour=23, minute=59, second=59)
    if p == 9:
        return (ts.replace(month=1, day=1, hour=0, minute=0, second=0),
                ts.replace(month=12, day=31, hour=23, minute=59, second=59))
    # decade / century / millennium / coarser
    span = 10 ** (9 - p) if p >= 6 else 10 ** 9
    start_year = max(1, (ts.year // span) * span)
    end_year = min(9999, start_year + span - 1)
    return (datetime(start_year, 1, 1), datetime(end_year, 12, 31, 23, 59, 59))


def _require_time(name: str, v: Value) -> TimeVal:
    if not isinstance(v, TimeVal):
        raise DatatypeError(f"{name} expects a time value, got {v}")
    return v


def _require_quantity(name: str, v: Value) -> QuantityVal:
    if not isinstance(v, QuantityVal):
        raise DatatypeError(f"{name} expects a quantity value, got {v}")
    return v


def _rel_less_than(a: Value, b: Value) -> bool:
    # compares main values; intervals are only consulted by overlaps
    if isinstance(a, TimeVal) and isinstance(b, TimeVal):
        return a.timestamp < b.timestamp
    if isinstance(a, QuantityVal) and isinstance(b, QuantityVal):
        _check_units("less_than", a, b)
        return a.amount < b.amount
    raise DatatypeError(f"less_than expects two times or two quantities, got {a}, {b}")


def _rel_overlaps(a: Value, b: Value) -> bool:
    ia = time_interval(_require_time("overlaps", a))
    ib = time_interval(_require_time("overlaps", b))
    return ia[0] <= ib[1] and ib[0] <= ia[1]


class UnsupportedPattern(DatatypeError):
    """Regular expression uses constructs outside the supported dialect."""


_UNSUPPORTED_RE = re.compile(r"\\[pP]\{|\(\?R\)|\(\?&")


def compile_pattern(pattern: str) -> "re.Pattern[str]":
    if _UNSUPPORTED_RE.search(pattern):
        raise UnsupportedPattern(f"unsupported regex construct in {pattern!r}")
    try:
        return re.compile(pattern)
    except re.error as exc:
        raise UnsupportedPattern(f"cannot compile {pattern!r}: {exc}") from exc


def _rel_matches_regex(v: Value, pattern: Value) -> bool:
    if not isinstance(v, StringVal):
        raise DatatypeError(f"matches_regex expects a string value, got {v}")
    if not isinstance(pattern, StringVal):
        raise DatatypeError(f"matches_regex expects a string pattern, got {pattern}")
    return compile_pattern(pattern.text).fullmatch(v.text) is not None


def _rel_integer(v: Value) -> bool:
    q = _require_quantity("integer", v)
    return q.amount == q.amount.to_integral_value()


def _rel_precise(v: Value) -> bool:
    q = _require_quantity("precise", v)
    return q.lower is None and q.upper is None


def _check_units(name: str, a: QuantityVal, b: QuantityVal) -> None:
    if a.unit != b.unit:
        raise DatatypeError(f"{name}: incomparable values {a} and {b} (unit mismatch)")


def _compare(name: str, a: Value, b: Value) -> int:
    if isinstance(a, QuantityVal) and isinstance(b, QuantityVal):
        _check_units(name, a, b)
        return (a.amount > b.amount) - (a.amount < b.amount)
    if isinstance(a, TimeVal) and isinstance(b, TimeVal):
        return (a.timestamp > b.timestamp) - (a.timestamp < b.timestamp)
    raise DatatypeError(f"{name} expects two quantities or two times, got {a}, {b}")


def _rel_geq(a: Value, b: Value) -> bool:
    return _compare("geq", a, b) >= 0


def _rel_leq(a: Value, b: Value) -> bool:
    return _compare("leq", a, b) <= 0


def unit_holds(unit: Union[EntityId, None], v: Value) -> bool:
    """True iff v is a quantity carrying exactly the given unit (None = unitless)."""
    if not isinstance(v, QuantityVal):
        return False
    return v.unit == unit


def _rel_has_unit(v: Value, unit: Value) -> bool:
    # the reserved constant `no_unit` denotes unitless quantities
    if isinstance(unit, Pseudo) and unit.name == "no_unit":
        return unit_holds(None, v)
    ent = as_entity(unit)
    if ent is None:
        raise DatatypeError(f"has_unit expects a unit entity, got {unit}")
    return unit_holds(ent, v)


DATATYPE_RELATIONS = {
    "less_than": (2, _rel_less_than),
    "overlaps": (2, _rel_overlaps),
    "matches_regex": (2, _rel_matches_regex),
    "integer": (1, _rel_integer),
    "precise": (1, _rel_precise),
    "geq": (2, _rel_geq),
    "leq": (2, _rel_leq),
    "has_unit": (2, _rel_has_unit),
}


def datatype_relation(name: str, *args: Value) -> bool:
    if name not in DATATYPE_RELATIONS:
        raise DatatypeError(f"unknown datatype relation: {name}")
    arity, fn = DATATYPE_RELATIONS[name]
    if len(args) != arity:
        raise DatatypeError(f"{name} expects {arity} arguments, got {len(args)}")
    return fn(*args)


def _fn_difference(a: Value, b: Value) -> Value:
    if isinstance(a, QuantityVal) and isinstance(b, QuantityVal):
        _check_units("difference", a, b)
        return QuantityVal(a.amount - b.amount, a.unit)
    if isinstance(a, TimeVal) and isinstance(b, TimeVal):
        delta = a.timestamp - b.timestamp
        return QuantityVal(Decimal(delta.days) + Decimal(delta.seconds) / Decimal(86400), DAYS_UNIT)
    raise DatatypeError(f"difference expects two quantities or two times, got {a}, {b}")


DATATYPE_FUNCTIONS = {
    "difference": (2, _fn_difference),
}


def datatype_function(name: str, *args: Value) -> Value:
    if name not in DATATYPE_FUNCTIONS:
        raise DatatypeError(f"unknown datatype function: {name}")
    arity, fn = DATATYPE_FUNCTIONS[name]
    if len(args) != arity:
        raise DatatypeError(f"{name} expects {arity} arguments, got {len(args)}")
    return fn(*args)
