"""Rule-based derivation of schema-dependency edges.

Every column the query uses is turned into a :class:`MentionRecord`; each
record yields up to five match targets (column name, aggregation trigger,
operator trigger, ordering trigger, literal value) that are located in the
question by n-gram Levenshtein matching and typed by
:func:`classify_mention`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from functools import lru_cache
from importlib import resources
from typing import Any

from schemaforge.errors import ContractViolation
from schemaforge.labeling.matching import Match, best_of
from schemaforge.labeling.types import (
    DependencyEdge,
    DependencyGraph,
    DependencyType as DT,
    Head,
    MentionRecord,
    SpanKind,
)
from schemaforge.schema import ColumnRef, Schema
from schemaforge.sql.ast import Agg, Clause, Condition, Literal, Op, SqlAst
from schemaforge.sql.templates import literal_text
from schemaforge.text import Question, column_tokens, tokenize

DEFAULT_TAU = 0.3


@dataclass(frozen=True)
class Lexicon:
    agg: dict[str, tuple[str, ...]]
    op: dict[str, tuple[str, ...]]
    order: dict[str, tuple[str, ...]]
    absorb_preceding: dict[str, frozenset[str]]
    version: int = 1

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Lexicon:
        def table(key):
            return {k: tuple(v) for k, v in data.get(key, {}).items()}

        absorb = {k: frozenset(v) for k, v in data.get("absorb_preceding", {}).items()}
        return cls(table("agg"), table("op"), table("order"), absorb, int(data.get("version", 1)))

    @classmethod
    def from_file(cls, path) -> Lexicon:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    text = resources.files("schemaforge").joinpath("data/lexicon.json").read_text(encoding="utf-8")
    return Lexicon.from_dict(json.loads(text))


def _value_mentions(cond: Condition, clause: Clause) -> list[MentionRecord]:
    value = None if isinstance(cond.value, SqlAst) else cond.value
    out = [MentionRecord(cond.column, clause, cond.agg, cond.op, None, value)]
    if isinstance(cond.value, SqlAst):
        out.extend(extract_mentions(cond.value))
    return out


def extract_mentions(ast: SqlAst) -> list[MentionRecord]:
    """One record per (column, clause role), subqueries included.

    ``*`` items produce no record; LIMIT produces a column-less record
    carrying the limit value.
    """
    out: list[MentionRecord] = []
    for item in ast.select:
        if item.column is not None:
            out.append(MentionRecord(item.column, Clause.SELECT, item.agg))
    for join in ast.joins:
        out.append(MentionRecord(join.left, Clause.JOIN))
        out.append(MentionRecord(join.right, Clause.JOIN))
    for cond in ast.where:
        out.extend(_value_mentions(cond, Clause.WHERE))
    for g in ast.group_by:
        out.append(MentionRecord(g.column, Clause.GROUP_BY, g.agg))
    for cond in ast.having:
        if cond.column is None:
            continue
        out.extend(_value_mentions(cond, Clause.HAVING))
    ob = ast.order_by
    if ob is not None and ob.column is not None:
        out.append(MentionRecord(ob.column, Clause.ORDER_BY, ob.agg, direction=ob.direction))
    if ast.limit is not None:
        out.append(MentionRecord(None, Clause.LIMIT, value=ast.limit))
    return out


_NAME_LABELS = {
    Clause.SELECT: (DT.SELECT_MENTION, DT.SELECT_AGG),
    Clause.JOIN: (DT.JOIN_MENTION, None),
    Clause.WHERE: (DT.WHERE_MENTION, None),
    Clause.GROUP_BY: (DT.GROUP_BY_MENTION, DT.GROUP_BY_AGG),
    Clause.HAVING: (DT.HAVING_MENTION, DT.HAVING_AGG),
    Clause.ORDER_BY: (DT.ORDER_BY_MENTION, DT.ORDER_BY_AGG),
}
_OP_LABELS = {Clause.WHERE: DT.WHERE_OP, Clause.HAVING: DT.HAVING_OP}
_VALUE_LABELS = {Clause.WHERE: DT.WHERE_VALUE, Clause.HAVING: DT.HAVING_VALUE, Clause.LIMIT: DT.LIMIT_VALUE}


def classify_mention(record: MentionRecord, span_kind: SpanKind) -> DT:
    """Map a mention and the kind of matched span to its dependency type.

    A column-name span in an aggregated clause gets the ``-Agg`` label, the
    same as the aggregation trigger itself.
    """
    clause = record.clause
    if span_kind is SpanKind.NAME and record.column is not None and clause in _NAME_LABELS:
        plain, agged = _NAME_LABELS[clause]
        if record.agg is Agg.NONE:
            return plain
        if agged is not None:
            return agged
    elif span_kind is SpanKind.AGG_TRIGGER and record.agg is not Agg.NONE:
        agged = _NAME_LABELS.get(clause, (None, None))[1]
        if agged is not None:
            return agged
    elif span_kind is SpanKind.OP_TRIGGER and record.op is not None and clause in _OP_LABELS:
        return _OP_LABELS[clause]
    elif span_kind is SpanKind.ORDER_TRIGGER and record.direction is not None and clause is Clause.ORDER_BY:
        return DT.ORDER_BY_ORDER
    elif span_kind is SpanKind.VALUE and record.value is not None and clause in _VALUE_LABELS:
        return _VALUE_LABELS[clause]
    raise ContractViolation(f"span kind {span_kind.value!r} is incompatible with {record}")


def name_variants(ref: ColumnRef) -> list[str]:
    variants = [
        " ".join(tokenize(ref.column)),
        " ".join(column_tokens(ref.column)),
        " ".join(column_tokens(ref.table) + column_tokens(ref.column)),
    ]
    return list(dict.fromkeys(v for v in variants if v))


def _value_forms(value: Literal, op: Op | None) -> list[str]:
    if isinstance(value, str):
        text = value.strip("%") if op is Op.LIKE else value
        return [text]
    forms = [literal_text(value)]
    if isinstance(value, Decimal) and value == value.to_integral_value():
        forms.append(str(int(value)))
    return forms


def _in_pool(value: Literal, column: ColumnRef | None, schema: Schema, op: Op | None) -> bool:
    if column is None:
        return False
    try:
        pool = schema.column(column).values
    except KeyError:
        return False
    forms = {f.lower() for f in _value_forms(value, op)}
    return any(v.strip().lower() in forms for v in pool)


@dataclass(frozen=True)
class _Target:
    kind: SpanKind
    phrases: tuple[str, ...]
    exact_only: bool = False
    absorb: frozenset[str] = frozenset()


def _targets(record: MentionRecord, schema: Schema, lexicon: Lexicon) -> list[_Target]:
    out = []
    if record.column is not None:
        out.append(_Target(SpanKind.NAME, tuple(name_variants(record.column))))
    if record.agg is not Agg.NONE and record.clause in (Clause.SELECT, Clause.GROUP_BY, Clause.HAVING, Clause.ORDER_BY):
        phrases = lexicon.agg.get(record.agg.value, ())
        if phrases:
            out.append(_Target(SpanKind.AGG_TRIGGER, phrases, absorb=lexicon.absorb_preceding.get("agg", frozenset())))
    if record.op is not None and record.clause in (Clause.WHERE, Clause.HAVING):
        phrases = lexicon.op.get(record.op.name, ())
        if phrases:
            out.append(_Target(SpanKind.OP_TRIGGER, phrases, absorb=lexicon.absorb_preceding.get("op", frozenset())))
    if record.direction is not None:
        phrases = lexicon.order.get(record.direction.value, ())
        if phrases:
            out.append(_Target(SpanKind.ORDER_TRIGGER, phrases))
    if record.value is not None:
        values = record.value if isinstance(record.value, tuple) else (record.value,)
        for v in values:
            exact = not _in_pool(v, record.column, schema, record.op)
            out.append(_Target(SpanKind.VALUE, tuple(_value_forms(v, record.op)), exact_only=exact))
    return out


def _locate(tokens, target: _Target, tau: float) -> Match | None:
    m = best_of(tokens, target.phrases)
    if m is None:
        return None
    limit = 0.0 if target.exact_only else tau
    # a distance of 1 would give a zero-confidence edge
    if m.distance > limit or m.distance >= 1.0:
        return None
    start, end = m.span
    while start > 0 and tokens[start - 1] in target.absorb:
        start -= 1
    return Match((start, end), m.distance, m.num, m.den)


@dataclass(frozen=True)
class LabelResult:
    graph: DependencyGraph
    targets: int
    matched: int


def label_question(
    question: Question, ast: SqlAst, schema: Schema, tau: float = DEFAULT_TAU, lexicon: Lexicon | None = None
) -> LabelResult:
    """:func:`derive_dependencies` plus match-rate bookkeeping."""
    if not 0.0 <= tau <= 1.0:
        raise ContractViolation(f"tau must lie in [0, 1], got {tau}")
    lexicon = lexicon or default_lexicon()
    tokens = question.tokens
    edges: dict[tuple, DependencyEdge] = {}
    n_targets = n_matched = 0
    for record in extract_mentions(ast):
        head: Head = record.head
        for target in _targets(record, schema, lexicon):
            n_targets += 1
            m = _locate(tokens, target, tau)
            if m is None:
                continue
            n_matched += 1
            edge = DependencyEdge(head, m.span, classify_mention(record, target.kind), 1.0 - m.distance)
            prev = edges.get(edge.key)
            if prev is None or edge.score > prev.score:
                edges[edge.key] = edge
    return LabelResult(DependencyGraph(tuple(edges.values())), n_targets, n_matched)


def derive_dependencies(
    question: Question, ast: SqlAst, schema: Schema, tau: float = DEFAULT_TAU, lexicon: Lexicon | None = None
) -> DependencyGraph:
    """Typed edges from query columns to the question spans that mention them."""
    return label_question(question, ast, schema, tau, lexicon).graph
