"""Deterministic template realisation of a query as an English question.

This is a stand-in for a learned SQL-to-text generator; records produced
with it are tagged ``question_source="template"``.
"""

from __future__ import annotations

from decimal import Decimal

from schemaforge.schema import ColumnRef, Schema
from schemaforge.sql.ast import Agg, Condition, Direction, Literal, Op, SqlAst

QUESTION_SOURCE = "template"

AGG_WORDS = {
    Agg.MAX: "maximum",
    Agg.MIN: "minimum",
    Agg.COUNT: "number of",
    Agg.AVG: "average",
    Agg.SUM: "total",
}

_OP_WORDS = {
    Op.EQ: "is equal to",
    Op.NEQ: "is not",
    Op.LT: "is less than",
    Op.GT: "is greater than",
    Op.LE: "is at most",
    Op.GE: "is at least",
    Op.LIKE: "contains",
}

_DIRECTION_WORDS = {Direction.ASC: "ascending", Direction.DESC: "descending"}


def literal_text(value: Literal) -> str:
    if isinstance(value, Decimal):
        return format(value, "f")
    return str(value)


def _subject(column: ColumnRef | None, agg: Agg) -> str:
    if column is None:
        return "the number of rows" if agg is Agg.COUNT else "all rows"
    if agg is Agg.NONE:
        return column.column
    return f"the {AGG_WORDS[agg]} {column.column}"


def _join_words(parts: list[str]) -> str:
    if len(parts) <= 1:
        return "".join(parts)
    return ", ".join(parts[:-1]) + " and " + parts[-1]


def _condition(cond: Condition) -> str:
    lhs = _subject(cond.column, cond.agg)
    if cond.op is Op.BETWEEN:
        lo, hi = cond.value
        return f"{lhs} is between {literal_text(lo)} and {literal_text(hi)}"
    if cond.op in (Op.IN, Op.NOT_IN):
        sub = cond.value
        neg = "not " if cond.op is Op.NOT_IN else ""
        inner = f"{_subject(sub.select[0].column, sub.select[0].agg)} of {' and '.join(sub.tables_in_scope)}"
        if sub.where:
            inner += " where " + " and ".join(_condition(c) for c in sub.where)
        return f"{lhs} is {neg}one of the {inner}"
    value = literal_text(cond.value)
    if cond.op is Op.LIKE:
        value = value.strip("%")
    return f"{lhs} {_OP_WORDS[cond.op]} {value}"


def synthesize_question(ast: SqlAst, schema: Schema | None = None) -> str:
    """Render ``ast`` through a fixed clause-by-clause template.

    >>> from schemaforge.sql.ast import SelectItem
    >>> synthesize_question(SqlAst((SelectItem(Agg.MAX, ColumnRef("student", "height")),), ("student",)))
    'show the maximum height of student'
    """
    tables = " and ".join(ast.tables_in_scope)
    if len(ast.select) == 1 and ast.select[0].column is None and ast.select[0].agg is Agg.NONE:
        text = f"show all rows of {tables}"
    else:
        text = f"show {_join_words([_subject(i.column, i.agg) for i in ast.select])} of {tables}"
    if ast.where:
        text += " where " + " and ".join(_condition(c) for c in ast.where)
    if ast.group_by:
        text += " for each " + " and ".join(_subject(g.column, g.agg) for g in ast.group_by)
    if ast.having:
        text += " having " + " and ".join(_condition(c) for c in ast.having)
    ob = ast.order_by
    if ob is not None:
        subject = _subject(ob.column, ob.agg)
        direction = _DIRECTION_WORDS[ob.direction]
        if ast.limit is not None:
            text += f" with the top {ast.limit} by {subject} {direction}"
        else:
            text += f" ordered by {subject} {direction}"
    elif ast.limit is not None:
        text += f" limited to {ast.limit} row{'' if ast.limit == 1 else 's'}"
    return text
