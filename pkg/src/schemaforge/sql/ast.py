"""Typed syntax tree for the supported SQL subset.

All nodes are frozen dataclasses built from tuples, so structural equality
is plain ``==`` and trees can be shared freely between workers.
"""

from __future__ import annotations

import enum
from collections.abc import Iterator
from dataclasses import dataclass
from decimal import Decimal
from typing import Union

from schemaforge.schema import ColumnRef

MAX_DEPTH = 2


class Agg(enum.Enum):
    NONE = "NONE"
    MAX = "MAX"
    MIN = "MIN"
    COUNT = "COUNT"
    AVG = "AVG"
    SUM = "SUM"


NUMERIC_AGGS = (Agg.MAX, Agg.MIN, Agg.AVG, Agg.SUM)


class Op(enum.Enum):
    EQ = "="
    NEQ = "!="
    LT = "<"
    GT = ">"
    LE = "<="
    GE = ">="
    LIKE = "LIKE"
    BETWEEN = "BETWEEN"
    IN = "IN"
    NOT_IN = "NOT IN"


COMPARISON_OPS = (Op.EQ, Op.NEQ, Op.LT, Op.GT, Op.LE, Op.GE)
SUBQUERY_OPS = (Op.IN, Op.NOT_IN)


class Direction(enum.Enum):
    ASC = "ASC"
    DESC = "DESC"


class Clause(enum.Enum):
    SELECT = "SELECT"
    JOIN = "JOIN"
    WHERE = "WHERE"
    GROUP_BY = "GROUP_BY"
    HAVING = "HAVING"
    ORDER_BY = "ORDER_BY"
    LIMIT = "LIMIT"


# str for text columns; int or Decimal for number columns
Literal = Union[str, int, Decimal]


def literal_is_number(value: Literal) -> bool:
    return isinstance(value, (int, Decimal)) and not isinstance(value, bool)


@dataclass(frozen=True)
class SelectItem:
    agg: Agg
    column: ColumnRef | None  # None is '*'


@dataclass(frozen=True)
class Join:
    table: str
    left: ColumnRef
    right: ColumnRef


@dataclass(frozen=True)
class Condition:
    column: ColumnRef | None  # None only for COUNT(*) in HAVING
    op: Op
    value: Literal | tuple[Literal, Literal] | SqlAst
    agg: Agg = Agg.NONE


@dataclass(frozen=True)
class GroupItem:
    agg: Agg
    column: ColumnRef


@dataclass(frozen=True)
class OrderBy:
    agg: Agg
    column: ColumnRef | None  # None only for COUNT(*)
    direction: Direction = Direction.ASC


@dataclass(frozen=True)
class SqlAst:
    select: tuple[SelectItem, ...]
    from_tables: tuple[str, ...]
    joins: tuple[Join, ...] = ()
    where: tuple[Condition, ...] = ()
    group_by: tuple[GroupItem, ...] = ()
    having: tuple[Condition, ...] = ()
    order_by: OrderBy | None = None
    limit: int | None = None

    @property
    def tables_in_scope(self) -> tuple[str, ...]:
        return self.from_tables + tuple(j.table for j in self.joins)

    def subqueries(self) -> Iterator[SqlAst]:
        for cond in self.where + self.having:
            if isinstance(cond.value, SqlAst):
                yield cond.value

    def depth(self) -> int:
        return 1 + max((sub.depth() for sub in self.subqueries()), default=0)

    def clauses(self) -> set[Clause]:
        """Clause families present at any nesting level."""
        found = {Clause.SELECT}
        if self.joins:
            found.add(Clause.JOIN)
        if self.where:
            found.add(Clause.WHERE)
        if self.group_by:
            found.add(Clause.GROUP_BY)
        if self.having:
            found.add(Clause.HAVING)
        if self.order_by is not None:
            found.add(Clause.ORDER_BY)
        if self.limit is not None:
            found.add(Clause.LIMIT)
        for sub in self.subqueries():
            found |= sub.clauses()
        return found

    def column_refs(self) -> Iterator[ColumnRef]:
        for item in self.select:
            if item.column is not None:
                yield item.column
        for j in self.joins:
            yield j.left
            yield j.right
        for cond in self.where + self.having:
            if cond.column is not None:
                yield cond.column
            if isinstance(cond.value, SqlAst):
                yield from cond.value.column_refs()
        for g in self.group_by:
            yield g.column
        if self.order_by is not None and self.order_by.column is not None:
            yield self.order_by.column
