"""Top-down random expansion of the SQL production rules.

The derivation mirrors the grammar::

    SQLs    -> SQL
    SQL     -> Select [Join*] [Where] [GroupBy] [Having] [OrderBy] [Limit]
    Select  -> SELECT A (, A)*
    Where   -> WHERE Conditions
    ...

Clause presence and fan-out are drawn uniformly within the bounds given by
:class:`GrammarConfig`.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from decimal import Decimal

from schemaforge.errors import ContractViolation, UnsatisfiableConfigError
from schemaforge.schema import Column, ColumnRef, Schema
from schemaforge.sql.ast import (
    COMPARISON_OPS,
    MAX_DEPTH,
    NUMERIC_AGGS,
    Agg,
    Clause,
    Condition,
    Direction,
    GroupItem,
    Join,
    Literal,
    Op,
    OrderBy,
    SelectItem,
    SqlAst,
)

ALL_CLAUSES = frozenset(Clause)

SYNTHETIC_WORDS = (
    "alpha", "bravo", "delta", "echo", "harbor", "meadow", "orchid",
    "quartz", "river", "summit", "tango", "willow",
)

_NUMBER_AGGS = (Agg.NONE, Agg.MAX, Agg.MIN, Agg.COUNT, Agg.AVG, Agg.SUM)
_TEXT_AGGS = (Agg.NONE, Agg.COUNT)
_NUMBER_OPS = (*COMPARISON_OPS, Op.BETWEEN)
_TEXT_OPS = (Op.EQ, Op.NEQ, Op.LIKE)


def parse_clauses(spec: str | Iterable[str]) -> frozenset[Clause]:
    """``"select,where,group-by"`` -> clause set. SELECT is always included."""
    names = spec.split(",") if isinstance(spec, str) else list(spec)
    out = {Clause.SELECT}
    for name in names:
        key = name.strip().upper().replace("-", "_").replace(" ", "_")
        if not key:
            continue
        if key in ("GROUPBY", "ORDERBY"):
            key = key[:-2] + "_BY"
        try:
            out.add(Clause[key])
        except KeyError:
            raise ValueError(f"unknown clause {name!r}") from None
    return frozenset(out)


@dataclass(frozen=True)
class GrammarConfig:
    max_select_items: int = 3
    max_conditions: int = 2
    max_joins: int = 2
    subquery_probability: float = 0.1
    # presence probability of each allowed optional clause
    clause_probability: float = 0.5
    clauses: frozenset[Clause] = field(default=ALL_CLAUSES)
    force_numeric_agg: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.max_select_items < 1 or self.max_conditions < 1 or self.max_joins < 0:
            raise ContractViolation("max_select_items and max_conditions must be >= 1, max_joins >= 0")
        for name in ("subquery_probability", "clause_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ContractViolation(f"{name} must lie in [0, 1], got {p}")
        if Clause.SELECT not in self.clauses:
            raise ContractViolation("the clause set must include SELECT")

    def allows(self, clause: Clause) -> bool:
        return clause in self.clauses


def to_number(text: str) -> int | Decimal:
    text = text.strip()
    return Decimal(text) if "." in text else int(text)


class _Sampler:
    def __init__(self, schema: Schema, config: GrammarConfig, rng: random.Random):
        self.schema = schema
        self.config = config
        self.rng = rng

    def _present(self, clause: Clause) -> bool:
        return self.config.allows(clause) and self.rng.random() < self.config.clause_probability

    def _columns(self, tables: Iterable[str]) -> list[tuple[ColumnRef, Column]]:
        out = []
        for name in tables:
            table = self.schema.table(name)
            out.extend((ColumnRef(table.name, c.name), c) for c in table.columns)
        return out

    def _tables_with(self, data_type: str) -> list[str]:
        return [t.name for t in self.schema.tables if any(c.data_type == data_type for c in t.columns)]

    def _join_candidates(self, in_scope: list[str]) -> list[Join]:
        scope = set(in_scope)
        seen = set()
        out = []
        for a, b in self.schema.fk_refs():
            for left, right in ((a, b), (b, a)):
                if left.table in scope and right.table not in scope:
                    key = (left, right)
                    if key not in seen:
                        seen.add(key)
                        out.append(Join(right.table, left, right))
        for left_ref, left_col in self._columns(in_scope):
            for table in self.schema.tables:
                if table.name in scope:
                    continue
                col = table.column(left_col.name)
                if col is not None:
                    right = ColumnRef(table.name, col.name)
                    if (left_ref, right) not in seen:
                        seen.add((left_ref, right))
                        out.append(Join(table.name, left_ref, right))
        return out

    def value(self, column: Column) -> Literal:
        if column.values:
            raw = self.rng.choice(column.values)
            return to_number(raw) if column.data_type == "number" else raw
        if column.data_type == "number":
            return self.rng.randint(1, 100)
        return self.rng.choice(SYNTHETIC_WORDS)

    def query(self, depth: int = 1, subquery_type: str | None = None) -> SqlAst:
        rng = self.rng
        cfg = self.config
        if subquery_type is not None:
            base = rng.choice(self._tables_with(subquery_type))
        elif cfg.force_numeric_agg:
            base = rng.choice(self._tables_with("number"))
        else:
            base = rng.choice([t.name for t in self.schema.tables])
        scope = [base]

        joins: list[Join] = []
        if depth == 1 and cfg.max_joins > 0 and self._present(Clause.JOIN):
            for _ in range(rng.randint(1, cfg.max_joins)):
                candidates = self._join_candidates(scope)
                if not candidates:
                    break
                join = rng.choice(candidates)
                joins.append(join)
                scope.append(join.table)
        cols = self._columns(scope)

        if subquery_type is not None:
            typed = [(r, c) for r, c in cols if c.data_type == subquery_type]
            ref, _ = rng.choice(typed)
            where = ()
            if self._present(Clause.WHERE):
                where = tuple(self.condition(cols, depth) for _ in range(rng.randint(1, cfg.max_conditions)))
            return SqlAst(select=(SelectItem(Agg.NONE, ref),), from_tables=(base,), where=where)

        has_group = self._present(Clause.GROUP_BY)
        group_by: tuple[GroupItem, ...] = ()
        if has_group:
            picked = rng.sample(cols, rng.randint(1, min(2, len(cols))))
            group_by = tuple(GroupItem(Agg.NONE, r) for r, _ in picked)

        select = self.select(cols, group_by)

        where: tuple[Condition, ...] = ()
        if self._present(Clause.WHERE):
            where = tuple(self.condition(cols, depth) for _ in range(rng.randint(1, cfg.max_conditions)))

        having: tuple[Condition, ...] = ()
        if group_by and self._present(Clause.HAVING):
            n = rng.randint(1, min(cfg.max_conditions, 2))
            having = tuple(self.having_condition(cols, group_by) for _ in range(n))

        order_by = None
        if self._present(Clause.ORDER_BY):
            ref, col = rng.choice(cols)
            agg = Agg.NONE
            if group_by:
                agg = rng.choice(_NUMBER_AGGS if col.data_type == "number" else _TEXT_AGGS)
            order_by = OrderBy(agg, ref, rng.choice((Direction.ASC, Direction.DESC)))

        limit = rng.randint(1, 5) if self._present(Clause.LIMIT) else None

        return SqlAst(
            select=select,
            from_tables=(base,),
            joins=tuple(joins),
            where=where,
            group_by=group_by,
            having=having,
            order_by=order_by,
            limit=limit,
        )

    def select(self, cols, group_by) -> tuple[SelectItem, ...]:
        rng = self.rng
        n = rng.randint(1, self.config.max_select_items)
        items: list[SelectItem] = []
        if self.config.force_numeric_agg:
            numeric = [r for r, c in cols if c.data_type == "number"]
            for _ in range(n):
                items.append(SelectItem(rng.choice(NUMERIC_AGGS), rng.choice(numeric)))
        elif group_by:
            items.append(SelectItem(Agg.NONE, group_by[0].column))
            for _ in range(n - 1):
                ref, col = rng.choice(cols)
                aggs = NUMERIC_AGGS + (Agg.COUNT,) if col.data_type == "number" else (Agg.COUNT,)
                items.append(SelectItem(rng.choice(aggs), ref))
        else:
            if rng.randrange(len(cols) + 1) == len(cols):
                return (SelectItem(rng.choice((Agg.NONE, Agg.COUNT)), None),)
            for _ in range(n):
                ref, col = rng.choice(cols)
                aggs = _NUMBER_AGGS if col.data_type == "number" else _TEXT_AGGS
                items.append(SelectItem(rng.choice(aggs), ref))
        return tuple(dict.fromkeys(items))

    def condition(self, cols, depth: int) -> Condition:
        rng = self.rng
        ref, col = rng.choice(cols)
        if (
            depth < MAX_DEPTH
            and rng.random() < self.config.subquery_probability
            and self._tables_with(col.data_type)
        ):
            sub = self.query(depth + 1, subquery_type=col.data_type)
            return Condition(ref, rng.choice((Op.IN, Op.NOT_IN)), sub)
        if col.data_type == "number":
            op = rng.choice(_NUMBER_OPS)
        else:
            op = rng.choice(_TEXT_OPS)
        if op is Op.BETWEEN:
            lo, hi = sorted((self.value(col), self.value(col)))
            return Condition(ref, op, (lo, hi))
        value = self.value(col)
        if op is Op.LIKE:
            value = f"%{value}%"
        return Condition(ref, op, value)

    def having_condition(self, cols, group_by) -> Condition:
        rng = self.rng
        op = rng.choice(COMPARISON_OPS)
        kind = rng.randrange(3)
        if kind == 0:
            ref = rng.choice(group_by).column
            col = self.schema.column(ref)
            value = self.value(col)
            if col.data_type == "text" and op not in (Op.EQ, Op.NEQ):
                op = rng.choice((Op.EQ, Op.NEQ))
            return Condition(ref, op, value, Agg.NONE)
        numeric = [(r, c) for r, c in cols if c.data_type == "number"]
        if kind == 1 and numeric:
            ref, col = rng.choice(numeric)
            return Condition(ref, op, self.value(col), rng.choice(NUMERIC_AGGS))
        ref, _ = rng.choice(cols)
        return Condition(ref, op, rng.randint(1, 10), Agg.COUNT)


def sample_sql(schema: Schema, config: GrammarConfig, rng: random.Random | None = None) -> SqlAst:
    """Draw one query from the grammar.

    Without ``rng`` a fresh generator seeded from ``config.seed`` is used, so
    repeated calls return the same query; pass a shared ``random.Random`` (or
    use :func:`iter_samples`) to draw a sequence.
    """
    if schema.n_columns == 0:
        raise ContractViolation("schema has no columns")
    if config.force_numeric_agg and not any(c.data_type == "number" for _, c in schema.iter_columns()):
        raise UnsatisfiableConfigError(
            f"schema {schema.schema_id!r} has no number column but numeric aggregation is forced"
        )
    if rng is None:
        rng = random.Random(config.seed)
    return _Sampler(schema, config, rng).query()


def iter_samples(schema: Schema, config: GrammarConfig) -> Iterator[SqlAst]:
    rng = random.Random(config.seed)
    while True:
        yield sample_sql(schema, config, rng)
