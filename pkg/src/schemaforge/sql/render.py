from __future__ import annotations

import re
from decimal import Decimal

from schemaforge.schema import ColumnRef
from schemaforge.sql.ast import Agg, Condition, Literal, Op, SqlAst

RESERVED = frozenset(
    """SELECT FROM JOIN ON WHERE AND OR NOT GROUP BY HAVING ORDER ASC DESC LIMIT
    BETWEEN IN LIKE AS DISTINCT UNION INTERSECT EXCEPT""".split()
)

_SIMPLE_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def quote_ident(name: str) -> str:
    if _SIMPLE_IDENT.fullmatch(name) and name.upper() not in RESERVED:
        return name
    return f"`{name}`"


def render_column(ref: ColumnRef | None, agg: Agg = Agg.NONE) -> str:
    inner = "*" if ref is None else f"{quote_ident(ref.table)}.{quote_ident(ref.column)}"
    return inner if agg is Agg.NONE else f"{agg.value}({inner})"


def render_literal(value: Literal) -> str:
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    if isinstance(value, Decimal):
        return format(value, "f")
    return str(value)


def _render_condition(cond: Condition) -> str:
    lhs = render_column(cond.column, cond.agg)
    if cond.op is Op.BETWEEN:
        lo, hi = cond.value
        return f"{lhs} BETWEEN {render_literal(lo)} AND {render_literal(hi)}"
    if cond.op in (Op.IN, Op.NOT_IN):
        return f"{lhs} {cond.op.value} ({render_sql(cond.value)})"
    return f"{lhs} {cond.op.value} {render_literal(cond.value)}"


def render_sql(ast: SqlAst) -> str:
    """Canonical text: uppercase keywords, single spaces, qualified columns."""
    parts = ["SELECT", ", ".join(render_column(i.column, i.agg) for i in ast.select)]
    parts += ["FROM", ", ".join(quote_ident(t) for t in ast.from_tables)]
    for j in ast.joins:
        parts.append(f"JOIN {quote_ident(j.table)} ON {render_column(j.left)} = {render_column(j.right)}")
    if ast.where:
        parts += ["WHERE", " AND ".join(_render_condition(c) for c in ast.where)]
    if ast.group_by:
        parts += ["GROUP BY", ", ".join(render_column(g.column, g.agg) for g in ast.group_by)]
    if ast.having:
        parts += ["HAVING", " AND ".join(_render_condition(c) for c in ast.having)]
    if ast.order_by is not None:
        ob = ast.order_by
        parts += ["ORDER BY", f"{render_column(ob.column, ob.agg)} {ob.direction.value}"]
    if ast.limit is not None:
        parts += ["LIMIT", str(ast.limit)]
    return " ".join(parts)
