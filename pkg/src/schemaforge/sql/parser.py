"""Recursive-descent parser that binds SQL text to a schema.

Accepts the subset produced by :func:`render_sql` plus the usual surface
variation found in Spider-style exports: lowercase keywords, table aliases
(``FROM student AS T1``), double-quoted string literals, unqualified column
names and a trailing semicolon.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal

from schemaforge.errors import (
    AmbiguousColumnError,
    InvalidJoinError,
    NestingError,
    SqlSyntaxError,
    TypeMismatchError,
    UnknownColumnError,
    UnknownTableError,
    UnsupportedSqlError,
)
from schemaforge.schema import ColumnRef, Schema
from schemaforge.sql.ast import (
    MAX_DEPTH,
    Agg,
    Condition,
    Direction,
    GroupItem,
    Join,
    Literal,
    Op,
    OrderBy,
    SelectItem,
    SqlAst,
    literal_is_number,
)
from schemaforge.sql.render import RESERVED

_LEX_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<qident>`[^`]*`|\[[^\]]*\])
  | (?P<string>'(?:[^']|'')*'|"(?:[^"]|"")*")
  | (?P<punct><=|>=|!=|<>|[(),.*=<>;-])
    """,
    re.VERBOSE,
)

_AGG_NAMES = {a.value for a in Agg if a is not Agg.NONE}
_CMP = {"=": Op.EQ, "!=": Op.NEQ, "<>": Op.NEQ, "<": Op.LT, ">": Op.GT, "<=": Op.LE, ">=": Op.GE}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int

    @property
    def upper(self) -> str:
        return self.text.upper()

    def is_kw(self, *words: str) -> bool:
        return self.kind == "ident" and self.upper in words


def _lex(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _LEX_RE.match(text, pos)
        if m is None:
            raise SqlSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


@dataclass
class _RawCol:
    """Column reference before binding to the FROM scope."""

    qualifier: str | None
    name: str | None  # None is '*'
    agg: Agg
    pos: int


class _Parser:
    def __init__(self, text: str, schema: Schema):
        self.toks = _lex(text)
        self.i = 0
        self.schema = schema

    # token helpers

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> _Tok:
        tok = self.tok
        self.i += 1
        return tok

    def expect_kw(self, *words: str) -> None:
        for w in words:
            if not self.tok.is_kw(w):
                raise SqlSyntaxError(f"expected {w}, found {self.tok.text or 'end of input'!r}", self.tok.pos)
            self.advance()

    def expect_punct(self, p: str) -> None:
        if self.tok.kind != "punct" or self.tok.text != p:
            raise SqlSyntaxError(f"expected {p!r}, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        self.advance()

    def at_punct(self, p: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == p

    def ident(self) -> str:
        tok = self.tok
        if tok.kind == "qident":
            self.advance()
            return tok.text[1:-1]
        if tok.kind == "ident" and tok.upper not in RESERVED:
            self.advance()
            return tok.text
        raise SqlSyntaxError(f"expected identifier, found {tok.text or 'end of input'!r}", tok.pos)

    # grammar

    def parse(self) -> SqlAst:
        ast = self.query(depth=1)
        if self.at_punct(";"):
            self.advance()
        if self.tok.kind != "eof":
            self._unexpected()
        return ast

    def _unexpected(self):
        tok = self.tok
        if tok.is_kw("UNION", "INTERSECT", "EXCEPT", "OR", "DISTINCT"):
            raise UnsupportedSqlError(f"{tok.upper} is not supported", tok.pos)
        raise SqlSyntaxError(f"unexpected {tok.text!r}", tok.pos)

    def query(self, depth: int) -> SqlAst:
        self.expect_kw("SELECT")
        if self.tok.is_kw("DISTINCT"):
            self._unexpected()
        raw_select = [self.raw_column(allow_star=True)]
        while self.at_punct(","):
            self.advance()
            raw_select.append(self.raw_column(allow_star=True))

        self.expect_kw("FROM")
        scope: dict[str, str] = {}
        from_tables = [self.table_ref(scope)]
        while self.at_punct(","):
            self.advance()
            from_tables.append(self.table_ref(scope))
        joins = []
        while self.tok.is_kw("JOIN"):
            self.advance()
            table = self.table_ref(scope)
            self.expect_kw("ON")
            left = self.bind(self.raw_column(allow_star=False, allow_agg=False), scope)
            self.expect_punct("=")
            right = self.bind(self.raw_column(allow_star=False, allow_agg=False), scope)
            self.check_join(table, left, right, from_tables + [j.table for j in joins])
            joins.append(Join(table, left, right))

        select = tuple(SelectItem(r.agg, self.bind(r, scope)) for r in raw_select)

        where: list[Condition] = []
        if self.tok.is_kw("WHERE"):
            self.advance()
            where.append(self.condition(scope, depth, allow_agg=False))
            while self.tok.is_kw("AND"):
                self.advance()
                where.append(self.condition(scope, depth, allow_agg=False))

        group_by: list[GroupItem] = []
        if self.tok.is_kw("GROUP"):
            self.expect_kw("GROUP", "BY")
            while True:
                raw = self.raw_column(allow_star=False)
                group_by.append(GroupItem(raw.agg, self.bind(raw, scope)))
                if not self.at_punct(","):
                    break
                self.advance()

        having: list[Condition] = []
        if self.tok.is_kw("HAVING"):
            pos = self.tok.pos
            self.advance()
            if not group_by:
                raise SqlSyntaxError("HAVING without GROUP BY", pos)
            having.append(self.condition(scope, depth, allow_agg=True))
            while self.tok.is_kw("AND"):
                self.advance()
                having.append(self.condition(scope, depth, allow_agg=True))

        order_by = None
        if self.tok.is_kw("ORDER"):
            self.expect_kw("ORDER", "BY")
            raw = self.raw_column(allow_star=True)
            if raw.name is None and raw.agg is not Agg.COUNT:
                raise SqlSyntaxError("ORDER BY * is not valid", raw.pos)
            direction = Direction.ASC
            if self.tok.is_kw("ASC", "DESC"):
                direction = Direction(self.advance().upper)
            if self.at_punct(","):
                raise UnsupportedSqlError("multiple ORDER BY keys are not supported", self.tok.pos)
            order_by = OrderBy(raw.agg, self.bind(raw, scope), direction)

        limit = None
        if self.tok.is_kw("LIMIT"):
            self.advance()
            tok = self.tok
            if tok.kind != "number" or "." in tok.text:
                raise SqlSyntaxError("LIMIT expects a non-negative integer", tok.pos)
            self.advance()
            limit = int(tok.text)

        return SqlAst(
            select=select,
            from_tables=tuple(from_tables),
            joins=tuple(joins),
            where=tuple(where),
            group_by=tuple(group_by),
            having=tuple(having),
            order_by=order_by,
            limit=limit,
        )

    def table_ref(self, scope: dict[str, str]) -> str:
        pos = self.tok.pos
        name = self.ident()
        table = self.schema.table(name)
        if table is None:
            raise UnknownTableError(f"unknown table {name!r}", pos)
        if table.name.lower() in scope.values() or table.name.lower() in scope:
            raise UnsupportedSqlError(f"table {table.name!r} appears twice", pos)
        alias = None
        if self.tok.is_kw("AS"):
            self.advance()
            alias = self.ident()
        elif self.tok.kind in ("ident", "qident") and self.tok.upper not in RESERVED:
            alias = self.ident()
        scope[table.name.lower()] = table.name
        if alias is not None:
            if alias.lower() in scope and scope[alias.lower()] != table.name:
                raise SqlSyntaxError(f"alias {alias!r} already in use", pos)
            scope[alias.lower()] = table.name
        return table.name

    def raw_column(self, allow_star: bool, allow_agg: bool = True) -> _RawCol:
        tok = self.tok
        if tok.kind == "ident" and tok.upper in _AGG_NAMES and self.peek().text == "(":
            if not allow_agg:
                raise SqlSyntaxError("aggregation not allowed here", tok.pos)
            agg = Agg(tok.upper)
            self.advance()
            self.advance()
            if self.tok.is_kw("DISTINCT"):
                self._unexpected()
            if self.at_punct("*"):
                if agg is not Agg.COUNT:
                    raise SqlSyntaxError(f"{agg.value}(*) is not valid", tok.pos)
                self.advance()
                inner = _RawCol(None, None, agg, tok.pos)
            else:
                inner = self.plain_column()
                inner.agg = agg
            self.expect_punct(")")
            return inner
        if self.at_punct("*"):
            if not allow_star:
                raise SqlSyntaxError("'*' not allowed here", tok.pos)
            self.advance()
            return _RawCol(None, None, Agg.NONE, tok.pos)
        return self.plain_column()

    def plain_column(self) -> _RawCol:
        pos = self.tok.pos
        first = self.ident()
        if self.at_punct("."):
            self.advance()
            if self.at_punct("*"):
                raise UnsupportedSqlError("qualified '*' is not supported", self.tok.pos)
            return _RawCol(first, self.ident(), Agg.NONE, pos)
        return _RawCol(None, first, Agg.NONE, pos)

    def bind(self, raw: _RawCol, scope: dict[str, str]) -> ColumnRef | None:
        if raw.name is None:
            return None
        if raw.qualifier is not None:
            table_name = scope.get(raw.qualifier.lower())
            if table_name is None:
                raise UnknownTableError(f"table {raw.qualifier!r} is not in scope", raw.pos)
            col = self.schema.table(table_name).column(raw.name)
            if col is None:
                raise UnknownColumnError(f"unknown column {raw.qualifier}.{raw.name}", raw.pos)
            return ColumnRef(table_name, col.name)
        hits = []
        for table_name in dict.fromkeys(scope.values()):
            col = self.schema.table(table_name).column(raw.name)
            if col is not None:
                hits.append(ColumnRef(table_name, col.name))
        if not hits:
            raise UnknownColumnError(f"unknown column {raw.name}", raw.pos)
        if len(hits) > 1:
            raise AmbiguousColumnError(f"ambiguous column {raw.name}", raw.pos)
        return hits[0]

    def check_join(self, table: str, left: ColumnRef, right: ColumnRef, in_scope: list[str]) -> None:
        sides = {left.table, right.table}
        if table not in sides or not (sides - {table}) & set(in_scope):
            raise InvalidJoinError(f"ON clause must link {table!r} to a table already in scope")
        fks = self.schema.fk_refs()
        linked = (left, right) in fks or (right, left) in fks
        if not linked and left.column.lower() != right.column.lower():
            raise InvalidJoinError(f"{left} and {right} share no foreign key or column name")

    def condition(self, scope: dict[str, str], depth: int, allow_agg: bool) -> Condition:
        if self.at_punct("("):
            raise UnsupportedSqlError("parenthesised conditions are not supported", self.tok.pos)
        raw = self.raw_column(allow_star=False, allow_agg=allow_agg)
        column = self.bind(raw, scope)
        tok = self.tok
        if tok.kind == "punct" and tok.text in _CMP:
            self.advance()
            op = _CMP[tok.text]
            if self.tok.kind in ("ident", "qident") and not self.tok.is_kw("SELECT"):
                raise UnsupportedSqlError("column-to-column comparison is not supported", self.tok.pos)
            if self.at_punct("("):
                raise UnsupportedSqlError("scalar subqueries are not supported", self.tok.pos)
            value = self.literal()
            self.check_literal(column, raw.agg, value, tok.pos)
            return Condition(column, op, value, raw.agg)
        if tok.is_kw("LIKE"):
            self.advance()
            value = self.literal()
            self.check_literal(column, raw.agg, value, tok.pos)
            return Condition(column, Op.LIKE, value, raw.agg)
        if tok.is_kw("BETWEEN"):
            self.advance()
            lo = self.literal()
            self.expect_kw("AND")
            hi = self.literal()
            self.check_literal(column, raw.agg, lo, tok.pos)
            self.check_literal(column, raw.agg, hi, tok.pos)
            return Condition(column, Op.BETWEEN, (lo, hi), raw.agg)
        if tok.is_kw("NOT") and self.peek().is_kw("IN") or tok.is_kw("IN"):
            op = Op.NOT_IN if tok.is_kw("NOT") else Op.IN
            if op is Op.NOT_IN:
                self.advance()
            self.advance()
            self.expect_punct("(")
            if not self.tok.is_kw("SELECT"):
                raise UnsupportedSqlError("IN lists are not supported; use a subquery", self.tok.pos)
            if depth + 1 > MAX_DEPTH:
                raise NestingError(f"subquery nesting deeper than {MAX_DEPTH}", self.tok.pos)
            sub = self.query(depth + 1)
            self.expect_punct(")")
            self.check_subquery(column, raw.agg, sub, tok.pos)
            return Condition(column, op, sub, raw.agg)
        if tok.is_kw("NOT"):
            raise UnsupportedSqlError("NOT is only supported as NOT IN", tok.pos)
        raise SqlSyntaxError(f"expected comparison operator, found {tok.text or 'end of input'!r}", tok.pos)

    def literal(self) -> Literal:
        tok = self.tok
        negative = False
        if self.at_punct("-") and self.peek().kind == "number":
            negative = True
            self.advance()
            tok = self.tok
        if tok.kind == "number":
            self.advance()
            text = ("-" if negative else "") + tok.text
            return Decimal(text) if "." in text else int(text)
        if tok.kind == "string":
            self.advance()
            quote = tok.text[0]
            return tok.text[1:-1].replace(quote * 2, quote)
        raise SqlSyntaxError(f"expected literal, found {tok.text or 'end of input'!r}", tok.pos)

    def _value_type(self, column: ColumnRef | None, agg: Agg) -> str:
        if agg is Agg.COUNT or column is None:
            return "number"
        return self.schema.column(column).data_type

    def check_literal(self, column: ColumnRef | None, agg: Agg, value: Literal, pos: int) -> None:
        expected = self._value_type(column, agg)
        actual = "number" if literal_is_number(value) else "text"
        if expected != actual:
            raise TypeMismatchError(f"{actual} literal compared with {expected} column {column}", pos)

    def check_subquery(self, column: ColumnRef | None, agg: Agg, sub: SqlAst, pos: int) -> None:
        if len(sub.select) != 1 or sub.select[0].column is None and sub.select[0].agg is not Agg.COUNT:
            raise TypeMismatchError("IN subquery must select exactly one column", pos)
        item = sub.select[0]
        if self._value_type(column, agg) != self._value_type(item.column, item.agg):
            raise TypeMismatchError(f"IN subquery type does not match {column}", pos)


def parse_sql(text: str, schema: Schema) -> SqlAst:
    """Parse ``text`` and bind every reference against ``schema``.

    Raises a subclass of :class:`~schemaforge.errors.SqlError` on failure;
    the exception's ``reason`` attribute is a short tag such as
    ``"unknown column"``.
    """
    return _Parser(text, schema).parse()
