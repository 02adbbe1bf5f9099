"""Relational schema description and its JSON wire format."""

from __future__ import annotations

import re
from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import Any, Literal

from schemaforge.errors import SchemaError
from schemaforge.text import column_tokens

DataType = Literal["text", "number"]

NUMERAL_RE = re.compile(r"-?\d+(?:\.\d+)?")


@dataclass(frozen=True, order=True)
class ColumnRef:
    """Table-qualified column name, spelled as declared in the schema."""

    table: str
    column: str

    def __str__(self) -> str:
        return f"{self.table}.{self.column}"

    @classmethod
    def parse(cls, text: str) -> ColumnRef:
        table, sep, column = text.partition(".")
        if not sep or not table or not column:
            raise ValueError(f"not a qualified column reference: {text!r}")
        return cls(table, column)


@dataclass(frozen=True)
class Column:
    name: str
    data_type: DataType = "text"
    values: tuple[str, ...] = ()

    def __post_init__(self):
        if self.data_type not in ("text", "number"):
            raise SchemaError(f"column {self.name!r}: unknown type {self.data_type!r}")
        _check_name(self.name, "column")
        if not column_tokens(self.name):
            raise SchemaError(f"column {self.name!r} has no tokens")
        if self.data_type == "number":
            for v in self.values:
                if not NUMERAL_RE.fullmatch(v.strip()):
                    raise SchemaError(
                        f"number column {self.name!r} has non-numeric value {v!r}"
                    )


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...]

    def __post_init__(self):
        _check_name(self.name, "table")
        if not self.columns:
            raise SchemaError(f"table {self.name!r} has no columns")
        seen = set()
        for col in self.columns:
            key = col.name.lower()
            if key in seen:
                raise SchemaError(f"table {self.name!r}: duplicate column {col.name!r}")
            seen.add(key)

    def column(self, name: str) -> Column | None:
        key = name.lower()
        for col in self.columns:
            if col.name.lower() == key:
                return col
        return None


ForeignKey = tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True)
class Schema:
    schema_id: str
    tables: tuple[Table, ...]
    foreign_keys: tuple[ForeignKey, ...] = ()
    _by_name: dict[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        for i, table in enumerate(self.tables):
            key = table.name.lower()
            if key in self._by_name:
                raise SchemaError(f"schema {self.schema_id!r}: duplicate table {table.name!r}")
            self._by_name[key] = i
        for fk in self.foreign_keys:
            for ti, ci in fk:
                if not (0 <= ti < len(self.tables) and 0 <= ci < len(self.tables[ti].columns)):
                    raise SchemaError(
                        f"schema {self.schema_id!r}: foreign key endpoint {[ti, ci]} does not resolve"
                    )

    def table(self, name: str) -> Table | None:
        i = self._by_name.get(name.lower())
        return None if i is None else self.tables[i]

    def iter_columns(self) -> Iterator[tuple[ColumnRef, Column]]:
        """Columns in declaration order: table order, then column order."""
        for table in self.tables:
            for col in table.columns:
                yield ColumnRef(table.name, col.name), col

    @property
    def column_refs(self) -> list[ColumnRef]:
        return [ref for ref, _ in self.iter_columns()]

    def column(self, ref: ColumnRef) -> Column:
        table = self.table(ref.table)
        col = table.column(ref.column) if table else None
        if col is None:
            raise KeyError(str(ref))
        return col

    def ref_at(self, ti: int, ci: int) -> ColumnRef:
        table = self.tables[ti]
        return ColumnRef(table.name, table.columns[ci].name)

    def fk_refs(self) -> list[tuple[ColumnRef, ColumnRef]]:
        return [(self.ref_at(*a), self.ref_at(*b)) for a, b in self.foreign_keys]

    @property
    def n_columns(self) -> int:
        return sum(len(t.columns) for t in self.tables)

    # JSON wire format

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Schema:
        try:
            tables = tuple(
                Table(
                    t["name"],
                    tuple(
                        Column(c["name"], c.get("type", "text"), tuple(str(v) for v in c.get("values", ())))
                        for c in t["columns"]
                    ),
                )
                for t in data["tables"]
            )
            fks = tuple(
                ((int(a[0]), int(a[1])), (int(b[0]), int(b[1])))
                for a, b in data.get("foreign_keys", ())
            )
            return cls(str(data["schema_id"]), tables, fks)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(f"malformed schema object: {exc!r}") from exc

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_id": self.schema_id,
            "tables": [
                {
                    "name": t.name,
                    "columns": [
                        {"name": c.name, "type": c.data_type, "values": list(c.values)}
                        for c in t.columns
                    ],
                }
                for t in self.tables
            ],
            "foreign_keys": [[list(a), list(b)] for a, b in self.foreign_keys],
        }


def _check_name(name: str, kind: str) -> None:
    if not isinstance(name, str) or not name.strip():
        raise SchemaError(f"empty {kind} name")
    # '.' is the qualifier separator in column references
    if "." in name or "`" in name:
        raise SchemaError(f"{kind} name {name!r} may not contain '.' or '`'")
