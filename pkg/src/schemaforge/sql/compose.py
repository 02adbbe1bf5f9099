from __future__ import annotations

from schemaforge.errors import ContractViolation
from schemaforge.schema import Schema, Table


def _find(parent: list[int], i: int) -> int:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def compose_multitable(schemas: list[Schema]) -> list[Schema]:
    """Merge single-table schemas whose tables share a column name.

    Tables are grouped transitively (A~B and B~C puts A, B, C together).
    Every shared-name column pair inside a group becomes a foreign key.
    Ungrouped schemas are returned as-is. Output order follows the first
    member of each group in the input; table names that collide inside a
    group get a numeric suffix.
    """
    for s in schemas:
        if len(s.tables) != 1:
            raise ContractViolation(f"schema {s.schema_id!r} is not single-table")

    n = len(schemas)
    parent = list(range(n))
    names = [{c.name.lower() for c in s.tables[0].columns} for s in schemas]
    owner: dict[str, int] = {}
    for i, cols in enumerate(names):
        for name in sorted(cols):
            if name in owner:
                a, b = _find(parent, owner[name]), _find(parent, i)
                if a != b:
                    parent[max(a, b)] = min(a, b)
            else:
                owner[name] = i

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(_find(parent, i), []).append(i)

    out = []
    for members in groups.values():
        if len(members) == 1:
            out.append(schemas[members[0]])
            continue
        tables = []
        used: set[str] = set()
        for i in members:
            table = schemas[i].tables[0]
            name = table.name
            k = 2
            while name.lower() in used:
                name = f"{table.name}_{k}"
                k += 1
            used.add(name.lower())
            tables.append(Table(name, table.columns))
        fks = []
        for a in range(len(tables)):
            for b in range(a + 1, len(tables)):
                for ci, col in enumerate(tables[a].columns):
                    for cj, other in enumerate(tables[b].columns):
                        if col.name.lower() == other.name.lower():
                            fks.append(((a, ci), (b, cj)))
        schema_id = "+".join(schemas[i].schema_id for i in members)
        out.append(Schema(schema_id, tuple(tables), tuple(fks)))
    return out
