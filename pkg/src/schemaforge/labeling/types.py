from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Union

from schemaforge.errors import ContractViolation
from schemaforge.schema import ColumnRef
from schemaforge.sql.ast import Agg, Clause, Direction, Literal, Op

# heads of LIMIT-Value edges, which have no column
LIMIT_HEAD = "__limit__"

Head = Union[ColumnRef, str]


class DependencyType(enum.Enum):
    NONE = "None"
    SELECT_MENTION = "SELECT-Mention"
    SELECT_AGG = "SELECT-Agg"
    JOIN_MENTION = "JOIN-Mention"
    WHERE_MENTION = "WHERE-Mention"
    WHERE_OP = "WHERE-Op"
    WHERE_VALUE = "WHERE-Value"
    GROUP_BY_MENTION = "GROUP-BY-Mention"
    GROUP_BY_AGG = "GROUP-BY-Agg"
    HAVING_MENTION = "HAVING-Mention"
    HAVING_AGG = "HAVING-Agg"
    HAVING_OP = "HAVING-Op"
    HAVING_VALUE = "HAVING-Value"
    ORDER_BY_MENTION = "ORDER-BY-Mention"
    ORDER_BY_AGG = "ORDER-BY-Agg"
    ORDER_BY_ORDER = "ORDER-BY-Order"
    LIMIT_VALUE = "LIMIT-Value"

    @property
    def index(self) -> int:
        return _INDEX[self]

    @property
    def clause(self) -> Clause | None:
        return _CLAUSE_OF.get(self)


DEPENDENCY_TYPES = tuple(DependencyType)
NUM_LABELS = len(DEPENDENCY_TYPES)
_INDEX = {t: i for i, t in enumerate(DEPENDENCY_TYPES)}
_CLAUSE_OF = {
    t: next(c for c in Clause if t.value.replace("-", "_").startswith(c.value))
    for t in DEPENDENCY_TYPES
    if t is not DependencyType.NONE
}


class SpanKind(enum.Enum):
    NAME = "name"
    AGG_TRIGGER = "agg_trigger"
    OP_TRIGGER = "op_trigger"
    ORDER_TRIGGER = "order_trigger"
    VALUE = "value"


@dataclass(frozen=True)
class MentionRecord:
    """Why a column (or the LIMIT value) is used by a query."""

    column: ColumnRef | None
    clause: Clause
    agg: Agg = Agg.NONE
    op: Op | None = None
    direction: Direction | None = None
    value: Literal | tuple[Literal, Literal] | None = None

    @property
    def head(self) -> Head:
        return LIMIT_HEAD if self.column is None else self.column


def head_to_str(head: Head) -> str:
    return head if isinstance(head, str) else str(head)


def head_from_str(text: str) -> Head:
    return LIMIT_HEAD if text == LIMIT_HEAD else ColumnRef.parse(text)


@dataclass(frozen=True)
class DependencyEdge:
    head: Head
    span: tuple[int, int]
    label: DependencyType
    score: float = 1.0

    def __post_init__(self):
        if self.span[1] <= self.span[0] or self.span[0] < 0:
            raise ContractViolation(f"empty or negative span {self.span}")
        if self.label is DependencyType.NONE:
            raise ContractViolation("stored edges cannot carry the None label")
        if not 0.0 <= self.score <= 1.0:
            raise ContractViolation(f"edge score {self.score} outside [0, 1]")

    @property
    def key(self) -> tuple[str, tuple[int, int], DependencyType]:
        return head_to_str(self.head), self.span, self.label

    def to_dict(self) -> dict[str, Any]:
        return {
            "head": head_to_str(self.head),
            "span": list(self.span),
            "label": self.label.value,
            "score": self.score,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DependencyEdge:
        return cls(
            head_from_str(data["head"]),
            (int(data["span"][0]), int(data["span"][1])),
            DependencyType(data["label"]),
            float(data.get("score", 1.0)),
        )


@dataclass(frozen=True)
class DependencyGraph:
    edges: tuple[DependencyEdge, ...] = ()

    def __post_init__(self):
        keys = [e.key for e in self.edges]
        if len(set(keys)) != len(keys):
            raise ContractViolation("duplicate (head, span, label) edge")

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def to_list(self) -> list[dict[str, Any]]:
        return [e.to_dict() for e in self.edges]

    @classmethod
    def from_list(cls, items: list[dict[str, Any]]) -> DependencyGraph:
        return cls(tuple(DependencyEdge.from_dict(d) for d in items))
