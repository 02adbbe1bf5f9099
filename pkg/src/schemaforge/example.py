"""The corpus record and its JSONL representation."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from typing import Any

from schemaforge.errors import ContractViolation
from schemaforge.labeling.types import LIMIT_HEAD, DependencyGraph
from schemaforge.schema import Schema
from schemaforge.sql.ast import SqlAst
from schemaforge.sql.parser import parse_sql
from schemaforge.sql.render import render_sql
from schemaforge.text import Question


def derive_seed(base_seed: int, key: str) -> int:
    """Stable 63-bit seed for ``key`` under ``base_seed``."""
    digest = hashlib.sha256(f"{base_seed}:{key}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class PretrainExample:
    example_id: str
    schema_id: str
    question: Question
    sql: SqlAst
    dependencies: DependencyGraph | None = None
    difficulty: float | None = None
    provenance: str = "real"

    def with_(self, **changes) -> PretrainExample:
        return replace(self, **changes)

    def validate(self, schema: Schema) -> None:
        if schema.schema_id != self.schema_id:
            raise ContractViolation(f"{self.example_id}: schema id mismatch")
        if self.difficulty is not None and not 0.0 <= self.difficulty <= 1.0:
            raise ContractViolation(f"{self.example_id}: difficulty outside [0, 1]")
        if self.dependencies is None:
            return
        n = len(self.question.tokens)
        known = set(schema.column_refs)
        for edge in self.dependencies:
            if edge.head != LIMIT_HEAD and edge.head not in known:
                raise ContractViolation(f"{self.example_id}: edge head {edge.head} not in schema")
            if not 0 <= edge.span[0] < edge.span[1] <= n:
                raise ContractViolation(f"{self.example_id}: edge span {edge.span} outside question")

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {
            "example_id": self.example_id,
            "schema_id": self.schema_id,
            "question": self.question.raw,
            "question_tokens": list(self.question.tokens),
            "sql": render_sql(self.sql),
            "provenance": self.provenance,
        }
        if self.dependencies is not None:
            rec["dependencies"] = self.dependencies.to_list()
        if self.difficulty is not None:
            rec["difficulty"] = self.difficulty
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, Any], schema: Schema) -> PretrainExample:
        question = Question.from_text(rec["question"])
        deps = rec.get("dependencies")
        return cls(
            example_id=str(rec["example_id"]),
            schema_id=str(rec["schema_id"]),
            question=question,
            sql=parse_sql(rec["sql"], schema),
            dependencies=None if deps is None else DependencyGraph.from_list(deps),
            difficulty=rec.get("difficulty"),
            provenance=rec.get("provenance", "real"),
        )
