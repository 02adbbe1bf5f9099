"""Word-level tokenization and model-input serialization."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from schemaforge.schema import ColumnRef, Schema

START = "<s>"
SEP = "</s>"
MASK = "<mask>"

# numerals first so "3.5" and "1,000" stay whole
_TOKEN_RE = re.compile(r"\d+(?:[.,]\d+)*|[^\W\d]\w*|\w+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it into words, numerals and punctuation.

    >>> tokenize("Show height!")
    ['show', 'height', '!']
    """
    return _TOKEN_RE.findall(text.lower())


def column_tokens(name: str) -> list[str]:
    """Tokens of a column name as they appear in the serialized input.

    Underscores are treated as word boundaries (``pet_age`` -> ``pet age``).
    """
    return tokenize(name.replace("_", " "))


@dataclass(frozen=True)
class Question:
    raw: str
    tokens: tuple[str, ...]

    @classmethod
    def from_text(cls, raw: str) -> Question:
        return cls(raw, tuple(tokenize(raw)))

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class SerializedInput:
    tokens: tuple[str, ...]
    question_span: tuple[int, int]
    column_anchors: tuple[tuple[ColumnRef, int], ...]

    @property
    def question_positions(self) -> range:
        return range(*self.question_span)

    @property
    def anchor_positions(self) -> list[int]:
        return [idx for _, idx in self.column_anchors]


def serialize_input(question: Question | list[str] | tuple[str, ...], schema: Schema) -> SerializedInput:
    """Lay out ``<s> q1 .. qn </s> c1 </s> c2 </s> ...``.

    Each column is represented downstream by the separator directly after
    its tokens; those separator indices are the column anchors.
    """
    q_tokens = question.tokens if isinstance(question, Question) else tuple(question)
    tokens = [START, *q_tokens, SEP]
    anchors = []
    for ref, column in schema.iter_columns():
        tokens.extend(column_tokens(column.name))
        tokens.append(SEP)
        anchors.append((ref, len(tokens) - 1))
    return SerializedInput(tuple(tokens), (1, 1 + len(q_tokens)), tuple(anchors))
