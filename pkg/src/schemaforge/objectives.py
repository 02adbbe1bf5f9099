"""Self-supervised signals: MLM mask plans with value replacement, and
entity-perturbation (EPR) examples with their recovery targets."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any

from schemaforge.errors import ContractViolation
from schemaforge.example import PretrainExample, derive_seed
from schemaforge.schema import ColumnRef, Schema
from schemaforge.text import MASK, SerializedInput, column_tokens, serialize_input, tokenize

DEFAULT_MLM_RATIO = 0.25
DEFAULT_VALUE_PROB = 0.25


@dataclass(frozen=True)
class ColumnReplacement:
    column: ColumnRef
    token_index: int
    replacement: str
    original: str


@dataclass(frozen=True)
class MaskPlan:
    masked_question_positions: tuple[int, ...] = ()
    column_replacements: tuple[ColumnReplacement, ...] = ()

    def merge(self, other: MaskPlan) -> MaskPlan:
        return MaskPlan(
            self.masked_question_positions + other.masked_question_positions,
            self.column_replacements + other.column_replacements,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "question_positions": list(self.masked_question_positions),
            "column_replacements": [
                {
                    "column": str(r.column),
                    "token_index": r.token_index,
                    "replacement": r.replacement,
                    "original": r.original,
                }
                for r in self.column_replacements
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MaskPlan:
        return cls(
            tuple(data.get("question_positions", ())),
            tuple(
                ColumnReplacement(ColumnRef.parse(r["column"]), r["token_index"], r["replacement"], r["original"])
                for r in data.get("column_replacements", ())
            ),
        )


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ContractViolation(f"{name} must lie in [0, 1], got {p}")


def plan_mlm(example: PretrainExample, ratio: float = DEFAULT_MLM_RATIO, seed: int = 0) -> MaskPlan:
    """Select each question token independently with probability ``ratio``."""
    _check_prob("ratio", ratio)
    rng = random.Random(seed)
    n = len(example.question.tokens)
    return MaskPlan(tuple(i for i in range(n) if rng.random() < ratio))


def value_pool(schema: Schema, ref: ColumnRef) -> list[list[str]]:
    """Tokenized cell values of one column, empty values dropped."""
    return [toks for toks in (tokenize(v) for v in schema.column(ref).values) if toks]


def plan_value_replacement(
    example: PretrainExample, schema: Schema, prob: float = DEFAULT_VALUE_PROB, seed: int = 0
) -> MaskPlan:
    """Replace column-name tokens with tokens from the same column's values.

    Each column-name token is picked with probability ``prob``; a pick draws
    a cell value uniformly, then a token of that value uniformly. Columns
    with no values are never touched.
    """
    _check_prob("prob", prob)
    rng = random.Random(seed)
    out = []
    for ref, column in schema.iter_columns():
        pool = value_pool(schema, ref)
        if not pool:
            continue
        for k, original in enumerate(column_tokens(column.name)):
            if rng.random() < prob:
                value = rng.choice(pool)
                out.append(ColumnReplacement(ref, k, rng.choice(value), original))
    return MaskPlan((), tuple(out))


def plan_objectives(
    example: PretrainExample,
    schema: Schema,
    mlm_ratio: float = DEFAULT_MLM_RATIO,
    value_prob: float = DEFAULT_VALUE_PROB,
    seed: int = 0,
) -> MaskPlan:
    base = derive_seed(seed, example.example_id)
    return plan_mlm(example, mlm_ratio, derive_seed(base, "mlm")).merge(
        plan_value_replacement(example, schema, value_prob, derive_seed(base, "value"))
    )


def apply_mask_plan(example: PretrainExample, schema: Schema, plan: MaskPlan) -> tuple[SerializedInput, list[tuple[int, str]]]:
    """Serialize with masks and replacements applied.

    Returns the corrupted input and ``(position, original token)`` recovery
    targets in serialized coordinates.
    """
    clean = serialize_input(example.question, schema)
    tokens = list(clean.tokens)
    targets = []
    q0 = clean.question_span[0]
    for i in plan.masked_question_positions:
        pos = q0 + i
        targets.append((pos, tokens[pos]))
        tokens[pos] = MASK
    anchors = dict(clean.column_anchors)
    for r in plan.column_replacements:
        n_tok = len(column_tokens(r.column.column))
        pos = anchors[r.column] - n_tok + r.token_index
        targets.append((pos, r.original))
        tokens[pos] = r.replacement
    return SerializedInput(tuple(tokens), clean.question_span, clean.column_anchors), targets


def identify_primary_entities(example: PretrainExample) -> list[tuple[int, int]]:
    """Maximal runs of question tokens covered by at least one edge span."""
    if example.dependencies is None:
        raise ContractViolation(f"{example.example_id}: no dependency graph")
    covered = set()
    for edge in example.dependencies:
        covered.update(range(*edge.span))
    spans = []
    for i in sorted(covered):
        if spans and spans[-1][1] == i:
            spans[-1][1] = i + 1
        else:
            spans.append([i, i + 1])
    return [(s, e) for s, e in spans]


@dataclass(frozen=True)
class PerturbedExample:
    shuffled_tokens: tuple[str, ...]
    entity_spans_original: tuple[tuple[int, int], ...]
    entity_spans_shuffled: tuple[tuple[int, int], ...]
    # permutation[k] is the original rank of the entity now in slot k
    permutation: tuple[int, ...]
    recovery_target: tuple[int, ...]

    def restore(self) -> list[str]:
        """Undo the shuffle using only the recovery targets."""
        blocks = {}
        for slot, rank in enumerate(self.recovery_target):
            s, e = self.entity_spans_shuffled[slot]
            blocks[rank] = self.shuffled_tokens[s:e]
        out: list[str] = []
        cursor = 0
        for slot, (s, e) in enumerate(self.entity_spans_shuffled):
            out.extend(self.shuffled_tokens[cursor:s])
            out.extend(blocks[slot])
            cursor = e
        out.extend(self.shuffled_tokens[cursor:])
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "shuffled_tokens": list(self.shuffled_tokens),
            "entity_spans": [list(s) for s in self.entity_spans_original],
            "shuffled_spans": [list(s) for s in self.entity_spans_shuffled],
            "permutation": list(self.permutation),
            "recovery_target": list(self.recovery_target),
        }


def perturb_entities(example: PretrainExample, seed: int = 0) -> PerturbedExample:
    """Shuffle whole entity blocks; every other question token stays put
    relative to the entity slots, and the schema is not touched."""
    spans = identify_primary_entities(example)
    k = len(spans)
    perm = list(range(k))
    if k > 1:
        random.Random(seed).shuffle(perm)
    tokens = example.question.tokens
    out: list[str] = []
    shuffled_spans = []
    cursor = 0
    for slot, (s, e) in enumerate(spans):
        out.extend(tokens[cursor:s])
        src_s, src_e = spans[perm[slot]]
        start = len(out)
        out.extend(tokens[src_s:src_e])
        shuffled_spans.append((start, len(out)))
        cursor = e
    out.extend(tokens[cursor:])
    return PerturbedExample(tuple(out), tuple(spans), tuple(shuffled_spans), tuple(perm), tuple(perm))


def objective_record(
    example: PretrainExample,
    schema: Schema,
    mlm_ratio: float = DEFAULT_MLM_RATIO,
    value_prob: float = DEFAULT_VALUE_PROB,
    seed: int = 0,
) -> dict[str, Any]:
    """The ``mask_plan`` and ``epr`` objects stored alongside a record.

    ``epr`` is None for unlabeled examples, which have no primary entities.
    """
    plan = plan_objectives(example, schema, mlm_ratio, value_prob, seed)
    epr = None
    if example.dependencies is not None:
        epr = perturb_entities(example, derive_seed(derive_seed(seed, example.example_id), "epr")).to_dict()
    return {"mask_plan": plan.to_dict(), "epr": epr}
