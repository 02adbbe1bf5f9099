"""Sampled, template-questioned and labeled examples for a schema."""

from __future__ import annotations

import json
import random
from importlib import resources

from schemaforge.example import PretrainExample, derive_seed
from schemaforge.labeling import derive_dependencies
from schemaforge.schema import Schema
from schemaforge.sql import GrammarConfig, sample_sql, synthesize_question
from schemaforge.text import Question

SAMPLED = "sampled"


def demo_schema() -> Schema:
    """The two-table school schema bundled with the package."""
    text = resources.files("schemaforge").joinpath("data/demo_schema.json").read_text(encoding="utf-8")
    return Schema.from_dict(json.loads(text))


def synthesize_examples(
    schema: Schema, config: GrammarConfig, count: int, tau: float = 0.3, label: bool = True
) -> list[PretrainExample]:
    rng = random.Random(derive_seed(config.seed, schema.schema_id))
    out = []
    for i in range(count):
        ast = sample_sql(schema, config, rng)
        question = Question.from_text(synthesize_question(ast, schema))
        deps = derive_dependencies(question, ast, schema, tau) if label else None
        out.append(PretrainExample(f"{schema.schema_id}-s{i:06d}", schema.schema_id, question, ast, deps, provenance=SAMPLED))
    return out
