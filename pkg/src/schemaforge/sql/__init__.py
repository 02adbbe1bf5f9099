"""SQL subset: syntax tree, parser, renderer, grammar sampler."""

from schemaforge.sql.ast import (
    Agg,
    Clause,
    Condition,
    Direction,
    GroupItem,
    Join,
    Op,
    OrderBy,
    SelectItem,
    SqlAst,
)
from schemaforge.sql.compose import compose_multitable
from schemaforge.sql.parser import parse_sql
from schemaforge.sql.render import render_sql
from schemaforge.sql.sampler import GrammarConfig, iter_samples, parse_clauses, sample_sql
from schemaforge.sql.templates import synthesize_question

__all__ = [
    "Agg",
    "Clause",
    "Condition",
    "Direction",
    "GrammarConfig",
    "GroupItem",
    "Join",
    "Op",
    "OrderBy",
    "SelectItem",
    "SqlAst",
    "compose_multitable",
    "iter_samples",
    "parse_clauses",
    "parse_sql",
    "render_sql",
    "sample_sql",
    "synthesize_question",
]
