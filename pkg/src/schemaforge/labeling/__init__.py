"""Schema-dependency labeling: mention extraction, fuzzy matching, typing."""

from schemaforge.labeling.labeler import (
    DEFAULT_TAU,
    LabelResult,
    Lexicon,
    classify_mention,
    default_lexicon,
    derive_dependencies,
    extract_mentions,
    label_question,
)
from schemaforge.labeling.matching import Match, best_match, ngram_match
from schemaforge.labeling.types import (
    DEPENDENCY_TYPES,
    LIMIT_HEAD,
    NUM_LABELS,
    DependencyEdge,
    DependencyGraph,
    DependencyType,
    MentionRecord,
    SpanKind,
)

__all__ = [
    "DEFAULT_TAU",
    "DEPENDENCY_TYPES",
    "LIMIT_HEAD",
    "NUM_LABELS",
    "DependencyEdge",
    "DependencyGraph",
    "DependencyType",
    "LabelResult",
    "Lexicon",
    "Match",
    "MentionRecord",
    "SpanKind",
    "best_match",
    "classify_mention",
    "default_lexicon",
    "derive_dependencies",
    "extract_mentions",
    "label_question",
    "ngram_match",
]
