"""End-to-end corpus construction: schemas and pairs in, JSONL shards out."""

from __future__ import annotations

import csv
import json
import logging
import statistics
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

from schemaforge.curriculum import CurriculumState, compute_difficulties, curriculum_trace
from schemaforge.errors import ConfigError, ForgeError, SchemaError, SqlError, StageError
from schemaforge.example import PretrainExample, derive_seed
from schemaforge.labeling import extract_mentions, label_question
from schemaforge.labeling.types import DEPENDENCY_TYPES
from schemaforge.objectives import DEFAULT_MLM_RATIO, DEFAULT_VALUE_PROB, objective_record
from schemaforge.schema import Schema
from schemaforge.sql import Clause, GrammarConfig, compose_multitable, parse_clauses
from schemaforge.synth import synthesize_examples

log = logging.getLogger(__name__)

STAGES = ("compose", "sample", "ingest", "label", "difficulty", "objectives")
SHARD_SIZE = 50_000
REQUIRED_PAIR_FIELDS = ("example_id", "schema_id", "question", "sql")


def _load_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON ({exc.msg})") from exc


def dumps(obj: Any) -> str:
    """The one JSON encoding used for every emitted line."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def ingest_schemas(path: str | Path) -> list[Schema]:
    """Read every ``*.json`` file in a directory (or one file), in name order.

    A file holds one schema object or a list of them.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.json"))
    elif path.is_file():
        files = [path]
    else:
        raise ConfigError(f"schema path {path} does not exist")
    out: list[Schema] = []
    origin: dict[str, Path] = {}
    for f in files:
        data = _load_json(f)
        for obj in data if isinstance(data, list) else [data]:
            try:
                schema = Schema.from_dict(obj)
            except SchemaError as exc:
                raise SchemaError(f"{f}: {exc}") from exc
            if schema.schema_id in origin:
                raise SchemaError(f"duplicate schema_id {schema.schema_id!r} in {origin[schema.schema_id]} and {f}")
            origin[schema.schema_id] = f
            out.append(schema)
    return out


@dataclass(frozen=True)
class Reject:
    line: int
    example_id: str | None
    reason: str
    detail: str

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _records(path: Path) -> Iterator[tuple[int, str]]:
    try:
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if line.strip():
                    yield lineno, line
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc


def ingest_pairs(
    path: str | Path, schemas: Mapping[str, Schema] | Sequence[Schema]
) -> tuple[list[PretrainExample], list[Reject]]:
    """Bind question/SQL pairs to their schemas.

    Bad rows become :class:`Reject` entries instead of errors. Optional
    ``dependencies``, ``difficulty`` and ``provenance`` fields are kept, so a
    corpus written by this package can be read back the same way.
    """
    if not isinstance(schemas, Mapping):
        schemas = {s.schema_id: s for s in schemas}
    examples: list[PretrainExample] = []
    rejects: list[Reject] = []
    seen: set[str] = set()
    for lineno, line in _records(Path(path)):
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            rejects.append(Reject(lineno, None, "malformed json", exc.msg))
            continue
        if not isinstance(rec, dict) or any(k not in rec for k in REQUIRED_PAIR_FIELDS):
            rejects.append(Reject(lineno, None, "missing field", f"need {', '.join(REQUIRED_PAIR_FIELDS)}"))
            continue
        ex_id = str(rec["example_id"])
        if ex_id in seen:
            rejects.append(Reject(lineno, ex_id, "duplicate example_id", ex_id))
            continue
        schema = schemas.get(str(rec["schema_id"]))
        if schema is None:
            rejects.append(Reject(lineno, ex_id, "unknown schema_id", str(rec["schema_id"])))
            continue
        try:
            ex = PretrainExample.from_record(rec, schema)
            if not ex.question.tokens:
                raise ForgeError("question has no tokens")
            ex.validate(schema)
        except SqlError as exc:
            rejects.append(Reject(lineno, ex_id, exc.reason, str(exc)))
            continue
        except (ForgeError, KeyError, TypeError, ValueError) as exc:
            rejects.append(Reject(lineno, ex_id, "invalid record", str(exc)))
            continue
        seen.add(ex_id)
        examples.append(ex)
    return examples, rejects


@dataclass
class CorpusStats:
    example_count: int = 0
    histogram: dict[str, int] = field(default_factory=lambda: {t.value: 0 for t in DEPENDENCY_TYPES})
    difficulty: dict[str, float] = field(default_factory=lambda: {"min": 0.0, "median": 0.0, "max": 0.0})
    clause_coverage: dict[str, int] = field(default_factory=lambda: {c.value: 0 for c in Clause})
    provenance: dict[str, int] = field(default_factory=dict)
    mentions: int = 0
    unmatched_mentions: int = 0
    rejected: int = 0

    @property
    def unmatched_rate(self) -> float:
        return self.unmatched_mentions / self.mentions if self.mentions else 0.0

    @property
    def edge_count(self) -> int:
        return sum(self.histogram.values())

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["unmatched_rate"] = self.unmatched_rate
        out["edge_count"] = self.edge_count
        return out


def report_stats(corpus: Iterable[PretrainExample], rejected: int = 0) -> CorpusStats:
    """Histogram, difficulty spread, clause coverage and linking misses.

    A mention is one (head, clause) pair the query uses; it is unmatched when
    no edge on that head carries a label of that clause. Unlabeled examples
    add nothing to the histogram or the mention counts.
    """
    stats = CorpusStats(rejected=rejected)
    difficulties = []
    provenance: Counter[str] = Counter()
    for ex in corpus:
        stats.example_count += 1
        provenance[ex.provenance] += 1
        for clause in ex.sql.clauses():
            stats.clause_coverage[clause.value] += 1
        if ex.difficulty is not None:
            difficulties.append(ex.difficulty)
        if ex.dependencies is None:
            continue
        covered = set()
        for edge in ex.dependencies:
            stats.histogram[edge.label.value] += 1
            covered.add((edge.head, edge.label.clause))
        wanted = {(m.head, m.clause) for m in extract_mentions(ex.sql)}
        stats.mentions += len(wanted)
        stats.unmatched_mentions += len(wanted - covered)
    if difficulties:
        stats.difficulty = {
            "min": min(difficulties),
            "median": float(statistics.median(difficulties)),
            "max": max(difficulties),
        }
    stats.provenance = dict(sorted(provenance.items()))
    return stats


_GRAMMAR_KEYS = {"max_select_items", "max_conditions", "max_joins", "subquery_probability", "clause_probability", "clauses", "force_numeric_agg"}
_CONFIG_KEYS = {
    "schemas", "pairs", "output_dir", "seed", "stages", "sample_count", "grammar",
    "tau", "mlm_ratio", "value_prob", "curriculum", "shard_size",
}


@dataclass(frozen=True)
class PipelineConfig:
    schemas: Path
    output_dir: Path
    seed: int
    pairs: Path | None = None
    stages: frozenset[str] = frozenset(STAGES)
    sample_count: int = 0
    grammar: GrammarConfig = GrammarConfig()
    tau: float = 0.3
    mlm_ratio: float = DEFAULT_MLM_RATIO
    value_prob: float = DEFAULT_VALUE_PROB
    curriculum_steps: int = 1000
    batch_size: int = 32
    shard_size: int = SHARD_SIZE

    def validate(self) -> None:
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("seed must be an integer")
        unknown = self.stages - set(STAGES)
        if unknown:
            raise ConfigError(f"unknown stages: {', '.join(sorted(unknown))}")
        if not self.schemas.exists():
            raise ConfigError(f"schema path {self.schemas} does not exist")
        if "ingest" in self.stages and self.pairs is not None and not self.pairs.is_file():
            raise ConfigError(f"pairs file {self.pairs} does not exist")
        if self.sample_count < 0 or self.curriculum_steps < 1 or self.batch_size < 1 or self.shard_size < 1:
            raise ConfigError("sample_count must be >= 0; curriculum steps, batch_size and shard_size >= 1")
        for name in ("tau", "mlm_ratio", "value_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base_dir: str | Path = ".") -> PipelineConfig:
        """Build from the JSON config layout; relative paths resolve against ``base_dir``."""
        if not isinstance(data, Mapping):
            raise ConfigError("config must be a JSON object")
        extra = set(data) - _CONFIG_KEYS
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
        for key in ("schemas", "output_dir", "seed"):
            if key not in data:
                raise ConfigError(f"config is missing required key {key!r}")
        base = Path(base_dir)
        grammar_data = dict(data.get("grammar", {}))
        bad = set(grammar_data) - _GRAMMAR_KEYS
        if bad:
            raise ConfigError(f"unknown grammar keys: {', '.join(sorted(bad))} (the seed is set at top level)")
        if "clauses" in grammar_data:
            try:
                grammar_data["clauses"] = parse_clauses(grammar_data["clauses"]) | {Clause.SELECT}
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        curriculum = data.get("curriculum", {})
        try:
            cfg = cls(
                schemas=base / data["schemas"],
                output_dir=base / data["output_dir"],
                seed=data["seed"],
                pairs=None if data.get("pairs") is None else base / data["pairs"],
                stages=frozenset(data.get("stages", STAGES)),
                sample_count=int(data.get("sample_count", 0)),
                grammar=GrammarConfig(**grammar_data),
                tau=float(data.get("tau", 0.3)),
                mlm_ratio=float(data.get("mlm_ratio", DEFAULT_MLM_RATIO)),
                value_prob=float(data.get("value_prob", DEFAULT_VALUE_PROB)),
                curriculum_steps=int(curriculum.get("steps", 1000)),
                batch_size=int(curriculum.get("batch_size", 32)),
                shard_size=int(data.get("shard_size", SHARD_SIZE)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid config value: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> PipelineConfig:
        path = Path(path)
        return cls.from_dict(_load_json(path), path.parent)


def _split(count: int, parts: int) -> list[int]:
    return [count // parts + (1 if k < count % parts else 0) for k in range(parts)]


def _generation_schemas(schemas: list[Schema], compose: bool) -> list[Schema]:
    if not compose:
        return schemas
    singles = [s for s in schemas if len(s.tables) == 1]
    return compose_multitable(singles) + [s for s in schemas if len(s.tables) > 1]


def sample_corpus(schemas: Sequence[Schema], grammar: GrammarConfig, count: int, seed: int) -> list[PretrainExample]:
    """``count`` sampled examples spread round-robin over ``schemas``."""
    grammar = replace(grammar, seed=derive_seed(seed, "sample"))
    out = []
    for schema, n in zip(schemas, _split(count, len(schemas)) if schemas else []):
        try:
            out.extend(synthesize_examples(schema, grammar, n, label=False))
        except ForgeError as exc:
            raise StageError("sample", schema.schema_id, exc) from exc
    return out


def label_corpus(examples: Iterable[PretrainExample], schemas: Mapping[str, Schema], tau: float) -> list[PretrainExample]:
    out = []
    for ex in examples:
        try:
            graph = label_question(ex.question, ex.sql, schemas[ex.schema_id], tau).graph
        except ForgeError as exc:
            raise StageError("label", ex.example_id, exc) from exc
        out.append(ex.with_(dependencies=graph))
    return out


def write_jsonl(path: Path, rows: Iterable[Mapping[str, Any]]) -> int:
    n = 0
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(dumps(row) + "\n")
            n += 1
    return n


def write_curriculum_csv(path: Path, state: CurriculumState, ids: Sequence[str], batch_size: int, seed: int) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "competence", "pool_size", "sampled_ids"])
        for t, c, pool, batch in curriculum_trace(state, batch_size, seed):
            w.writerow([t, repr(c), pool, " ".join(ids[i] for i in batch)])


def example_record(ex: PretrainExample) -> dict[str, Any]:
    rec = ex.to_record()
    if ex.provenance == "sampled":
        rec["question_source"] = "template"
    return rec


def run_pipeline(config: PipelineConfig) -> CorpusStats:
    """Run the enabled stages and write the corpus under ``config.output_dir``.

    Outputs: ``corpus-NNNNN.jsonl`` shards, ``rejects.jsonl``,
    ``stats.json``, ``schemas/<schema_id>.json`` and, when difficulties are
    computed, ``curriculum.csv``. Every random choice derives from
    ``config.seed``, so reruns are byte-identical.
    """
    config.validate()
    stages = config.stages
    schemas = ingest_schemas(config.schemas)
    gen_schemas = _generation_schemas(schemas, "compose" in stages)
    known = {s.schema_id: s for s in schemas}
    known.update((s.schema_id, s) for s in gen_schemas)

    examples: list[PretrainExample] = []
    rejects: list[Reject] = []
    if "sample" in stages and config.sample_count:
        examples.extend(sample_corpus(gen_schemas, config.grammar, config.sample_count, config.seed))
        log.info("sampled %d examples over %d schemas", len(examples), len(gen_schemas))
    if "ingest" in stages and config.pairs is not None:
        ingested, rejects = ingest_pairs(config.pairs, {s.schema_id: s for s in schemas})
        ids = {ex.example_id for ex in examples}
        for ex in ingested:
            if ex.example_id in ids:
                rejects.append(Reject(0, ex.example_id, "duplicate example_id", "collides with a sampled id"))
            else:
                examples.append(ex)
        log.info("ingested %d pairs, %d rejected", len(examples), len(rejects))

    if "label" in stages:
        examples = label_corpus(examples, known, config.tau)
    if "difficulty" in stages and examples:
        try:
            diffs = compute_difficulties(examples, known)
        except ForgeError as exc:
            raise StageError("difficulty", None, exc) from exc
        examples = [ex.with_(difficulty=d) for ex, d in zip(examples, diffs)]

    records = []
    obj_seed = derive_seed(config.seed, "objectives")
    for ex in examples:
        rec = example_record(ex)
        if "objectives" in stages:
            try:
                rec.update(objective_record(ex, known[ex.schema_id], config.mlm_ratio, config.value_prob, obj_seed))
            except ForgeError as exc:
                raise StageError("objectives", ex.example_id, exc) from exc
        records.append(rec)

    out = config.output_dir
    (out / "schemas").mkdir(parents=True, exist_ok=True)
    for old in out.glob("corpus-*.jsonl"):
        old.unlink()
    n_shards = max(1, -(-len(records) // config.shard_size))
    for k in range(n_shards):
        write_jsonl(out / f"corpus-{k:05d}.jsonl", records[k * config.shard_size : (k + 1) * config.shard_size])
    write_jsonl(out / "rejects.jsonl", (r.to_dict() for r in rejects))
    used = {ex.schema_id for ex in examples} | {s.schema_id for s in schemas}
    for schema_id in sorted(used):
        (out / "schemas" / f"{schema_id}.json").write_text(dumps(known[schema_id].to_dict()) + "\n", encoding="utf-8")
    if "difficulty" in stages and examples:
        state = CurriculumState(tuple(ex.difficulty for ex in examples), config.curriculum_steps)
        write_curriculum_csv(
            out / "curriculum.csv", state, [ex.example_id for ex in examples], config.batch_size, derive_seed(config.seed, "curriculum")
        )
    stats = report_stats(examples, rejected=len(rejects))
    (out / "stats.json").write_text(json.dumps(stats.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return stats
