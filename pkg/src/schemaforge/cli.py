"""``forge`` command line.

Exit status: 0 on success, 1 on a fatal config or IO error, 2 when the run
finished but rejected records (or produced an empty corpus).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path

from schemaforge.curriculum import CurriculumState, compute_difficulties
from schemaforge.errors import ConfigError, ForgeError
from schemaforge.labeling.labeler import DEFAULT_TAU
from schemaforge.objectives import DEFAULT_MLM_RATIO, DEFAULT_VALUE_PROB, objective_record
from schemaforge.pipeline import (
    PipelineConfig,
    Reject,
    example_record,
    ingest_pairs,
    ingest_schemas,
    label_corpus,
    report_stats,
    run_pipeline,
    sample_corpus,
    write_curriculum_csv,
    write_jsonl,
)
from schemaforge.sql import GrammarConfig, parse_clauses
from schemaforge.sql.ast import Clause

log = logging.getLogger("schemaforge")

EXIT_OK, EXIT_FATAL, EXIT_REJECTS = 0, 1, 2


def _schemas(path) -> dict:
    return {s.schema_id: s for s in ingest_schemas(path)}


def _report_rejects(rejects: Sequence[Reject], path: Path | None) -> None:
    if path is not None:
        write_jsonl(path, (r.to_dict() for r in rejects))
    for r in rejects:
        log.warning("line %d (%s) rejected: %s", r.line, r.example_id, r.reason)


def _status(n_records: int, rejects: Sequence[Reject]) -> int:
    if rejects or n_records == 0:
        return EXIT_REJECTS
    return EXIT_OK


def _load(args):
    schemas = _schemas(args.schemas)
    examples, rejects = ingest_pairs(args.corpus, schemas)
    _report_rejects(rejects, getattr(args, "rejects", None))
    return schemas, examples, rejects


def cmd_sample(args) -> int:
    schemas = ingest_schemas(args.schemas)
    clauses = parse_clauses(args.clauses) | {Clause.SELECT} if args.clauses else GrammarConfig().clauses
    grammar = GrammarConfig(max_joins=args.max_joins, clauses=frozenset(clauses))
    examples = sample_corpus(schemas, grammar, args.count, args.seed)
    keep = ("example_id", "schema_id", "sql", "question", "provenance", "question_source")
    write_jsonl(args.out, ({k: rec[k] for k in keep} for rec in map(example_record, examples)))
    return _status(len(examples), [])


def cmd_label(args) -> int:
    schemas = _schemas(args.schemas)
    examples, rejects = ingest_pairs(args.pairs, schemas)
    _report_rejects(rejects, args.rejects)
    labeled = label_corpus(examples, schemas, args.tau)
    write_jsonl(args.out, map(example_record, labeled))
    return _status(len(labeled), rejects)


def cmd_objectives(args) -> int:
    schemas, examples, rejects = _load(args)
    rows = []
    for ex in examples:
        rec = example_record(ex)
        rec.update(objective_record(ex, schemas[ex.schema_id], args.mlm_ratio, args.value_prob, args.seed))
        rows.append(rec)
    write_jsonl(args.out, rows)
    return _status(len(rows), rejects)


def cmd_curriculum(args) -> int:
    if args.schemas is not None:
        schemas, examples, rejects = _load(args)
        ids = [ex.example_id for ex in examples]
        diffs = [ex.difficulty for ex in examples]
        if any(d is None for d in diffs):
            diffs = compute_difficulties(examples, schemas)
    else:
        rejects = []
        ids, diffs = [], []
        with open(args.corpus, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                rec = json.loads(line)
                if rec.get("difficulty") is None:
                    raise ConfigError(f"{args.corpus}:{lineno}: no difficulty field; pass --schemas to compute it")
                ids.append(str(rec["example_id"]))
                diffs.append(float(rec["difficulty"]))
    if not ids:
        log.warning("empty corpus, no trace written")
        return EXIT_REJECTS
    state = CurriculumState(tuple(diffs), args.steps)
    write_curriculum_csv(args.trace, state, ids, args.batch_size, args.seed)
    return _status(len(ids), rejects)


def cmd_train_demo(args) -> int:
    from schemaforge.sdp.train import TRACE_COLUMNS, train_demo

    schemas, examples, rejects = _load(args)
    examples = examples[: args.examples]
    if not examples:
        log.error("no usable examples in %s", args.corpus)
        return EXIT_REJECTS
    if any(ex.dependencies is None for ex in examples):
        examples = label_corpus(examples, schemas, DEFAULT_TAU)
    result = train_demo(examples, schemas, steps=args.steps, lr=args.lr, seed=args.seed)
    if args.trace is not None:
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for row in result.trace:
                w.writerow([getattr(row, c) if c == "step" else repr(getattr(row, c)) for c in TRACE_COLUMNS])
    last = result.trace[-1]
    print(f"examples={len(examples)} steps={args.steps} joint={last.joint:.6f} edge_f1={result.final_f1:.4f}")
    return _status(len(examples), rejects)


def cmd_stats(args) -> int:
    _, examples, rejects = _load(args)
    stats = report_stats(examples, rejected=len(rejects))
    print(json.dumps(stats.to_dict(), sort_keys=True, indent=2))
    return _status(len(examples), rejects)


def cmd_run(args) -> int:
    config = PipelineConfig.from_file(args.config)
    stats = run_pipeline(config)
    print(f"wrote {stats.example_count} records to {config.output_dir} ({stats.rejected} rejected)")
    return EXIT_REJECTS if stats.rejected or stats.example_count == 0 else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forge", description="Build schema-linking pre-training corpora.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample SQL from schemas with template questions")
    p.add_argument("--schemas", required=True, type=Path)
    p.add_argument("--count", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--max-joins", type=int, default=2)
    p.add_argument("--clauses", default=None, help="comma list, e.g. select,where,order_by")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("label", help="derive schema dependencies for question/SQL pairs")
    p.add_argument("--pairs", required=True, type=Path)
    p.add_argument("--schemas", required=True, type=Path)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--rejects", type=Path, default=None)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("objectives", help="attach MLM mask plans and EPR perturbations")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--schemas", required=True, type=Path)
    p.add_argument("--mlm-ratio", type=float, default=DEFAULT_MLM_RATIO)
    p.add_argument("--value-prob", type=float, default=DEFAULT_VALUE_PROB)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_objectives)

    p = sub.add_parser("curriculum", help="write the per-step competence and batch trace")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--schemas", type=Path, default=None)
    p.add_argument("--steps", required=True, type=int)
    p.add_argument("--batch-size", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--trace", required=True, type=Path)
    p.set_defaults(func=cmd_curriculum)

    p = sub.add_parser("train-demo", help="fit the toy biaffine head on a small slice")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--schemas", required=True, type=Path)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--lr", type=float, default=0.3)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--examples", type=int, default=8, help="use the first N examples (max 64)")
    p.add_argument("--trace", type=Path, default=None)
    p.set_defaults(func=cmd_train_demo)

    p = sub.add_parser("stats", help="print corpus statistics as JSON")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--schemas", required=True, type=Path)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("run", help="run the full pipeline from a JSON config")
    p.add_argument("--config", required=True, type=Path)
    p.set_defaults(func=cmd_run)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("FORGE_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ForgeError, OSError, json.JSONDecodeError) as exc:
        print(f"forge {args.command}: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
