import json

import pytest

from schemaforge.errors import ConfigError, SchemaError
from schemaforge.pipeline import (
    PipelineConfig,
    ingest_pairs,
    ingest_schemas,
    label_corpus,
    report_stats,
    run_pipeline,
    sample_corpus,
)
from schemaforge.sql import GrammarConfig

WORKED = {
    "example_id": "w1",
    "schema_id": "students",
    "question": "show height of the student who is the highest in the class",
    "sql": "SELECT MAX(height) FROM student",
}


def dump(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return path


def jsonl(path, rows):
    path.write_text("".join(r if isinstance(r, str) else json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


@pytest.fixture
def schema_dir(tmp_path, student_schema, school):
    d = tmp_path / "schemas"
    d.mkdir()
    dump(d / "a.json", student_schema.to_dict())
    dump(d / "b.json", [school.to_dict()])
    return d


class TestIngest:
    def test_directory(self, schema_dir):
        assert [s.schema_id for s in ingest_schemas(schema_dir)] == ["students", "school"]

    def test_duplicate_names_both_files(self, schema_dir, student_schema):
        dump(schema_dir / "c.json", student_schema.to_dict())
        with pytest.raises(SchemaError, match=r"a\.json.*c\.json"):
            ingest_schemas(schema_dir)

    def test_bad_value_type(self, tmp_path, student_schema):
        d = student_schema.to_dict()
        d["tables"][0]["columns"][1]["values"] = ["tall"]
        with pytest.raises(SchemaError):
            ingest_schemas(dump(tmp_path / "x.json", d))

    def test_malformed_json_reports_position(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{\n  "schema_id": oops\n}', encoding="utf-8")
        with pytest.raises(ConfigError, match=r"bad\.json:2:"):
            ingest_schemas(bad)

    def test_rejects(self, tmp_path, schemas):
        rows = [
            WORKED,
            dict(WORKED, example_id="w2", sql="SELECT weight FROM student"),
            dict(WORKED, example_id="w3", schema_id="nowhere"),
            dict(WORKED),
            "{not json\n",
            {"example_id": "w5"},
            dict(WORKED, example_id="w6", question="   "),
        ]
        examples, rejects = ingest_pairs(jsonl(tmp_path / "p.jsonl", rows), schemas)
        assert [e.example_id for e in examples] == ["w1"]
        assert [(r.line, r.reason) for r in rejects] == [
            (2, "unknown column"),
            (3, "unknown schema_id"),
            (4, "duplicate example_id"),
            (5, "malformed json"),
            (6, "missing field"),
            (7, "invalid record"),
        ]
        assert len(examples) + len(rejects) == len(rows)


class TestStats:
    def test_worked_example(self, tmp_path, schemas):
        examples, _ = ingest_pairs(jsonl(tmp_path / "p.jsonl", [WORKED]), schemas)
        stats = report_stats(label_corpus(examples, schemas, 0.3))
        assert stats.histogram["SELECT-Agg"] >= 1
        assert stats.clause_coverage["SELECT"] == 1
        assert stats.mentions >= 1 and stats.unmatched_rate == 0.0

    def test_empty(self):
        stats = report_stats([])
        assert stats.example_count == 0 and stats.edge_count == 0
        assert stats.difficulty == {"min": 0.0, "median": 0.0, "max": 0.0}
        assert len(stats.histogram) == 17

    def test_sampled_histogram_matches_edges(self, school):
        corpus = label_corpus(sample_corpus([school], GrammarConfig(), 200, 5), {"school": school}, 0.3)
        stats = report_stats(corpus)
        assert stats.example_count == 200
        assert stats.edge_count == sum(len(ex.dependencies) for ex in corpus) > 0
        assert stats.provenance == {"sampled": 200}


def config(tmp_path, schema_dir, **extra):
    data = {"schemas": str(schema_dir), "output_dir": "out", "seed": 7, "sample_count": 100}
    data.update(extra)
    return PipelineConfig.from_dict(data, tmp_path)


class TestRun:
    def test_sampling_only(self, tmp_path, schema_dir):
        stats = run_pipeline(config(tmp_path, schema_dir))
        assert stats.example_count == 100 and stats.rejected == 0
        rows = [json.loads(line) for line in (tmp_path / "out" / "corpus-00000.jsonl").read_text().splitlines()]
        assert len(rows) == 100
        assert all("dependencies" in r and 0.0 <= r["difficulty"] <= 1.0 and "mask_plan" in r for r in rows)
        assert (tmp_path / "out" / "curriculum.csv").read_text().startswith("t,competence,pool_size,sampled_ids\n")
        assert json.loads((tmp_path / "out" / "stats.json").read_text())["example_count"] == 100

    def test_deterministic(self, tmp_path, schema_dir):
        pairs = jsonl(tmp_path / "p.jsonl", [WORKED])
        outputs = []
        for run in ("a", "b"):
            run_pipeline(config(tmp_path, schema_dir, output_dir=run, pairs=str(pairs), shard_size=40))
            outputs.append({p.name: p.read_bytes() for p in sorted((tmp_path / run).glob("*.*"))})
        assert sorted(outputs[0]) == ["corpus-00000.jsonl", "corpus-00001.jsonl", "corpus-00002.jsonl", "curriculum.csv", "rejects.jsonl", "stats.json"]
        assert outputs[0] == outputs[1]

    def test_seed_changes_output(self, tmp_path, schema_dir):
        run_pipeline(config(tmp_path, schema_dir, output_dir="a"))
        run_pipeline(config(tmp_path, schema_dir, output_dir="b", seed=8))
        assert (tmp_path / "a" / "corpus-00000.jsonl").read_bytes() != (tmp_path / "b" / "corpus-00000.jsonl").read_bytes()

    def test_label_off(self, tmp_path, schema_dir):
        stats = run_pipeline(config(tmp_path, schema_dir, stages=["compose", "sample"], sample_count=10))
        rows = [json.loads(line) for line in (tmp_path / "out" / "corpus-00000.jsonl").read_text().splitlines()]
        assert rows and all("dependencies" not in r for r in rows)
        assert stats.edge_count == 0
        assert not (tmp_path / "out" / "curriculum.csv").exists()

    def test_empty_corpus(self, tmp_path, schema_dir):
        stats = run_pipeline(config(tmp_path, schema_dir, sample_count=0))
        assert stats.example_count == 0
        assert (tmp_path / "out" / "corpus-00000.jsonl").read_text() == ""


class TestConfig:
    def test_missing_seed(self, tmp_path, schema_dir):
        with pytest.raises(ConfigError, match="seed"):
            PipelineConfig.from_dict({"schemas": str(schema_dir), "output_dir": "o"}, tmp_path)

    def test_unknown_keys(self, tmp_path, schema_dir):
        with pytest.raises(ConfigError, match="unknown config keys"):
            config(tmp_path, schema_dir, colour="blue")
        with pytest.raises(ConfigError, match="grammar"):
            config(tmp_path, schema_dir, grammar={"seed": 3})

    def test_bad_values(self, tmp_path, schema_dir):
        for extra in ({"tau": 2.0}, {"stages": ["bake"]}, {"seed": "7"}, {"sample_count": -1}, {"schemas": "missing"}):
            with pytest.raises(ConfigError):
                config(tmp_path, schema_dir, **extra)

    def test_grammar_clauses(self, tmp_path, schema_dir):
        cfg = config(tmp_path, schema_dir, grammar={"clauses": "where,limit", "max_joins": 0})
        assert {c.value for c in cfg.grammar.clauses} == {"SELECT", "WHERE", "LIMIT"}
