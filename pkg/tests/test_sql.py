import random
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from schemaforge.errors import (
    NestingError,
    SqlSyntaxError,
    TypeMismatchError,
    UnknownColumnError,
    UnknownTableError,
    UnsatisfiableConfigError,
    UnsupportedSqlError,
)
from schemaforge.schema import Column, ColumnRef, Schema, Table
from schemaforge.sql import (
    Agg,
    Clause,
    Condition,
    Direction,
    GrammarConfig,
    Op,
    OrderBy,
    SelectItem,
    SqlAst,
    iter_samples,
    parse_clauses,
    parse_sql,
    render_sql,
    sample_sql,
    synthesize_question,
)
from schemaforge.sql.templates import literal_text
from schemaforge.sql.ast import NUMERIC_AGGS

HEIGHT = ColumnRef("student", "height")


class TestParse:
    def test_worked_example(self, student_schema):
        ast = parse_sql("SELECT MAX(height) FROM student", student_schema)
        assert ast.select == (SelectItem(Agg.MAX, HEIGHT),)
        assert ast.from_tables == ("student",)

    def test_star_and_limit(self, student_schema):
        ast = parse_sql("SELECT * FROM student LIMIT 1", student_schema)
        assert ast.select == (SelectItem(Agg.NONE, None),)
        assert ast.limit == 1

    def test_unknown_column(self, student_schema):
        with pytest.raises(UnknownColumnError) as exc:
            parse_sql("SELECT h FROM student", student_schema)
        assert exc.value.reason == "unknown column"

    def test_unknown_table(self, student_schema):
        with pytest.raises(UnknownTableError):
            parse_sql("SELECT name FROM teacher", student_schema)

    def test_syntax_error_reports_position(self, student_schema):
        with pytest.raises(SqlSyntaxError) as exc:
            parse_sql("SELECT name FROM student WHERE", student_schema)
        assert exc.value.position is not None

    def test_keywords_case_insensitive(self, student_schema):
        a = parse_sql("select max(height) from student where age > 10", student_schema)
        b = parse_sql("SELECT MAX(height) FROM student WHERE age > 10", student_schema)
        assert a == b

    def test_type_mismatch(self, student_schema):
        with pytest.raises(TypeMismatchError):
            parse_sql("SELECT name FROM student WHERE age = 'old'", student_schema)
        with pytest.raises(TypeMismatchError):
            parse_sql("SELECT name FROM student WHERE name > 3", student_schema)

    def test_numeric_agg_on_text_is_accepted(self, student_schema):
        # real corpora contain such queries; only the sampler avoids them
        assert parse_sql("SELECT SUM(name) FROM student", student_schema).select[0].agg is Agg.SUM

    def test_between_and_subquery(self, student_schema):
        ast = parse_sql(
            "SELECT name FROM student WHERE age BETWEEN 9 AND 11 AND height IN (SELECT height FROM student WHERE age > 10)",
            student_schema,
        )
        assert ast.where[0].op is Op.BETWEEN and ast.where[0].value == (9, 11)
        assert isinstance(ast.where[1].value, SqlAst)
        assert ast.depth() == 2

    def test_nesting_capped(self, student_schema):
        sql = "SELECT name FROM student WHERE age IN (SELECT age FROM student WHERE age IN (SELECT age FROM student))"
        with pytest.raises(NestingError):
            parse_sql(sql, student_schema)

    def test_decimal_literal(self, student_schema):
        ast = parse_sql("SELECT name FROM student WHERE height > 172.5", student_schema)
        assert ast.where[0].value == Decimal("172.5")

    @pytest.mark.parametrize(
        "sql",
        [
            "SELECT DISTINCT name FROM student",
            "SELECT name FROM student WHERE age > 1 OR age < 3",
            "SELECT name FROM student UNION SELECT name FROM student",
        ],
    )
    def test_unsupported(self, student_schema, sql):
        with pytest.raises(UnsupportedSqlError):
            parse_sql(sql, student_schema)

    def test_having_needs_group_by(self, student_schema):
        with pytest.raises(Exception):
            parse_sql("SELECT name FROM student HAVING COUNT(*) > 1", student_schema)

    def test_join_on_foreign_key(self, school):
        ast = parse_sql("SELECT T1.name FROM student AS T1 JOIN class AS T2 ON T1.class_id = T2.class_id", school)
        assert ast.joins[0].table == "class"
        assert ast.select[0].column == ColumnRef("student", "name")

    def test_ambiguous_unqualified_column(self, school):
        with pytest.raises(Exception) as exc:
            parse_sql("SELECT class_id FROM student JOIN class ON student.class_id = class.class_id", school)
        assert exc.value.reason == "ambiguous column"


class TestRender:
    def test_canonical_form(self, student_schema):
        ast = parse_sql("select max(height) from student", student_schema)
        assert render_sql(ast) == "SELECT MAX(student.height) FROM student"

    def test_between(self):
        ast = SqlAst((SelectItem(Agg.NONE, HEIGHT),), ("student",), where=(Condition(ColumnRef("student", "age"), Op.BETWEEN, (1, 2)),))
        assert render_sql(ast).endswith("WHERE student.age BETWEEN 1 AND 2")

    def test_empty_where_has_no_keyword(self):
        assert "WHERE" not in render_sql(SqlAst((SelectItem(Agg.NONE, HEIGHT),), ("student",)))

    def test_string_escaping_round_trip(self, student_schema):
        ast = SqlAst(
            (SelectItem(Agg.NONE, ColumnRef("student", "name")),),
            ("student",),
            where=(Condition(ColumnRef("student", "name"), Op.EQ, "o'brien"),),
        )
        assert parse_sql(render_sql(ast), student_schema) == ast

    def test_reserved_identifier_quoted(self):
        schema = Schema("r", (Table("order", (Column("select"), Column("x y"))),))
        ast = parse_sql("SELECT `select`, `x y` FROM `order`", schema)
        assert parse_sql(render_sql(ast), schema) == ast


class TestSampler:
    def test_deterministic(self, school):
        cfg = GrammarConfig(seed=5)
        a = [render_sql(x) for _, x in zip(range(50), iter_samples(school, cfg))]
        b = [render_sql(x) for _, x in zip(range(50), iter_samples(school, cfg))]
        assert a == b
        assert sample_sql(school, cfg) == sample_sql(school, cfg)

    def test_select_where_only(self, school):
        cfg = GrammarConfig(clauses=frozenset({Clause.SELECT, Clause.WHERE}), clause_probability=1.0, seed=3)
        for ast in zip(range(300), iter_samples(school, cfg)):
            assert ast[1].clauses() == {Clause.SELECT, Clause.WHERE}

    def test_restricted_clause_set_is_respected(self, school):
        cfg = GrammarConfig(clauses=frozenset({Clause.SELECT, Clause.WHERE}), seed=4)
        for _, ast in zip(range(300), iter_samples(school, cfg)):
            assert ast.clauses() <= {Clause.SELECT, Clause.WHERE}

    def test_no_joins(self, school):
        cfg = GrammarConfig(max_joins=0, seed=1)
        assert all(not a.joins for _, a in zip(range(500), iter_samples(school, cfg)))

    def test_unsatisfiable(self):
        text_only = Schema("t", (Table("t", (Column("a"), Column("b"))),))
        with pytest.raises(UnsatisfiableConfigError):
            sample_sql(text_only, GrammarConfig(force_numeric_agg=True))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            GrammarConfig(max_select_items=0)
        with pytest.raises(ValueError):
            GrammarConfig(subquery_probability=1.5)
        with pytest.raises(ValueError):
            GrammarConfig(clauses=frozenset({Clause.WHERE}))

    def test_parse_clauses(self):
        assert parse_clauses("select, where,order_by") == {Clause.SELECT, Clause.WHERE, Clause.ORDER_BY}
        assert parse_clauses(["GROUP BY"]) == {Clause.SELECT, Clause.GROUP_BY}
        with pytest.raises(ValueError):
            parse_clauses("select,window")

    @given(st.integers(0, 2**32))
    def test_sound_and_round_trips(self, seed):
        schema = _random_schema(seed)
        ast = sample_sql(schema, GrammarConfig(seed=seed))
        assert parse_sql(render_sql(ast), schema) == ast
        known = set(schema.column_refs)
        for ref in ast.column_refs():
            assert ref in known
        for node in _walk(ast):
            for agg, ref in _aggregated(node):
                if agg in NUMERIC_AGGS:
                    assert schema.column(ref).data_type == "number"


def _random_schema(seed: int) -> Schema:
    rng = random.Random(seed)
    tables = []
    for t in range(rng.randint(1, 3)):
        cols = [Column("id", "number", ("1", "2"))]
        for c in range(rng.randint(1, 4)):
            if rng.random() < 0.5:
                cols.append(Column(f"n{t}_{c}", "number", tuple(str(rng.randint(0, 99)) for _ in range(rng.randint(0, 3)))))
            else:
                cols.append(Column(f"s{t}_{c}", "text", tuple(rng.choice(["red", "blue", "x y"]) for _ in range(rng.randint(0, 3)))))
        tables.append(Table(f"t{t}", tuple(cols)))
    return Schema(f"r{seed}", tuple(tables))


def _walk(ast):
    yield ast
    for sub in ast.subqueries():
        yield from _walk(sub)


def _aggregated(ast):
    for item in ast.select:
        if item.column is not None:
            yield item.agg, item.column
    for g in ast.group_by:
        yield g.agg, g.column
    for c in ast.where + ast.having:
        if c.column is not None:
            yield c.agg, c.column
    if ast.order_by is not None and ast.order_by.column is not None:
        yield ast.order_by.agg, ast.order_by.column


class TestTemplates:
    def test_worked_example(self):
        ast = SqlAst((SelectItem(Agg.MAX, HEIGHT),), ("student",))
        assert synthesize_question(ast) == "show the maximum height of student"

    def test_star(self):
        assert synthesize_question(SqlAst((SelectItem(Agg.NONE, None),), ("student",))) == "show all rows of student"

    def test_top_k_suffix(self):
        ast = SqlAst((SelectItem(Agg.NONE, ColumnRef("student", "name")),), ("student",), order_by=OrderBy(Agg.NONE, HEIGHT, Direction.DESC), limit=1)
        assert synthesize_question(ast).endswith("with the top 1 by height descending")

    def test_condition_phrase(self, student_schema):
        ast = parse_sql("SELECT MAX(height) FROM student WHERE age > 10", student_schema)
        assert synthesize_question(ast) == "show the maximum height of student where age is greater than 10"

    @given(st.integers(0, 2**32))
    def test_names_and_values_verbatim(self, seed):
        schema = _random_schema(seed)
        ast = sample_sql(schema, GrammarConfig(seed=seed, subquery_probability=0.0))
        text = synthesize_question(ast, schema)
        assert text == synthesize_question(ast, schema)
        for item in ast.select:
            if item.column is not None:
                assert item.column.column in text
        for cond in ast.where:
            values = cond.value if isinstance(cond.value, tuple) else (cond.value,)
            for v in values:
                assert literal_text(v).strip("%") in text
