import itertools
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from schemaforge.errors import ContractViolation
from schemaforge.example import PretrainExample
from schemaforge.labeling.types import DependencyEdge, DependencyGraph, DependencyType
from schemaforge.objectives import (
    MaskPlan,
    apply_mask_plan,
    identify_primary_entities,
    objective_record,
    perturb_entities,
    plan_mlm,
    plan_objectives,
    plan_value_replacement,
    value_pool,
)
from schemaforge.schema import Column, ColumnRef, Schema, Table
from schemaforge.sql import Agg, SelectItem, SqlAst
from schemaforge.text import MASK, Question

REF = ColumnRef("t", "a")


def example(tokens, spans=(), ex_id="e"):
    edges = tuple(DependencyEdge(REF, s, DependencyType.WHERE_MENTION) for s in spans)
    q = Question(" ".join(tokens), tuple(tokens))
    ast = SqlAst((SelectItem(Agg.NONE, REF),), ("t",))
    return PretrainExample(ex_id, "s", q, ast, DependencyGraph(edges))


def one_column_schema(name="a", values=("x",)):
    return Schema("s", (Table("t", (Column(name, "text", values),)),))


class TestMlm:
    def test_rate(self):
        ex = example(["w"] * 1000)
        hits = sum(len(plan_mlm(ex, 0.25, seed).masked_question_positions) for seed in range(100))
        assert abs(hits / 100_000 - 0.25) < 0.01

    def test_zero_and_one(self):
        ex = example(["a", "b", "c"])
        assert plan_mlm(ex, 0.0, 1).masked_question_positions == ()
        assert plan_mlm(ex, 1.0, 1).masked_question_positions == (0, 1, 2)

    def test_deterministic(self):
        ex = example(["w"] * 50)
        assert plan_mlm(ex, 0.3, 9) == plan_mlm(ex, 0.3, 9)

    def test_bad_ratio(self):
        with pytest.raises(ContractViolation):
            plan_mlm(example(["a"]), 1.2)

    @given(st.integers(0, 40), st.floats(0, 1), st.integers(0, 10**9))
    def test_positions_unique_and_valid(self, n, ratio, seed):
        pos = plan_mlm(example(["w"] * n), ratio, seed).masked_question_positions
        assert len(set(pos)) == len(pos) and all(0 <= p < n for p in pos)


class TestValueReplacement:
    def test_name_replaced_by_its_value(self):
        schema = one_column_schema("name", ("dannie",))
        plan = plan_value_replacement(example(["q"]), schema, 1.0, 0)
        (r,) = plan.column_replacements
        assert (r.replacement, r.original) == ("dannie", "name")

    def test_empty_pool(self):
        schema = one_column_schema("name", ())
        assert plan_value_replacement(example(["q"]), schema, 1.0, 0).column_replacements == ()

    def test_rate_and_no_leakage(self):
        cols = tuple(Column(f"c{i} part", "text", (f"v{i} w{i}", f"u{i}")) for i in range(50))
        schema = Schema("s", (Table("t", cols),))
        pools = {ref: {tok for value in value_pool(schema, ref) for tok in value} for ref in schema.column_refs}
        picked = 0
        for seed in range(1000):
            for r in plan_value_replacement(example(["q"]), schema, 0.25, seed).column_replacements:
                assert r.replacement in pools[r.column]
                picked += 1
        assert abs(picked / 100_000 - 0.25) < 0.01

    def test_apply(self):
        schema = one_column_schema("pet age", ("7",))
        ex = example(["how", "old"])
        plan = MaskPlan((1,), ()).merge(plan_value_replacement(ex, schema, 1.0, 0))
        inp, targets = apply_mask_plan(ex, schema, plan)
        assert inp.tokens[2] == MASK
        assert inp.tokens[4:6] == ("7", "7")
        assert targets == [(2, "old"), (4, "pet"), (5, "age")]

    def test_plan_dict_round_trip(self, school):
        ex = example(["a"] * 10)
        plan = plan_objectives(ex, school, 0.5, 0.5, 3)
        assert MaskPlan.from_dict(plan.to_dict()) == plan


class TestEntities:
    def test_merge_and_order(self):
        assert identify_primary_entities(example(["w"] * 10, [(8, 9), (5, 7)])) == [(5, 7), (8, 9)]
        assert identify_primary_entities(example(["w"] * 10, [])) == []
        assert identify_primary_entities(example(["w"] * 10, [(2, 4), (3, 5)])) == [(2, 5)]

    def test_needs_graph(self):
        with pytest.raises(ContractViolation):
            identify_primary_entities(example(["a"]).with_(dependencies=None))

    def test_singleton_is_identity(self):
        ex = example(["a", "b", "c"], [(1, 2)])
        p = perturb_entities(ex, 4)
        assert p.permutation == (0,) and list(p.shuffled_tokens) == ["a", "b", "c"]

    def test_uniform_over_s3(self):
        ex = example(["x", "a", "y", "b", "b", "z", "c"], [(1, 2), (3, 5), (6, 7)])
        counts = Counter(perturb_entities(ex, seed).permutation for seed in range(6000))
        assert set(counts) == set(itertools.permutations(range(3)))
        for n in counts.values():
            assert abs(n / 6000 - 1 / 6) <= 0.02

    @given(st.lists(st.sampled_from(["p", "q", "r", "s"]), min_size=1, max_size=14), st.data())
    def test_bijection_and_restore(self, tokens, data):
        n = len(tokens)
        spans = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(1, 3)), max_size=5))
        spans = sorted({(s, min(n, s + w)) for s, w in spans})
        ex = example(tokens, spans)
        p = perturb_entities(ex, data.draw(st.integers(0, 10**9)))
        k = len(p.permutation)
        assert sorted(p.permutation) == list(range(k))
        assert [p.permutation[slot] for slot in range(k)] == list(p.recovery_target)
        assert p.restore() == tokens
        assert Counter(p.shuffled_tokens) == Counter(tokens)
        # gaps between entity slots are untouched
        orig = p.entity_spans_original
        gaps = [tokens[orig[i][1] : orig[i + 1][0]] for i in range(k - 1)]
        new = p.entity_spans_shuffled
        assert gaps == [list(p.shuffled_tokens[new[i][1] : new[i + 1][0]]) for i in range(k - 1)]

    def test_objective_record(self, school):
        ex = example(["a", "b", "c"], [(0, 1), (2, 3)])
        rec = objective_record(ex, school, 0.25, 0.25, 1)
        assert set(rec) == {"mask_plan", "epr"}
        assert rec == objective_record(ex, school, 0.25, 0.25, 1)
        assert objective_record(ex.with_(dependencies=None), school)["epr"] is None
