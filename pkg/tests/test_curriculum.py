import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from schemaforge.curriculum import (
    CurriculumState,
    competence,
    compute_difficulties,
    curriculum_trace,
    input_length,
    minmax_scale,
    sample_batch,
)
from schemaforge.errors import ContractViolation
from schemaforge.example import PretrainExample
from schemaforge.sql import parse_sql
from schemaforge.text import Question


class TestDifficulty:
    def test_minmax(self):
        assert minmax_scale([10, 20, 30]) == [0.0, 0.5, 1.0]
        assert minmax_scale([7, 7]) == [0.0, 0.0]
        assert minmax_scale([3]) == [0.0]
        with pytest.raises(ContractViolation):
            minmax_scale([])

    def test_length_counts_question_and_columns(self, student_schema):
        ex = PretrainExample("e", "students", Question.from_text("a b c"), parse_sql("SELECT name FROM student", student_schema))
        assert input_length(ex, student_schema) == 3 + 4

    def test_compute(self, student_schema):
        ast = parse_sql("SELECT name FROM student", student_schema)
        corpus = [PretrainExample(str(i), "students", Question.from_text("w " * n), ast) for i, n in enumerate([1, 3, 2])]
        assert compute_difficulties(corpus, {"students": student_schema}) == [0.0, 1.0, 0.5]


class TestCompetence:
    def test_endpoints_exact(self):
        assert competence(0, 100, 0.37) == 0.37
        assert competence(100, 100, 0.37) == 1.0

    def test_midpoint(self):
        assert abs(competence(50, 100, 0.2) - math.sqrt(0.52)) < 1e-12
        assert round(competence(50, 100, 0.2), 5) == 0.72111

    def test_bad_args(self):
        for args in [(-1, 10, 0.0), (11, 10, 0.0), (0, 0, 0.0), (1, 10, 1.5)]:
            with pytest.raises(ContractViolation):
                competence(*args)

    @given(st.integers(1, 10_000), st.floats(0, 1), st.data())
    def test_monotone_and_bounded(self, T, min_d, data):
        t1 = data.draw(st.integers(0, T))
        t2 = data.draw(st.integers(t1, T))
        c1, c2 = competence(t1, T, min_d), competence(t2, T, min_d)
        assert min_d <= c1 <= c2 <= 1.0


class TestSampling:
    def test_start_admits_only_easiest(self):
        state = CurriculumState((0.0, 0.5, 1.0, 0.0), T=10)
        assert state.admissible() == [0, 3]
        assert state.at(10).admissible() == [0, 1, 2, 3]

    def test_padding(self):
        state = CurriculumState((0.0, 0.9, 0.0, 0.3, 0.2, 1.0), T=100)
        batch = sample_batch(state, 4, seed=1)
        assert sorted(batch[:2]) == [0, 2]
        assert batch[2:] == [4, 3]

    def test_deterministic(self):
        state = CurriculumState(tuple(i / 20 for i in range(21)), T=10, t=5)
        assert sample_batch(state, 5, 3) == sample_batch(state, 5, 3)

    def test_state_invariants(self):
        with pytest.raises(ContractViolation):
            CurriculumState((), T=1)
        with pytest.raises(ContractViolation):
            CurriculumState((0.5, 1.2), T=1)
        with pytest.raises(ContractViolation):
            CurriculumState((0.5,), T=3, t=4)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.integers(1, 50), st.integers(1, 10), st.integers(0, 10**6))
    def test_pool_grows_and_batch_respects_competence(self, diffs, T, bs, seed):
        state = CurriculumState(tuple(diffs), T)
        prev = -1
        for t in range(0, T + 1, max(1, T // 7)):
            s = state.at(t)
            pool = s.admissible()
            assert len(pool) >= prev
            prev = len(pool)
            batch = sample_batch(s, bs, seed)
            assert len(batch) == min(bs, len(diffs))
            assert len(set(batch)) == len(batch)
            over = [i for i in batch if diffs[i] > s.competence]
            # anything above c(t) must come from easiest-first padding
            assert len(over) == max(0, len(batch) - len(pool))
            if over:
                rest = sorted((i for i in range(len(diffs)) if i not in set(pool)), key=lambda i: (diffs[i], i))
                assert over == rest[: len(over)]

    def test_trace(self):
        state = CurriculumState((0.0, 0.5, 1.0), T=4)
        rows = list(curriculum_trace(state, 2, seed=0))
        assert [r[0] for r in rows] == [0, 1, 2, 3]
        assert rows[0][1] == 0.0 and rows[0][2] == 1
        assert rows == list(curriculum_trace(state, 2, seed=0))
