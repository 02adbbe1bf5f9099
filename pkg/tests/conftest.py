import os

import pytest
from hypothesis import HealthCheck, settings

from schemaforge.schema import Column, Schema, Table
from schemaforge.synth import demo_schema

settings.register_profile("default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def student_schema() -> Schema:
    return Schema(
        "students",
        (
            Table(
                "student",
                (
                    Column("name", "text", ("alice", "bob", "dannie")),
                    Column("height", "number", ("150", "172.5", "181")),
                    Column("age", "number", ("9", "10", "11")),
                    Column("advisor", "text", ()),
                ),
            ),
        ),
    )


@pytest.fixture(scope="session")
def school() -> Schema:
    return demo_schema()


@pytest.fixture(scope="session")
def schemas(student_schema, school) -> dict[str, Schema]:
    return {s.schema_id: s for s in (student_schema, school)}


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
