"""
Tests for annotated query evaluation.
"""

import pytest

from tests.experiment import COMPARE_QUERY, build_experiment_database, pid
from uniprov.common.errors import (
    LiteralRangeError,
    QueryError,
    RowNotFoundError,
    TypeMismatchError,
    UnknownAttributeError,
    UnknownRelationError,
)
from uniprov.data.model import Schema, build_database
from uniprov.data.types import AttributeType, Value
from uniprov.query.evaluator import (
    SourceCell,
    evaluate,
    how_provenance,
    where_provenance,
    what_provenance,
    why_provenance,
)
from uniprov.query.parser import parse_query

VOLTAGE = AttributeType.decimal(3, 1)


def run(sql, state):
    return evaluate(parse_query(sql), state)


def rendered(result):
    return [([str(v) for v in row.values], str(row.polynomial)) for row in result.rows]


class TestCompareQuery:
    def test_result_and_polynomial(self, state):
        result = run(COMPARE_QUERY, state)
        assert rendered(result) == [(["1.0"], "r1*s1 + r1*s3")]
        assert result.schema.relation_name == "result"

    def test_why(self, state):
        assert str(why_provenance(run(COMPARE_QUERY, state), 1)) == "{{r1,s1},{r1,s3}}"

    def test_where(self, state):
        cells = where_provenance(run(COMPARE_QUERY, state), 1, "voltage_2")
        assert sorted(str(c) for c in cells) == ["(S, s1, voltage_2)", "(S, s3, voltage_2)"]

    def test_what(self, state):
        types = what_provenance(run(COMPARE_QUERY, state))
        assert {name: str(origin) for name, origin in types.items()} == {
            "voltage_2": "decimal(3,1) from S"
        }

    def test_row_by_values(self, state):
        result = run(COMPARE_QUERY, state)
        assert str(how_provenance(result, [Value.parse(VOLTAGE, "1.0")])) == "r1*s1 + r1*s3"
        with pytest.raises(RowNotFoundError):
            how_provenance(result, [Value.parse(VOLTAGE, "1.3")])

    def test_row_out_of_range(self, state):
        with pytest.raises(RowNotFoundError):
            run(COMPARE_QUERY, state).row(2)
        with pytest.raises(RowNotFoundError):
            run(COMPARE_QUERY, state).row(0)

    def test_earlier_snapshot(self, database):
        result = run(COMPARE_QUERY, database.snapshot_at(1))
        assert rendered(result) == [(["1.0"], "r1*s1 + r1*s3")]

    def test_genesis_snapshot_is_empty(self, database):
        assert len(run(COMPARE_QUERY, database.snapshot_at(0))) == 0


class TestOperators:
    def test_projection_merges_duplicates(self, state):
        result = run("SELECT voltage_2 FROM S", state)
        assert rendered(result) == [(["1.0"], "s1 + s3"), (["1.3"], "s2")]

    def test_join_attribute_flows_from_both_sides(self, state):
        result = run("SELECT sample_id FROM R NATURAL JOIN S", state)
        (row,) = result.rows
        assert str(row.polynomial) == "r1*s1 + r1*s2 + r1*s3"
        assert SourceCell("R", pid("r1"), "sample_id") in row.where["sample_id"]
        assert SourceCell("S", pid("s2"), "sample_id") in row.where["sample_id"]
        assert str(result.type_map["sample_id"]) == "integer from R, S"

    def test_join_keeps_attribute_order(self, state):
        result = run("SELECT * FROM R NATURAL JOIN S", state)
        assert result.schema.attribute_names == (
            "sample_id",
            "intensity_1",
            "voltage_1",
            "intensity_2",
            "voltage_2",
        )
        assert len(result) == 3

    def test_union_adds_annotations(self, state):
        result = run("SELECT sample_id FROM R UNION SELECT sample_id FROM S", state)
        assert rendered(result) == [(["1"], "r1 + s1 + s2 + s3"), (["2"], "r2@t2")]

    def test_self_join_squares(self, state):
        result = run("SELECT voltage_2 FROM S NATURAL JOIN S WHERE voltage_2 > 1.2", state)
        assert rendered(result) == [(["1.3"], "s2*s2")]

    def test_literal_typed_by_attribute(self, state):
        result = run("SELECT sample_id FROM R WHERE intensity_1 > 40.5", state)
        assert rendered(result) == [(["2"], "r2@t2")]

    def test_not(self, state):
        result = run("SELECT sample_id FROM R WHERE NOT sample_id = 1", state)
        assert rendered(result) == [(["2"], "r2@t2")]

    def test_or(self, state):
        result = run("SELECT voltage_2 FROM S WHERE voltage_2 = 1.3 OR intensity_2 > 42", state)
        assert rendered(result) == [(["1.0"], "s3"), (["1.3"], "s2")]

    def test_constant_comparison(self, state):
        assert len(run("SELECT * FROM S WHERE 1 < 1.5", state)) == 3
        assert len(run("SELECT * FROM S WHERE 'a' = 'b'", state)) == 0

    def test_rows_sorted_by_values(self, state):
        result = run("SELECT intensity_2 FROM S", state)
        assert [str(row.values[0]) for row in result.rows] == ["39.998", "40.375", "42.001"]


class TestErrors:
    def test_join_without_shared_attribute(self):
        db = build_database(
            [Schema.parse("A", "x:int"), Schema.parse("B", "y:int")], {"A": [["1"]], "B": [["1"]]}
        )
        with pytest.raises(QueryError):
            run("SELECT * FROM A NATURAL JOIN B", db.state)

    def test_join_on_differently_typed_attribute(self):
        db = build_database([Schema.parse("A", "x:int"), Schema.parse("B", "x:text")], {})
        with pytest.raises(TypeMismatchError):
            run("SELECT * FROM A NATURAL JOIN B", db.state)

    def test_comparing_different_types(self, state):
        with pytest.raises(TypeMismatchError):
            run("SELECT * FROM R WHERE intensity_1 < voltage_1", state)

    def test_literal_with_excess_digits(self, state):
        with pytest.raises(LiteralRangeError, match="more than 3 fractional digits"):
            run("SELECT * FROM R WHERE intensity_1 > 40.0271", state)

    def test_literal_beyond_precision(self, state):
        message = (
            r"literal 1000 exceeds the precision of intensity_1 \(decimal\(6,3\)\), "
            "which holds at most 3 digits before the decimal point"
        )
        with pytest.raises(LiteralRangeError, match=message):
            run("SELECT * FROM R WHERE intensity_1 < 1000", state)
        with pytest.raises(LiteralRangeError, match="exceeds the precision of voltage_1"):
            run("SELECT * FROM R WHERE 100 <= voltage_1", state)

    def test_fraction_against_integer(self, state):
        with pytest.raises(LiteralRangeError, match="not a whole number, as sample_id"):
            run("SELECT * FROM R WHERE sample_id = 1.5", state)

    def test_text_literal_against_number(self, state):
        with pytest.raises(TypeMismatchError):
            run("SELECT * FROM R WHERE sample_id = 'one'", state)

    def test_unknown_names(self, state):
        with pytest.raises(UnknownRelationError):
            run("SELECT * FROM T", state)
        with pytest.raises(UnknownAttributeError):
            run("SELECT voltage_9 FROM R", state)
        with pytest.raises(UnknownAttributeError):
            run("SELECT * FROM R WHERE voltage_9 > 1", state)

    def test_duplicate_projection(self, state):
        with pytest.raises(QueryError):
            run("SELECT sample_id, sample_id FROM R", state)

    def test_union_of_different_schemas(self, state):
        with pytest.raises(QueryError):
            run("SELECT voltage_1 FROM R UNION SELECT voltage_2 FROM S", state)

    def test_where_unknown_attribute(self, state):
        with pytest.raises(UnknownAttributeError):
            where_provenance(run(COMPARE_QUERY, state), 1, "sample_id")


def test_versioned_mode_renders_timestamps():
    state = build_experiment_database(versioned=True).state
    assert rendered(run(COMPARE_QUERY, state)) == [(["1.0"], "r1@t1*s1@t1 + r1@t1*s3@t1")]
