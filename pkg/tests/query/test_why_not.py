"""
Tests for why-not explanations.
"""

import pytest

from tests.experiment import COMPARE_QUERY, pid
from uniprov.common.errors import NotMissingError, UnknownAttributeError
from uniprov.data.model import Schema, build_database
from uniprov.query.parser import parse_query
from uniprov.query.why_not import (
    AbsentSourceValue,
    MissingJoinPartner,
    PickySelection,
    parse_expectation,
    why_not,
)


def explain(sql, state, **expectation):
    return why_not(parse_query(sql), state, expectation)


class TestPickySelection:
    def test_rejected_combination(self, state):
        explanation = explain(COMPARE_QUERY, state, voltage_2="1.3")
        (finding,) = explanation.findings
        assert isinstance(finding, PickySelection)
        assert finding.witness == frozenset({pid("r1"), pid("s2")})
        assert finding.predicate == "intensity_1 < intensity_2"
        assert str(finding) == (
            "selection intensity_1 < intensity_2 rejects {r1,s2}: 40.027 vs 39.998"
        )

    def test_blames_first_failing_comparison(self, state):
        sql = "SELECT voltage_2 FROM R NATURAL JOIN S WHERE intensity_1 > 41 OR voltage_2 < 1.0"
        (finding,) = explain(sql, state, voltage_2="1.3").findings
        assert finding.comparison == "intensity_1 > 41"
        assert [str(v) for v in finding.operands] == ["40.027", "41.000"]

    def test_blames_comparison_under_not(self, state):
        sql = "SELECT voltage_2 FROM S WHERE NOT voltage_2 = 1.3"
        (finding,) = explain(sql, state, voltage_2="1.3").findings
        assert finding.comparison == "voltage_2 = 1.3"
        assert finding.witness == frozenset({pid("s2")})

    def test_to_dict(self, state):
        document = explain(COMPARE_QUERY, state, voltage_2="1.3").to_dict()
        assert document == {
            "expectation": {"voltage_2": "1.3"},
            "findings": [
                {
                    "kind": "picky-selection",
                    "predicate": "intensity_1 < intensity_2",
                    "comparison": "intensity_1 < intensity_2",
                    "witness": ["r1", "s2"],
                    "operands": ["40.027", "39.998"],
                }
            ],
        }


class TestMissingJoinPartner:
    def test_unmatched_tuple(self, state):
        explanation = explain("SELECT * FROM R NATURAL JOIN S", state, sample_id="2")
        (finding,) = explanation.findings
        assert isinstance(finding, MissingJoinPartner)
        assert str(finding) == "R tuple r2@t2 has no join partner with sample_id = 2"

    def test_voltage_1_of_unmatched_sample(self, database):
        sql = "SELECT voltage_1 FROM R NATURAL JOIN S WHERE intensity_1 < intensity_2"
        (finding,) = explain(sql, database.snapshot_at(1), voltage_1="1.4").findings
        assert isinstance(finding, MissingJoinPartner)
        assert finding.id == pid("r2@t1")
        assert finding.relation == "R"
        assert [(name, str(value)) for name, value in finding.join_values] == [("sample_id", "2")]
        assert str(finding) == "R tuple r2@t1 has no join partner with sample_id = 2"

    def test_earlier_snapshot_names_earlier_version(self, database):
        explanation = explain(
            "SELECT * FROM R NATURAL JOIN S", database.snapshot_at(1), sample_id="2"
        )
        assert [f.id for f in explanation.findings] == [pid("r2@t1")]


class TestAbsentSourceValue:
    def test_value_nowhere_in_sources(self, state):
        (finding,) = explain(COMPARE_QUERY, state, voltage_2="2.5").findings
        assert finding == AbsentSourceValue("voltage_2", finding.value)
        assert str(finding) == "no source tuple holds voltage_2 = 2.5"

    def test_voltage_never_measured(self, state):
        (finding,) = explain(COMPARE_QUERY, state, voltage_2="9.9").findings
        assert isinstance(finding, AbsentSourceValue)
        assert (finding.attribute, str(finding.value)) == ("voltage_2", "9.9")
        assert not finding.in_combination
        assert str(finding) == "no source tuple holds voltage_2 = 9.9"

    def test_values_present_but_never_combined(self):
        state = build_database(
            [Schema.parse("A", "k:int,x:int"), Schema.parse("B", "k:int,y:int")],
            {"A": [["1", "10"], ["2", "20"]], "B": [["1", "5"], ["2", "6"]]},
        ).state
        explanation = explain("SELECT x, y FROM A NATURAL JOIN B", state, x="10", y="6")
        assert [str(f) for f in explanation.findings] == [
            "no source combination yields x = 10",
            "no source combination yields y = 6",
        ]
        assert all(f.in_combination for f in explanation.findings)


class TestExpectation:
    def test_present_values_are_not_missing(self, state):
        with pytest.raises(NotMissingError):
            explain(COMPARE_QUERY, state, voltage_2="1.0")

    def test_unknown_attribute(self, state):
        with pytest.raises(UnknownAttributeError):
            explain(COMPARE_QUERY, state, voltage_9="1.0")

    def test_empty_expectation(self, state):
        with pytest.raises(UnknownAttributeError):
            explain(COMPARE_QUERY, state)

    def test_expectation_text_follows_output_order(self, state):
        explanation = explain(
            "SELECT sample_id, voltage_2 FROM R NATURAL JOIN S WHERE intensity_1 < intensity_2",
            state,
            voltage_2="1.3",
            sample_id="1",
        )
        assert explanation.expectation_text() == "sample_id=1, voltage_2=1.3"

    def test_parse_expectation(self):
        assert parse_expectation("voltage_2=1.3, sample_id = 1") == {
            "voltage_2": "1.3",
            "sample_id": "1",
        }

    @pytest.mark.parametrize("text", ["voltage_2", "=1.3", "voltage_2=1.3,"])
    def test_parse_expectation_rejects(self, text):
        with pytest.raises(UnknownAttributeError):
            parse_expectation(text)
