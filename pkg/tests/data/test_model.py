"""
Tests for typed values, schemas and the versioned store.
"""

import pytest

from tests.experiment import R_SCHEMA, build_experiment_database, pid
from uniprov.common.errors import (
    DuplicateRelationError,
    SchemaError,
    TypeMismatchError,
    UnknownRelationError,
    UnknownTupleError,
    VersionRangeError,
)
from uniprov.data.model import Schema, VersionedDatabase, build_database
from uniprov.data.types import AttributeType, ProvenanceId, TypeKind, Value


class TestAttributeType:
    @pytest.mark.parametrize(
        "text, expected",
        [
            ("int", AttributeType.integer()),
            ("INTEGER", AttributeType.integer()),
            ("decimal(6,3)", AttributeType.decimal(6, 3)),
            (" decimal ( 3 , 1 ) ", AttributeType.decimal(3, 1)),
            ("text", AttributeType.text()),
            ("bool", AttributeType.boolean()),
        ],
    )
    def test_parse(self, text, expected):
        assert AttributeType.parse(text) == expected

    @pytest.mark.parametrize(
        "text", ["float", "decimal", "decimal(0,0)", "decimal(19,2)", "decimal(3,4)", "int(3,1)"]
    )
    def test_parse_rejects(self, text):
        with pytest.raises(SchemaError):
            AttributeType.parse(text)

    def test_render(self):
        assert str(AttributeType.decimal(6, 3)) == "decimal(6,3)"
        assert str(AttributeType.integer()) == "integer"


class TestValue:
    def test_decimal_is_exact(self):
        value = Value.parse(AttributeType.decimal(6, 3), "40.027")
        assert value.raw == 40027
        assert str(value) == "40.027"

    def test_decimal_pads_scale(self):
        assert str(Value.parse(AttributeType.decimal(3, 1), "1")) == "1.0"
        assert str(Value.parse(AttributeType.decimal(6, 3), "-0.5")) == "-0.500"

    def test_decimal_too_many_digits(self):
        with pytest.raises(TypeMismatchError):
            Value.parse(AttributeType.decimal(6, 3), "40.0271")

    def test_decimal_exceeds_precision(self):
        with pytest.raises(TypeMismatchError):
            Value.parse(AttributeType.decimal(3, 1), "100.0")

    def test_comparison(self):
        decimal = AttributeType.decimal(6, 3)
        assert Value.parse(decimal, "39.998") < Value.parse(decimal, "40.027")
        assert Value.parse(decimal, "40.000") == Value.parse(decimal, "40")

    def test_comparison_across_types_fails(self):
        with pytest.raises(TypeMismatchError):
            _ = Value.parse(AttributeType.decimal(6, 3), "1") < Value.of(AttributeType.integer(), 1)

    @pytest.mark.parametrize("text", ["1.5", "abc", ""])
    def test_integer_rejects(self, text):
        with pytest.raises(TypeMismatchError):
            Value.parse(AttributeType.integer(), text)

    def test_boolean(self):
        assert Value.parse(AttributeType.boolean(), "TRUE").raw is True
        assert str(Value.parse(AttributeType.boolean(), "false")) == "false"

    def test_of_rejects_bool_for_integer(self):
        with pytest.raises(TypeMismatchError):
            Value.of(AttributeType.integer(), True)

    def test_text_kept_verbatim(self):
        value = Value.parse(AttributeType.text(), " spaced ")
        assert value.type.kind is TypeKind.TEXT
        assert value.raw == " spaced "


class TestProvenanceId:
    def test_render(self):
        assert str(ProvenanceId("r2", 1)) == "r2@t1"
        assert str(ProvenanceId("r1")) == "r1"

    def test_parse(self):
        assert ProvenanceId.parse("r2@t1") == ProvenanceId("r2", 1)
        assert ProvenanceId.parse("s3") == ProvenanceId("s3")

    @pytest.mark.parametrize("text", ["", "2r", "r2@1", "r2@t", "r 2"])
    def test_parse_rejects(self, text):
        with pytest.raises(SchemaError):
            ProvenanceId.parse(text)


class TestSchema:
    def test_parse_keeps_commas_inside_types(self):
        schema = Schema.parse("R", R_SCHEMA)
        assert schema.attribute_names == ("sample_id", "intensity_1", "voltage_1")
        assert schema.type_of("intensity_1") == AttributeType.decimal(6, 3)
        assert schema.render() == (
            "sample_id:integer,intensity_1:decimal(6,3),voltage_1:decimal(3,1)"
        )

    @pytest.mark.parametrize(
        "text", ["", "a:int,a:int", "a", "1a:int", "a:int,b:money"]
    )
    def test_parse_rejects(self, text):
        with pytest.raises(SchemaError):
            Schema.parse("R", text)

    def test_invalid_relation_name(self):
        with pytest.raises(SchemaError):
            Schema.parse("bad name", "a:int")

    def test_conform_checks_arity(self):
        schema = Schema.parse("R", R_SCHEMA)
        with pytest.raises(TypeMismatchError):
            schema.conform(["1", "40.027"])


class TestVersionedDatabase:
    def test_ids_follow_relation_prefix(self, database):
        assert [str(i) for i in database.all_ids("S")] == ["s1", "s2", "s3"]

    def test_updated_tuple_ids_carry_versions(self, database):
        assert database.ids_for_base("R", "r2") == (pid("r2@t1"), pid("r2@t2"))
        assert database.ids_for_base("R", "r1") == (pid("r1"),)

    def test_stored_ids_are_always_stamped(self, database):
        assert database.stored_ids("R", "r1") == (pid("r1@t1"),)
        assert database.stored_ids("R", "r2") == (pid("r2@t1"), pid("r2@t2"))
        with pytest.raises(UnknownTupleError):
            database.stored_ids("R", "r9")

    def test_update_advances_version(self, database):
        assert database.current_version == 2
        database.update_tuple("R", "r1", ["1", "40.030", "0.9"])
        assert database.current_version == 3

    def test_insert_keeps_version(self):
        db = VersionedDatabase()
        db.define_relation(Schema.parse("R", R_SCHEMA))
        db.insert_tuple("R", ["1", "40.027", "0.9"])
        db.insert_tuple("R", ["2", "41.038", "1.4"])
        assert db.current_version == 1

    def test_snapshots_are_immutable_views(self, database):
        before = database.snapshot_at(1)
        after = database.snapshot_at(2)
        assert [str(t.id) for t in before.relation("R")] == ["r1", "r2@t1"]
        assert [str(t.id) for t in after.relation("R")] == ["r1", "r2@t2"]
        assert str(before.relation("R").get(pid("r2@t1")).values[1]) == "41.038"
        assert str(after.relation("R").get(pid("r2@t2")).values[1]) == "41.033"

    def test_genesis_snapshot_is_empty(self, database):
        genesis = database.snapshot_at(0)
        assert genesis.ids() == ()
        assert genesis.relation_names == ("R", "S")

    def test_snapshot_out_of_range(self, database):
        with pytest.raises(VersionRangeError):
            database.snapshot_at(3)
        with pytest.raises(VersionRangeError):
            database.snapshot_at(-1)

    def test_versioned_mode_stamps_every_id(self):
        db = build_experiment_database(versioned=True)
        assert [str(i) for i in db.all_ids("S")] == ["s1@t1", "s2@t1", "s3@t1"]

    def test_duplicate_relation(self, database):
        with pytest.raises(DuplicateRelationError):
            database.define_relation(Schema.parse("R", "a:int"))

    def test_colliding_prefix_gets_long_form(self):
        db = VersionedDatabase()
        db.define_relation(Schema.parse("Runs", "a:int"))
        db.define_relation(Schema.parse("Results", "a:int"))
        assert str(db.insert_tuple("Results", ["1"])) == "rel_Results_1"

    def test_unknown_relation_and_tuple(self, database):
        with pytest.raises(UnknownRelationError):
            database.insert_tuple("T", ["1"])
        with pytest.raises(UnknownTupleError):
            database.update_tuple("R", "r9", ["1", "1.000", "1.0"])

    def test_wrong_typed_insert_leaves_database_unchanged(self, database):
        with pytest.raises(TypeMismatchError):
            database.insert_tuple("R", ["3", "not-a-number", "1.0"])
        assert len(database.state.relation("R")) == 2

    def test_restricted_and_without(self, database):
        state = database.state
        kept = state.restricted_to({pid("r1"), pid("s2")})
        assert kept.ids() == (pid("r1"), pid("s2"))
        dropped = state.without({pid("r1")})
        assert pid("r1") not in dropped.ids()
        assert len(dropped.ids()) == 4

    def test_diff_snapshots(self, database):
        diff = database.diff_snapshots(1, 2)
        assert diff.added["R"] == ()
        (change,) = diff.changed["R"]
        assert (change.before.id, change.after.id) == (pid("r2@t1"), pid("r2@t2"))
        assert database.diff_snapshots(2, 2).is_empty

    def test_diff_from_genesis_lists_loads(self, database):
        diff = database.diff_snapshots(0, 1)
        assert [str(t.id) for t in diff.added["S"]] == ["s1", "s2", "s3"]

    def test_diff_rejects_reversed_range(self, database):
        with pytest.raises(VersionRangeError):
            database.diff_snapshots(2, 1)

    def test_document_round_trip(self, database):
        restored = VersionedDatabase.from_document(database.to_document())
        assert restored.to_document() == database.to_document()
        assert restored.snapshot_at(1) == database.snapshot_at(1)

    def test_document_rejects_bad_versions(self, database):
        document = database.to_document()
        document["current_version"] = 1
        with pytest.raises(SchemaError):
            VersionedDatabase.from_document(document)

    def test_build_database(self):
        db = build_database(
            [Schema.parse("R", "a:int")], {"R": [["1"], ["2"]]}, versioned=False
        )
        assert [str(i) for i in db.all_ids("R")] == ["r1", "r2"]
