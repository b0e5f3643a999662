"""
Tests for the ID database bridge.
"""

import hashlib

import pytest

from tests.experiment import HASH_R, pid
from uniprov.annotations import WitnessBasis, parse_polynomial
from uniprov.bridge import IdDatabase, hash_file
from uniprov.common.errors import RegistrationError, UnregisteredIdError


def register(idb, ids, **kwargs):
    return idb.register_file(
        name=kwargs.pop("name", "data.csv"),
        path=kwargs.pop("path", "data.csv"),
        content_hash=kwargs.pop("content_hash", HASH_R),
        relation=kwargs.pop("relation", "R"),
        tuple_ids=[pid(text) for text in ids],
        **kwargs,
    )


def test_hash_file(tmp_path):
    path = tmp_path / "channel_1.csv"
    path.write_bytes(b"sample_id,intensity_1\n1,40.027\n")
    assert hash_file(path) == hashlib.sha256(b"sample_id,intensity_1\n1,40.027\n").hexdigest()


class TestRegistration:
    def test_fresh_file_ids(self):
        idb = IdDatabase()
        first = register(idb, ["r1"])
        second = register(idb, ["r2"])
        assert (first.file_id, second.file_id) == ("f1", "f2")
        assert len(idb) == 2

    def test_tuple_ids_are_canonical(self):
        record = register(IdDatabase(), ["r2@t2", "r1", "r2@t1", "r1"])
        assert record.tuple_ids == ("r1", "r2@t1", "r2@t2")

    def test_explicit_file_id(self, idb):
        assert idb.record("fR").workflow_entity == "dataset-R"
        assert [r.file_id for r in idb.records] == ["fR", "fS"]

    def test_empty_ids(self):
        with pytest.raises(RegistrationError, match="covers no tuple ids"):
            register(IdDatabase(), [])

    def test_id_already_registered(self, idb):
        with pytest.raises(RegistrationError, match="s1 is already registered to fS"):
            register(idb, ["s1"], relation="S")

    def test_file_id_taken(self, idb):
        with pytest.raises(RegistrationError, match="file id already taken: fR"):
            register(idb, ["r3"], file_id="fR")

    def test_invalid_hash(self):
        with pytest.raises(RegistrationError):
            register(IdDatabase(), ["r1"], content_hash="not-a-hash")

    def test_unknown_record(self, idb):
        with pytest.raises(UnregisteredIdError):
            idb.record("f9")


class TestResolution:
    def test_exact_id(self, idb):
        assert idb.resolve(pid("r2@t2")).file_id == "fR"

    def test_falls_back_to_base(self, idb):
        assert idb.resolve(pid("s1@t3")).file_id == "fS"

    def test_stamped_registration_holds_only_its_version(self):
        idb = IdDatabase()
        register(idb, ["r2@t1"])
        register(idb, ["r2@t2"])
        with pytest.raises(UnregisteredIdError, match="files f1, f2 hold other versions of r2"):
            idb.resolve(pid("r2@t3"))

    def test_ambiguous_bare_id(self):
        idb = IdDatabase()
        register(idb, ["r2@t1"])
        register(idb, ["r2@t2"])
        with pytest.raises(UnregisteredIdError, match="ambiguous"):
            idb.resolve(pid("r2"))

    def test_bare_id_resolves_to_stamped_registration(self):
        idb = IdDatabase()
        register(idb, ["r1@t1"])
        assert idb.resolve(pid("r1")).file_id == "f1"

    def test_reexport_after_update(self, database):
        idb = IdDatabase()
        register(idb, ["r1", "r2"], name="old.csv")
        database.update_tuple("R", "r2", ["2", "41.040", "1.4"])
        register(idb, ["r2@t3"], name="new.csv")
        assert idb.resolve(pid("r2@t1")).name == "old.csv"
        assert idb.resolve(pid("r2@t3")).name == "new.csv"
        assert str(idb.lift(parse_polynomial("r2@t1"))) == "f1"
        assert str(idb.lift(parse_polynomial("r2@t3"))) == "f2"

    def test_stale_file_does_not_hold_later_version(self, database):
        idb = IdDatabase()
        stamped = database.stored_ids("R", "r1") + database.stored_ids("R", "r2")
        register(idb, [str(i) for i in stamped])
        database.update_tuple("R", "r2", ["2", "41.040", "1.4"])
        with pytest.raises(UnregisteredIdError, match="hold other versions of r2"):
            idb.resolve(pid("r2@t3"))
        assert idb.resolve(pid("r2@t2")).file_id == "f1"

    def test_unregistered(self, idb):
        with pytest.raises(UnregisteredIdError, match="t1 is not registered"):
            idb.resolve(pid("t1"))

    def test_lift_polynomial(self, idb):
        assert str(idb.lift(parse_polynomial("r1*s1 + r1*s3"))) == "2*fR*fS"
        assert str(idb.lift(parse_polynomial("r2@t2 + 3"))) == "3 + fR"

    def test_lift_unregistered_variable(self, idb):
        with pytest.raises(UnregisteredIdError):
            idb.lift(parse_polynomial("r1*t1"))

    def test_lift_witnesses(self, idb):
        basis = WitnessBasis.of([pid("r1"), pid("s1")], [pid("r1"), pid("s3")])
        assert str(idb.lift_witnesses(basis)) == "{{fR,fS}}"

    def test_records_for(self, idb):
        records = idb.records_for([pid("s2"), pid("r1"), pid("s3")])
        assert [r.file_id for r in records] == ["fR", "fS"]


class TestDocuments:
    def test_round_trip(self, idb):
        document = idb.to_document()
        restored = IdDatabase.from_document(document)
        assert restored.to_document() == document
        assert restored.resolve(pid("r2@t1")).file_id == "fR"

    def test_optional_entity_omitted(self):
        idb = IdDatabase()
        register(idb, ["r1"])
        (entry,) = idb.to_document()["records"]
        assert "workflow_entity" not in entry

    def test_needs_records_list(self):
        with pytest.raises(RegistrationError, match="records list"):
            IdDatabase.from_document({"files": []})

    def test_invalid_record(self, idb):
        document = idb.to_document()
        document["records"][0]["tuple_ids"] = []
        with pytest.raises(RegistrationError, match="invalid file record"):
            IdDatabase.from_document(document)

    def test_duplicate_file_id(self, idb):
        document = idb.to_document()
        document["records"][1]["file_id"] = "fR"
        with pytest.raises(RegistrationError, match="duplicate file id: fR"):
            IdDatabase.from_document(document)

    def test_overlapping_records(self, idb):
        document = idb.to_document()
        document["records"][1]["tuple_ids"] = ["r1", "s9"]
        with pytest.raises(RegistrationError, match="r1 is registered to both fR and fS"):
            IdDatabase.from_document(document)
