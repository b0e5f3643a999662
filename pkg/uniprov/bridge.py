"""
ID database linking tuple provenance IDs to measurement files.

Each registered file covers a set of tuple IDs of one relation and may point
at the workflow entity that represents it. Substituting file IDs for tuple
IDs lifts a tuple-level polynomial to file-level provenance.
"""

import hashlib
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from uniprov.annotations import Polynomial, WitnessBasis, rename_variables
from uniprov.common.errors import (
    RegistrationError,
    SchemaError,
    UnregisteredIdError,
    first_validation_message,
)
from uniprov.common.logging import get_logger
from uniprov.data.types import IDENTIFIER, ProvenanceId

logger = get_logger(__name__)

HASH_ALGORITHM = "sha256"
_CHUNK_SIZE = 1024 * 1024


def hash_file(path: Union[str, Path]) -> str:
    """SHA-256 of a file's content as lowercase hex."""
    digest = hashlib.new(HASH_ALGORITHM)
    with open(path, "rb") as stream:
        for chunk in iter(lambda: stream.read(_CHUNK_SIZE), b""):
            digest.update(chunk)
    return digest.hexdigest()


class FileRecord(BaseModel):
    """A registered file and the tuple IDs it holds."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    file_id: str = Field(pattern=IDENTIFIER.pattern)
    name: str = Field(min_length=1)
    path: str
    content_hash: str = Field(pattern=r"^[0-9a-f]{64}$")
    relation: str = Field(pattern=IDENTIFIER.pattern)
    tuple_ids: Tuple[str, ...] = Field(min_length=1)
    workflow_entity: Optional[str] = None

    @field_validator("tuple_ids")
    @classmethod
    def _canonical_ids(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        try:
            ids = {ProvenanceId.parse(text) for text in value}
        except SchemaError as exc:
            raise ValueError(str(exc)) from exc
        return tuple(str(pid) for pid in sorted(ids))

    @property
    def ids(self) -> Tuple[ProvenanceId, ...]:
        return tuple(ProvenanceId.parse(text) for text in self.tuple_ids)

    @property
    def file_pid(self) -> ProvenanceId:
        """The file ID as a polynomial variable."""
        return ProvenanceId(self.file_id)


class IdDatabase:
    """Registry of file records with an index from tuple ID to file ID.

    Registration requires exclusive access; reads are unrestricted.
    """

    def __init__(self) -> None:
        self._records: Dict[str, FileRecord] = {}
        self._index: Dict[ProvenanceId, str] = {}

    def __len__(self) -> int:
        return len(self._records)

    @property
    def records(self) -> List[FileRecord]:
        return [self._records[file_id] for file_id in sorted(self._records)]

    def record(self, file_id: str) -> FileRecord:
        try:
            return self._records[file_id]
        except KeyError:
            raise UnregisteredIdError(f"unknown file: {file_id}") from None

    def _fresh_file_id(self) -> str:
        n = len(self._records) + 1
        while f"f{n}" in self._records:
            n += 1
        return f"f{n}"

    def register_file(
        self,
        name: str,
        path: str,
        content_hash: str,
        relation: str,
        tuple_ids: Iterable[ProvenanceId],
        workflow_entity: Optional[str] = None,
        file_id: Optional[str] = None,
    ) -> FileRecord:
        """Store a file record and index its tuple IDs.

        Returns:
            FileRecord: The stored record, with a fresh ``f<n>`` id unless
            ``file_id`` was given

        Raises:
            RegistrationError: For an empty ID set, a taken file ID or an ID
                already registered to another file.
        """
        ids = sorted(set(tuple_ids))
        if not ids:
            raise RegistrationError(f"file {name} covers no tuple ids")
        for pid in ids:
            if pid in self._index:
                raise RegistrationError(f"{pid} is already registered to {self._index[pid]}")
        if file_id is not None and file_id in self._records:
            raise RegistrationError(f"file id already taken: {file_id}")
        try:
            record = FileRecord(
                file_id=file_id or self._fresh_file_id(),
                name=name,
                path=path,
                content_hash=content_hash,
                relation=relation,
                tuple_ids=tuple(str(pid) for pid in ids),
                workflow_entity=workflow_entity,
            )
        except ValidationError as exc:
            raise RegistrationError(first_validation_message(exc)) from exc
        self._store(record)
        logger.info(
            "Registered %s as %s (%d ids of %s)", name, record.file_id, len(ids), relation
        )
        return record

    def _store(self, record: FileRecord) -> None:
        self._records[record.file_id] = record
        for pid in record.ids:
            self._index[pid] = record.file_id

    def resolve(self, pid: ProvenanceId) -> FileRecord:
        """The record holding ``pid``.

        A timestamped registration only holds that exact version. A bare
        registration was made while the tuple had a single version, so it
        holds a timestamped ID only when no timestamped registration of the
        same base is at or before it. A bare ID (a tuple with one version)
        resolves to the one file registering its base.

        Raises:
            UnregisteredIdError: If no record (or more than one by base) matches.
        """
        file_id = self._index.get(pid)
        if file_id is not None:
            return self._records[file_id]
        same_base = {r: fid for r, fid in self._index.items() if r.base == pid.base}
        if not same_base:
            raise UnregisteredIdError(f"{pid} is not registered to any file")
        files = ", ".join(sorted(set(same_base.values())))
        if pid.version is None:
            if len(set(same_base.values())) == 1:
                return self._records[next(iter(same_base.values()))]
            raise UnregisteredIdError(f"{pid} is ambiguous: its base maps to files {files}")
        bare = same_base.get(ProvenanceId(pid.base))
        earlier = [r for r in same_base if r.version is not None and r.version <= pid.version]
        if bare is not None and not earlier:
            return self._records[bare]
        raise UnregisteredIdError(
            f"{pid} is not registered; files {files} hold other versions of {pid.base}"
        )

    def file_mapping(self, ids: Iterable[ProvenanceId]) -> Dict[ProvenanceId, ProvenanceId]:
        return {pid: self.resolve(pid).file_pid for pid in ids}

    def lift(self, p: Polynomial) -> Polynomial:
        """Rewrite a tuple-level polynomial over file IDs.

        Raises:
            UnregisteredIdError: If a variable of ``p`` is not registered.
        """
        return rename_variables(p, self.file_mapping(p.variables()))

    def lift_witnesses(self, basis: WitnessBasis) -> WitnessBasis:
        """File-level image of a witness basis (witnesses collapse as sets)."""
        mapping = self.file_mapping({pid for w in basis.witnesses for pid in w})
        lifted = (frozenset(mapping[pid] for pid in w) for w in basis.witnesses)
        return WitnessBasis(frozenset(lifted))

    def records_for(self, ids: Iterable[ProvenanceId]) -> List[FileRecord]:
        file_ids = {self.resolve(pid).file_id for pid in ids}
        return [self._records[file_id] for file_id in sorted(file_ids)]

    # -- persistence ------------------------------------------------------

    def to_document(self) -> Dict[str, Any]:
        return {
            "records": [
                record.model_dump(mode="json", exclude_none=True) for record in self.records
            ]
        }

    @classmethod
    def from_document(cls, document: Mapping[str, Any]) -> "IdDatabase":
        """Rebuild from :meth:`to_document` output, re-checking every record.

        Raises:
            RegistrationError: If the document is malformed or records overlap.
        """
        if not isinstance(document, Mapping) or not isinstance(document.get("records"), list):
            raise RegistrationError("ID database document needs a records list")
        idb = cls()
        for entry in document["records"]:
            try:
                record = FileRecord.model_validate(entry)
            except ValidationError as exc:
                message = first_validation_message(exc)
                raise RegistrationError(f"invalid file record: {message}") from exc
            if record.file_id in idb._records:
                raise RegistrationError(f"duplicate file id: {record.file_id}")
            for pid in record.ids:
                if pid in idb._index:
                    raise RegistrationError(
                        f"{pid} is registered to both {idb._index[pid]} and {record.file_id}"
                    )
            idb._store(record)
        return idb
