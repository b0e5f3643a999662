"""
Versioned relational storage.

A :class:`VersionedDatabase` keeps the full, append-only history of every
tuple. Updates never overwrite: they append a new version of the tuple under
the same base identifier and advance the database's logical clock. Readers
work on immutable :class:`DatabaseState` snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import (
    Any,
    Callable,
    Collection,
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
)

from uniprov.common.errors import (
    DuplicateRelationError,
    SchemaError,
    TypeMismatchError,
    UnknownAttributeError,
    UnknownRelationError,
    UnknownTupleError,
    VersionRangeError,
)
from uniprov.common.logging import get_logger
from uniprov.data.types import AttributeType, ProvenanceId, Value, check_identifier

logger = get_logger(__name__)

# Version 0 is the empty genesis state; data loads start at t1.
GENESIS_VERSION = 0
INITIAL_VERSION = 1


@dataclass(frozen=True)
class Schema:
    """Relation name plus ordered, typed attributes."""

    relation_name: str
    attributes: Tuple[Tuple[str, AttributeType], ...]

    def __post_init__(self) -> None:
        check_identifier(self.relation_name, "relation name")
        if not self.attributes:
            raise SchemaError(f"empty schema for relation {self.relation_name}")
        seen = set()
        for name, attr_type in self.attributes:
            check_identifier(name, "attribute name")
            if name in seen:
                raise SchemaError(f"duplicate attribute {name!r} in {self.relation_name}")
            if not isinstance(attr_type, AttributeType):
                raise SchemaError(f"attribute {name!r} has no valid type")
            seen.add(name)

    @classmethod
    def parse(cls, relation_name: str, text: str) -> Schema:
        """Parse ``"sample_id:int,intensity_1:decimal(6,3)"``.

        Commas inside parentheses belong to the type.
        """
        attributes = []
        for part in _split_top_level(text):
            name, sep, type_text = part.partition(":")
            if not sep:
                raise SchemaError(f"attribute spec {part!r} lacks ':<type>'")
            attributes.append((name.strip(), AttributeType.parse(type_text)))
        return cls(relation_name, tuple(attributes))

    @property
    def attribute_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.attributes)

    def index_of(self, name: str) -> int:
        for index, (attr_name, _) in enumerate(self.attributes):
            if attr_name == name:
                return index
        raise UnknownAttributeError(f"relation {self.relation_name} has no attribute {name!r}")

    def type_of(self, name: str) -> AttributeType:
        return self.attributes[self.index_of(name)][1]

    def conform(self, values: Sequence[Any]) -> Tuple[Value, ...]:
        """Check (or parse) a row against this schema.

        Values may already be :class:`Value` instances or plain text/scalars.

        Raises:
            TypeMismatchError: On wrong arity or a value of the wrong type.
        """
        if len(values) != len(self.attributes):
            raise TypeMismatchError(
                f"{self.relation_name} expects {len(self.attributes)} values, got {len(values)}"
            )
        row = []
        for (name, attr_type), value in zip(self.attributes, values):
            if isinstance(value, Value):
                if value.type != attr_type:
                    raise TypeMismatchError(
                        f"{self.relation_name}.{name} expects {attr_type}, got {value.type}"
                    )
                row.append(value)
            else:
                try:
                    row.append(Value.of(attr_type, value))
                except TypeMismatchError as exc:
                    raise TypeMismatchError(f"{self.relation_name}.{name}: {exc}") from exc
        return tuple(row)

    def render(self) -> str:
        return ",".join(f"{name}:{attr_type}" for name, attr_type in self.attributes)


def _split_top_level(text: str) -> List[str]:
    parts, depth, current = [], 0, []
    for char in text:
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
        if char == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(char)
    if "".join(current).strip():
        parts.append("".join(current).strip())
    return parts


@dataclass(frozen=True)
class AnnotatedTuple:
    values: Tuple[Value, ...]
    id: ProvenanceId


@dataclass(frozen=True)
class RelationState:
    """Tuples of one relation as visible in a snapshot, in insertion order."""

    schema: Schema
    tuples: Tuple[AnnotatedTuple, ...]

    def __iter__(self) -> Iterator[AnnotatedTuple]:
        return iter(self.tuples)

    def __len__(self) -> int:
        return len(self.tuples)

    def get(self, pid: ProvenanceId) -> Optional[AnnotatedTuple]:
        for item in self.tuples:
            if item.id == pid:
                return item
        return None


@dataclass(frozen=True)
class DatabaseState:
    """Immutable, read-only view of the database at one logical timestamp."""

    version: int
    relations: Mapping[str, RelationState]

    def relation(self, name: str) -> RelationState:
        try:
            return self.relations[name]
        except KeyError:
            raise UnknownRelationError(f"unknown relation: {name}") from None

    @property
    def relation_names(self) -> Tuple[str, ...]:
        return tuple(self.relations)

    def ids(self) -> Tuple[ProvenanceId, ...]:
        return tuple(item.id for rel in self.relations.values() for item in rel)

    def restricted_to(self, ids: Collection[ProvenanceId]) -> DatabaseState:
        """Sub-database holding only the tuples whose ID is in ``ids``."""
        keep = set(ids)
        return self._filtered(lambda item: item.id in keep)

    def without(self, ids: Collection[ProvenanceId]) -> DatabaseState:
        """Sub-database with the tuples whose ID is in ``ids`` removed."""
        drop = set(ids)
        return self._filtered(lambda item: item.id not in drop)

    def _filtered(self, predicate: Callable[[AnnotatedTuple], bool]) -> DatabaseState:
        relations = {
            name: RelationState(rel.schema, tuple(item for item in rel if predicate(item)))
            for name, rel in self.relations.items()
        }
        return DatabaseState(self.version, MappingProxyType(relations))


@dataclass(frozen=True)
class TupleChange:
    before: AnnotatedTuple
    after: AnnotatedTuple


@dataclass(frozen=True)
class SnapshotDiff:
    """Evolution between two snapshots of the same database."""

    t_from: int
    t_to: int
    added: Mapping[str, Tuple[AnnotatedTuple, ...]]
    changed: Mapping[str, Tuple[TupleChange, ...]]

    @property
    def is_empty(self) -> bool:
        return not any(self.added.values()) and not any(self.changed.values())


@dataclass
class _StoredVersion:
    version: int
    values: Tuple[Value, ...]


@dataclass
class _StoredRelation:
    schema: Schema
    prefix: str
    counter: int = 0
    # base -> versions, oldest first; dict order is insertion order of bases
    history: Dict[str, List[_StoredVersion]] = field(default_factory=dict)


class VersionedDatabase:
    """Append-only, versioned relational store.

    Mutating methods require exclusive access; the class does no locking.

    Args:
        versioned: Render every provenance ID with its timestamp, not only the
            IDs of tuples that have been updated.
    """

    def __init__(self, versioned: bool = False):
        self.versioned = versioned
        self.current_version = INITIAL_VERSION
        self._relations: Dict[str, _StoredRelation] = {}

    # -- definition -------------------------------------------------------

    def define_relation(self, schema: Schema) -> None:
        """Create an empty relation.

        Raises:
            DuplicateRelationError: If the relation name is taken.
        """
        if schema.relation_name in self._relations:
            raise DuplicateRelationError(f"duplicate relation: {schema.relation_name}")
        prefix = self._allocate_prefix(schema.relation_name)
        self._relations[schema.relation_name] = _StoredRelation(schema, prefix)
        logger.info("Defined relation %s (%s), id prefix %r", schema.relation_name,
                    schema.render(), prefix)

    def _allocate_prefix(self, relation_name: str) -> str:
        prefix = relation_name[0].lower()
        if prefix in {rel.prefix for rel in self._relations.values()}:
            return f"rel_{relation_name}_"
        return prefix

    def schema(self, relation: str) -> Schema:
        return self._stored(relation).schema

    @property
    def relation_names(self) -> Tuple[str, ...]:
        return tuple(self._relations)

    def _stored(self, relation: str) -> _StoredRelation:
        try:
            return self._relations[relation]
        except KeyError:
            raise UnknownRelationError(f"unknown relation: {relation}") from None

    # -- mutation ---------------------------------------------------------

    def insert_tuple(self, relation: str, values: Sequence[Any]) -> ProvenanceId:
        """Insert a new logical tuple with a fresh base identifier.

        Returns:
            ProvenanceId: The identifier of the stored tuple
        """
        stored = self._stored(relation)
        row = stored.schema.conform(values)
        stored.counter += 1
        base = f"{stored.prefix}{stored.counter}"
        stored.history[base] = [_StoredVersion(self.current_version, row)]
        pid = self._id_for(stored, base, self.current_version)
        logger.debug("Inserted %s into %s", pid, relation)
        return pid

    def update_tuple(self, relation: str, base: str, values: Sequence[Any]) -> ProvenanceId:
        """Store a new version of an existing tuple.

        The database version advances by one and the new version is stamped
        with it; earlier versions stay visible to older snapshots. Identical
        values still produce a new version.
        """
        stored = self._stored(relation)
        if base not in stored.history:
            raise UnknownTupleError(f"relation {relation} has no tuple {base}")
        row = stored.schema.conform(values)
        self.current_version += 1
        stored.history[base].append(_StoredVersion(self.current_version, row))
        pid = self._id_for(stored, base, self.current_version)
        logger.info("Updated %s.%s, database now at t%d", relation, base, self.current_version)
        return pid

    def _id_for(self, stored: _StoredRelation, base: str, version: int) -> ProvenanceId:
        if self.versioned or len(stored.history[base]) > 1:
            return ProvenanceId(base, version)
        return ProvenanceId(base)

    # -- reading ----------------------------------------------------------

    def ids_for_base(self, relation: str, base: str) -> Tuple[ProvenanceId, ...]:
        """Every identifier a logical tuple has carried, oldest first."""
        stored = self._stored(relation)
        if base not in stored.history:
            raise UnknownTupleError(f"relation {relation} has no tuple {base}")
        return tuple(self._id_for(stored, base, item.version) for item in stored.history[base])

    def stored_ids(self, relation: str, base: str) -> Tuple[ProvenanceId, ...]:
        """Like :meth:`ids_for_base`, but always stamped with the stored version."""
        stored = self._stored(relation)
        if base not in stored.history:
            raise UnknownTupleError(f"relation {relation} has no tuple {base}")
        return tuple(ProvenanceId(base, item.version) for item in stored.history[base])

    def all_ids(self, relation: str) -> Tuple[ProvenanceId, ...]:
        stored = self._stored(relation)
        return tuple(pid for base in stored.history for pid in self.ids_for_base(relation, base))

    def snapshot_at(self, t: int) -> DatabaseState:
        """Read-only state holding, per base, its latest version at or before ``t``.

        Raises:
            VersionRangeError: If ``t`` is negative or beyond the current version.
        """
        self._check_version(t)
        relations = {}
        for name, stored in self._relations.items():
            visible = []
            for base, versions in stored.history.items():
                current = None
                for item in versions:
                    if item.version <= t:
                        current = item
                if current is not None:
                    visible.append(
                        AnnotatedTuple(current.values, self._id_for(stored, base, current.version))
                    )
            relations[name] = RelationState(stored.schema, tuple(visible))
        return DatabaseState(t, MappingProxyType(relations))

    @property
    def state(self) -> DatabaseState:
        """The live state, i.e. the snapshot at the current version."""
        return self.snapshot_at(self.current_version)

    def _check_version(self, t: int) -> None:
        if not GENESIS_VERSION <= t <= self.current_version:
            raise VersionRangeError(
                f"timestamp t{t} out of range [t{GENESIS_VERSION}, t{self.current_version}]"
            )

    def diff_snapshots(self, t_from: int, t_to: int) -> SnapshotDiff:
        """Tuples added and tuples changed between two snapshots."""
        self._check_version(t_from)
        self._check_version(t_to)
        if t_from > t_to:
            raise VersionRangeError(f"t{t_from} is later than t{t_to}")
        before, after = self.snapshot_at(t_from), self.snapshot_at(t_to)
        added: Dict[str, Tuple[AnnotatedTuple, ...]] = {}
        changed: Dict[str, Tuple[TupleChange, ...]] = {}
        for name in self._relations:
            old_by_base = {item.id.base: item for item in before.relation(name)}
            rel_added, rel_changed = [], []
            for item in after.relation(name):
                previous = old_by_base.get(item.id.base)
                if previous is None:
                    rel_added.append(item)
                elif previous.id != item.id:
                    rel_changed.append(TupleChange(previous, item))
            added[name] = tuple(rel_added)
            changed[name] = tuple(rel_changed)
        return SnapshotDiff(t_from, t_to, MappingProxyType(added), MappingProxyType(changed))

    # -- persistence ------------------------------------------------------

    def to_document(self) -> Dict[str, Any]:
        relations = []
        for name, stored in self._relations.items():
            relations.append(
                {
                    "name": name,
                    "schema": stored.schema.render(),
                    "prefix": stored.prefix,
                    "counter": stored.counter,
                    "tuples": [
                        {
                            "base": base,
                            "versions": [
                                {"version": item.version, "values": [str(v) for v in item.values]}
                                for item in versions
                            ],
                        }
                        for base, versions in stored.history.items()
                    ],
                }
            )
        return {
            "current_version": self.current_version,
            "versioned": self.versioned,
            "relations": relations,
        }

    @classmethod
    def from_document(cls, document: Mapping[str, Any]) -> VersionedDatabase:
        """Rebuild a database from :meth:`to_document` output.

        Raises:
            SchemaError: If the document is malformed or violates an invariant.
        """
        try:
            db = cls(versioned=bool(document.get("versioned", False)))
            db.current_version = int(document["current_version"])
            for entry in document["relations"]:
                schema = Schema.parse(entry["name"], entry["schema"])
                stored = _StoredRelation(schema, entry["prefix"], int(entry["counter"]))
                for tuple_entry in entry["tuples"]:
                    versions = []
                    for item in tuple_entry["versions"]:
                        version = int(item["version"])
                        if not INITIAL_VERSION <= version <= db.current_version:
                            raise SchemaError(f"tuple version t{version} out of range")
                        if versions and versions[-1].version >= version:
                            raise SchemaError(f"versions of {tuple_entry['base']} not increasing")
                        versions.append(
                            _StoredVersion(version, schema.conform(item["values"]))
                        )
                    stored.history[tuple_entry["base"]] = versions
                db._relations[schema.relation_name] = stored
        except (KeyError, TypeError, ValueError, TypeMismatchError) as exc:
            raise SchemaError(f"malformed database document: {exc}") from exc
        return db


def build_database(
    schemas: Iterable[Schema], rows: Mapping[str, Iterable[Sequence[Any]]], versioned: bool = False
) -> VersionedDatabase:
    """Convenience constructor: define relations and insert rows in order."""
    db = VersionedDatabase(versioned=versioned)
    for schema in schemas:
        db.define_relation(schema)
    for relation, relation_rows in rows.items():
        for row in relation_rows:
            db.insert_tuple(relation, row)
    return db
