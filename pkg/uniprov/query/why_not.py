"""
Why-not explanations for expected but missing query results.

The query is re-run as a lineage enumeration with every selection disabled:
each derivation (a combination of source tuples that survives the joins)
remembers the selections it would have failed. Findings are chosen in order:

1. derivations that produce the expected values but fail a selection
   (:class:`PickySelection`, one per derivation, first failure bottom-up and
   left to right),
2. otherwise source tuples carrying the expected values that found no join
   partner (:class:`MissingJoinPartner`),
3. otherwise expected values that no source tuple holds
   (:class:`AbsentSourceValue`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, List, Mapping, Sequence, Tuple, Union

from uniprov.common.errors import NotMissingError, UnknownAttributeError
from uniprov.common.logging import get_logger
from uniprov.data.model import DatabaseState
from uniprov.data.types import ProvenanceId, Value
from uniprov.query.algebra import AlgebraExpr, NaturalJoin, Project, Scan, Select, scanned_relations
from uniprov.query.evaluator import (
    Header,
    Row,
    bind_predicate,
    evaluate,
    header_of,
    join_header,
    project_header,
    scan_header,
    union_header,
)

logger = get_logger(__name__)


@dataclass(frozen=True)
class PickySelection:
    """A derivation of the expected values that a selection rejected."""

    predicate: str
    witness: FrozenSet[ProvenanceId]
    comparison: str
    operands: Tuple[Value, Value]

    kind = "picky-selection"

    def __str__(self) -> str:
        ids = ",".join(str(pid) for pid in sorted(self.witness))
        left, right = self.operands
        return f"selection {self.comparison} rejects {{{ids}}}: {left} vs {right}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "predicate": self.predicate,
            "comparison": self.comparison,
            "witness": [str(pid) for pid in sorted(self.witness)],
            "operands": [str(value) for value in self.operands],
        }


@dataclass(frozen=True)
class MissingJoinPartner:
    """A source tuple with the expected values that no join partner matched."""

    id: ProvenanceId
    relation: str
    join_values: Tuple[Tuple[str, Value], ...]

    kind = "missing-join-partner"

    def __str__(self) -> str:
        values = ", ".join(f"{name} = {value}" for name, value in self.join_values)
        return f"{self.relation} tuple {self.id} has no join partner with {values}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "id": str(self.id),
            "relation": self.relation,
            "join_values": {name: str(value) for name, value in self.join_values},
        }


@dataclass(frozen=True)
class AbsentSourceValue:
    """An expected value missing from the sources.

    ``in_combination`` is set when every value exists somewhere on its own but
    no source tuple combination brings them together.
    """

    attribute: str
    value: Value
    in_combination: bool = False

    kind = "absent-source-value"

    def __str__(self) -> str:
        if self.in_combination:
            return f"no source combination yields {self.attribute} = {self.value}"
        return f"no source tuple holds {self.attribute} = {self.value}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "attribute": self.attribute,
            "value": str(self.value),
            "in_combination": self.in_combination,
        }


Finding = Union[PickySelection, MissingJoinPartner, AbsentSourceValue]


@dataclass(frozen=True)
class WhyNotExplanation:
    expectation: Tuple[Tuple[str, Value], ...]
    findings: Tuple[Finding, ...]

    def __len__(self) -> int:
        return len(self.findings)

    def __iter__(self):
        return iter(self.findings)

    def expectation_text(self) -> str:
        return ", ".join(f"{name}={value}" for name, value in self.expectation)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "expectation": {name: str(value) for name, value in self.expectation},
            "findings": [finding.to_dict() for finding in self.findings],
        }


# -- lineage enumeration --------------------------------------------------------


@dataclass(frozen=True)
class _Failure:
    predicate: str
    comparison: str
    operands: Tuple[Value, Value]


@dataclass(frozen=True)
class _Derivation:
    values: Row
    ids: Tuple[ProvenanceId, ...]
    failures: Tuple[_Failure, ...] = ()


@dataclass(frozen=True)
class _Unmatched:
    """A join input derivation that met no partner."""

    ids: Tuple[ProvenanceId, ...]
    join_values: Tuple[Tuple[str, Value], ...]


class _LineageWalker:
    def __init__(self, state: DatabaseState):
        self.state = state
        self.unmatched: List[_Unmatched] = []

    def walk(self, expr: AlgebraExpr) -> Tuple[Header, List[_Derivation]]:
        if isinstance(expr, Scan):
            header = scan_header(self.state, expr.relation)
            return header, [
                _Derivation(item.values, (item.id,)) for item in self.state.relation(expr.relation)
            ]

        if isinstance(expr, Select):
            header, derivations = self.walk(expr.child)
            bound = bind_predicate(expr.predicate, header)
            out = []
            for derivation in derivations:
                blamed = bound.blame(derivation.values)
                if blamed is None:
                    out.append(derivation)
                    continue
                failure = _Failure(
                    str(expr.predicate), str(blamed.comparison), blamed.operands(derivation.values)
                )
                out.append(
                    _Derivation(derivation.values, derivation.ids, derivation.failures + (failure,))
                )
            return header, out

        if isinstance(expr, Project):
            child_header, derivations = self.walk(expr.child)
            header = project_header(child_header, expr.attributes)
            indexes = [child_header.index_of(name) for name in header.attributes]
            return header, [
                _Derivation(tuple(d.values[i] for i in indexes), d.ids, d.failures)
                for d in derivations
            ]

        if isinstance(expr, NaturalJoin):
            left_header, left = self.walk(expr.left)
            right_header, right = self.walk(expr.right)
            header, shared = join_header(left_header, right_header)
            left_keys = [left_header.index_of(name) for name in shared]
            right_keys = [right_header.index_of(name) for name in shared]
            right_extra = [
                right_header.index_of(name)
                for name in header.attributes[len(left_header.attributes):]
            ]
            out = []
            matched_right = set()
            for l_derivation in left:
                key = tuple(l_derivation.values[i] for i in left_keys)
                matched = False
                for position, r_derivation in enumerate(right):
                    if tuple(r_derivation.values[i] for i in right_keys) != key:
                        continue
                    matched = True
                    matched_right.add(position)
                    out.append(
                        _Derivation(
                            l_derivation.values
                            + tuple(r_derivation.values[i] for i in right_extra),
                            l_derivation.ids + r_derivation.ids,
                            l_derivation.failures + r_derivation.failures,
                        )
                    )
                if not matched:
                    self.unmatched.append(_Unmatched(l_derivation.ids, tuple(zip(shared, key))))
            for position, r_derivation in enumerate(right):
                if position not in matched_right:
                    key = tuple(r_derivation.values[i] for i in right_keys)
                    self.unmatched.append(_Unmatched(r_derivation.ids, tuple(zip(shared, key))))
            return header, out

        left_header, left = self.walk(expr.left)
        right_header, right = self.walk(expr.right)
        return union_header(left_header, right_header), left + right


# -- explanation ----------------------------------------------------------------


def _conform_expectation(
    expectation: Mapping[str, Any], header: Header
) -> Tuple[Tuple[str, Value], ...]:
    if not expectation:
        raise UnknownAttributeError("empty expectation")
    conformed = []
    for name in header.attributes:
        if name not in expectation:
            continue
        raw = expectation[name]
        attr_type = header.type_of(name)
        conformed.append((name, raw if isinstance(raw, Value) else Value.of(attr_type, raw)))
    unknown = sorted(set(expectation) - set(header.attributes))
    if unknown:
        raise UnknownAttributeError(f"expectation names unknown output attribute {unknown[0]}")
    return tuple(conformed)


def parse_expectation(text: str) -> Dict[str, str]:
    """Split ``"voltage_2=1.3,sample_id=1"`` into attribute/value text pairs."""
    pairs: Dict[str, str] = {}
    for part in text.split(","):
        name, sep, value = part.partition("=")
        if not sep or not name.strip():
            raise UnknownAttributeError(f"expectation {part.strip()!r} is not attribute=value")
        pairs[name.strip()] = value.strip()
    return pairs


def _matches(
    values: Row, indexes: Mapping[str, int], expectation: Sequence[Tuple[str, Value]]
) -> bool:
    return all(values[indexes[name]] == value for name, value in expectation)


def why_not(
    expr: AlgebraExpr, state: DatabaseState, expectation: Mapping[str, Any]
) -> WhyNotExplanation:
    """Explain why no result row of ``expr`` on ``state`` carries ``expectation``.

    ``expectation`` maps output attributes to values (or their text form).

    Raises:
        NotMissingError: If a result row matches the expectation.
        UnknownAttributeError: If the expectation names an unknown attribute.
    """
    header = header_of(expr, state)
    expected = _conform_expectation(expectation, header)
    text = ", ".join(f"{name}={value}" for name, value in expected)
    if evaluate(expr, state).matching(dict(expected)):
        raise NotMissingError(text)

    walker = _LineageWalker(state)
    _, derivations = walker.walk(expr)
    indexes = {name: header.index_of(name) for name, _ in expected}

    findings: List[Finding] = []
    for derivation in derivations:
        if not _matches(derivation.values, indexes, expected) or not derivation.failures:
            continue
        failure = derivation.failures[0]
        finding = PickySelection(
            failure.predicate, frozenset(derivation.ids), failure.comparison, failure.operands
        )
        if finding not in findings:
            findings.append(finding)

    if not findings:
        findings.extend(_missing_partners(expr, state, expected, walker.unmatched))
    if not findings:
        findings.extend(_absent_values(expr, state, expected))

    logger.debug("why-not %s: %d findings", text, len(findings))
    return WhyNotExplanation(expected, tuple(findings))


def _carriers(
    expr: AlgebraExpr, state: DatabaseState, expected: Sequence[Tuple[str, Value]]
) -> List[Tuple[str, ProvenanceId]]:
    carriers = []
    for relation in scanned_relations(expr):
        relation_state = state.relation(relation)
        names = relation_state.schema.attribute_names
        relevant = [(names.index(name), value) for name, value in expected if name in names]
        if not relevant:
            continue
        for item in relation_state:
            if all(item.values[i] == value for i, value in relevant):
                carriers.append((relation, item.id))
    return carriers


def _missing_partners(
    expr: AlgebraExpr,
    state: DatabaseState,
    expected: Sequence[Tuple[str, Value]],
    unmatched: Sequence[_Unmatched],
) -> List[MissingJoinPartner]:
    findings: List[MissingJoinPartner] = []
    for relation, pid in _carriers(expr, state, expected):
        for event in unmatched:
            if pid not in event.ids:
                continue
            finding = MissingJoinPartner(pid, relation, event.join_values)
            if finding not in findings:
                findings.append(finding)
    return findings


def _absent_values(
    expr: AlgebraExpr, state: DatabaseState, expected: Sequence[Tuple[str, Value]]
) -> List[AbsentSourceValue]:
    present = set()
    for relation in scanned_relations(expr):
        relation_state = state.relation(relation)
        names = relation_state.schema.attribute_names
        for name, value in expected:
            if name in names and any(
                item.values[names.index(name)] == value for item in relation_state
            ):
                present.add(name)
    absent = [AbsentSourceValue(name, value) for name, value in expected if name not in present]
    if absent:
        return absent
    return [AbsentSourceValue(name, value, in_combination=True) for name, value in expected]
