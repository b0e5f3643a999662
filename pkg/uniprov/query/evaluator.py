"""
K-relation evaluation of relational algebra over a database snapshot.

Every intermediate row carries a provenance polynomial and, per attribute,
the set of source cells its value was copied from:

- Scan annotates a tuple with its own identifier,
- Select keeps the annotation of qualifying rows,
- NaturalJoin multiplies the annotations of the combined rows,
- Project and Union merge value-equal rows by adding their annotations.

The result is a set: no two rows share their values.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from uniprov.annotations import Polynomial, WitnessBasis, poly_add, poly_mul, to_witness_basis
from uniprov.common.errors import (
    LiteralRangeError,
    QueryError,
    RowNotFoundError,
    TypeMismatchError,
    UnknownAttributeError,
)
from uniprov.common.logging import get_logger
from uniprov.data.model import DatabaseState, Schema
from uniprov.data.types import MAX_DECIMAL_PRECISION, AttributeType, ProvenanceId, TypeKind, Value
from uniprov.query import algebra
from uniprov.query.algebra import (
    AlgebraExpr,
    AttributeRef,
    Comparison,
    Literal,
    LiteralKind,
    NaturalJoin,
    Operand,
    Predicate,
    Project,
    Scan,
    Select,
)

logger = get_logger(__name__)

RESULT_RELATION = "result"

Row = Tuple[Value, ...]


@dataclass(frozen=True, order=True)
class SourceCell:
    """A cell of a source relation: ``(relation, tuple id, attribute)``."""

    relation: str
    id: ProvenanceId
    attribute: str

    def __str__(self) -> str:
        return f"({self.relation}, {self.id}, {self.attribute})"


@dataclass(frozen=True)
class AttributeOrigin:
    """Declared type of an output attribute and the relations it flows from."""

    type: AttributeType
    sources: FrozenSet[str]

    def __str__(self) -> str:
        return f"{self.type} from {', '.join(sorted(self.sources))}"


# -- headers --------------------------------------------------------------------


@dataclass(frozen=True)
class Header:
    """Attributes, types and source relations of an intermediate relation."""

    attributes: Tuple[str, ...]
    origins: Mapping[str, AttributeOrigin]

    def index_of(self, name: str) -> int:
        try:
            return self.attributes.index(name)
        except ValueError:
            raise UnknownAttributeError(f"unknown attribute: {name}") from None

    def type_of(self, name: str) -> AttributeType:
        self.index_of(name)
        return self.origins[name].type


def scan_header(state: DatabaseState, relation: str) -> Header:
    schema = state.relation(relation).schema
    return Header(
        schema.attribute_names,
        {
            name: AttributeOrigin(attr_type, frozenset({relation}))
            for name, attr_type in schema.attributes
        },
    )


def join_header(left: Header, right: Header) -> Tuple[Header, Tuple[str, ...]]:
    """Output header of a natural join and the shared attribute names.

    Raises:
        QueryError: If the inputs share no attribute.
        TypeMismatchError: If a shared attribute has different types.
    """
    shared = tuple(name for name in left.attributes if name in right.origins)
    if not shared:
        raise QueryError(
            f"natural join without shared attributes: ({', '.join(left.attributes)}) "
            f"and ({', '.join(right.attributes)})"
        )
    origins = dict(left.origins)
    for name in shared:
        if left.origins[name].type != right.origins[name].type:
            raise TypeMismatchError(
                f"join attribute {name} is {left.origins[name].type} on the left "
                f"and {right.origins[name].type} on the right"
            )
        origins[name] = AttributeOrigin(
            left.origins[name].type, left.origins[name].sources | right.origins[name].sources
        )
    extra = tuple(name for name in right.attributes if name not in left.origins)
    for name in extra:
        origins[name] = right.origins[name]
    return Header(left.attributes + extra, origins), shared


def project_header(child: Header, attributes: Optional[Sequence[str]]) -> Header:
    if attributes is None:
        return child
    seen = set()
    for name in attributes:
        child.index_of(name)
        if name in seen:
            raise QueryError(f"attribute {name} projected twice")
        seen.add(name)
    return Header(tuple(attributes), {name: child.origins[name] for name in attributes})


def union_header(left: Header, right: Header) -> Header:
    if left.attributes != right.attributes:
        raise QueryError(
            f"union of different schemas: ({', '.join(left.attributes)}) "
            f"and ({', '.join(right.attributes)})"
        )
    origins = {}
    for name in left.attributes:
        if left.origins[name].type != right.origins[name].type:
            raise TypeMismatchError(
                f"union attribute {name} is {left.origins[name].type} on the left "
                f"and {right.origins[name].type} on the right"
            )
        origins[name] = AttributeOrigin(
            left.origins[name].type, left.origins[name].sources | right.origins[name].sources
        )
    return Header(left.attributes, origins)


# -- predicates -----------------------------------------------------------------


def _literal_type(literal: Literal) -> AttributeType:
    if literal.kind is LiteralKind.TEXT:
        return AttributeType.text()
    if literal.kind is LiteralKind.BOOLEAN:
        return AttributeType.boolean()
    if "." not in literal.text:
        return AttributeType.integer()
    scale = len(literal.text.split(".", 1)[1])
    return AttributeType.decimal(MAX_DECIMAL_PRECISION, scale)


def _literal_value(
    literal: Literal, attr_type: AttributeType, attribute: Optional[str] = None
) -> Value:
    target = f"{attribute} ({attr_type})" if attribute is not None else str(attr_type)
    compatible = {
        LiteralKind.NUMBER: (TypeKind.INTEGER, TypeKind.DECIMAL),
        LiteralKind.TEXT: (TypeKind.TEXT,),
        LiteralKind.BOOLEAN: (TypeKind.BOOLEAN,),
    }[literal.kind]
    if attr_type.kind not in compatible:
        raise TypeMismatchError(f"cannot compare {target} with {literal.kind} literal {literal}")
    try:
        return Value.parse(attr_type, literal.text)
    except TypeMismatchError as exc:
        if literal.kind is LiteralKind.NUMBER:
            raise LiteralRangeError(_range_message(literal, attr_type, target)) from exc
        raise TypeMismatchError(f"literal {literal} does not fit {target}: {exc}") from exc


def _range_message(literal: Literal, attr_type: AttributeType, target: str) -> str:
    if attr_type.kind is TypeKind.INTEGER:
        return f"literal {literal} is not a whole number, as {target} requires"
    scale = attr_type.scale or 0
    fraction = literal.text.partition(".")[2].rstrip("0")
    if len(fraction) > scale:
        return f"literal {literal} has more than {scale} fractional digits, the scale of {target}"
    integer_digits = (attr_type.precision or 0) - scale
    return (
        f"literal {literal} exceeds the precision of {target}, "
        f"which holds at most {integer_digits} digits before the decimal point"
    )


def _common_literal_type(left: Literal, right: Literal) -> AttributeType:
    left_type, right_type = _literal_type(left), _literal_type(right)
    if left_type == right_type:
        return left_type
    numeric = (TypeKind.INTEGER, TypeKind.DECIMAL)
    if left_type.kind in numeric and right_type.kind in numeric:
        scale = max(left_type.scale or 0, right_type.scale or 0)
        return AttributeType.decimal(MAX_DECIMAL_PRECISION, scale)
    raise TypeMismatchError(f"cannot compare {left} with {right}")


_BoundOperand = Union[int, Value]  # column index or constant


@dataclass(frozen=True)
class BoundComparison:
    """A comparison resolved against a header."""

    comparison: Comparison
    left: _BoundOperand
    right: _BoundOperand

    def operands(self, row: Row) -> Tuple[Value, Value]:
        left = row[self.left] if isinstance(self.left, int) else self.left
        right = row[self.right] if isinstance(self.right, int) else self.right
        return left, right

    def holds(self, row: Row) -> bool:
        left, right = self.operands(row)
        return self.comparison.op.apply(left, right)


def _bind_comparison(comparison: Comparison, header: Header) -> BoundComparison:
    def attribute_type(operand: Operand) -> Optional[AttributeType]:
        return header.type_of(operand.name) if isinstance(operand, AttributeRef) else None

    left_type, right_type = attribute_type(comparison.left), attribute_type(comparison.right)
    if left_type is not None and right_type is not None and left_type != right_type:
        raise TypeMismatchError(
            f"cannot compare {comparison.left} ({left_type}) with {comparison.right} ({right_type})"
        )
    if left_type is None and right_type is None:
        assert isinstance(comparison.left, Literal) and isinstance(comparison.right, Literal)
        left_type = right_type = _common_literal_type(comparison.left, comparison.right)

    def bind(
        operand: Operand, other: Operand, other_type: Optional[AttributeType]
    ) -> _BoundOperand:
        if isinstance(operand, AttributeRef):
            return header.index_of(operand.name)
        assert other_type is not None
        attribute = other.name if isinstance(other, AttributeRef) else None
        return _literal_value(operand, other_type, attribute)

    return BoundComparison(
        comparison,
        bind(comparison.left, comparison.right, right_type),
        bind(comparison.right, comparison.left, left_type),
    )


@dataclass(frozen=True)
class BoundPredicate:
    """A predicate resolved against a header, ready to test rows."""

    predicate: Predicate
    comparisons: Mapping[Comparison, BoundComparison]

    def holds(self, row: Row) -> bool:
        return self._holds(self.predicate, row)

    def _holds(self, predicate: Predicate, row: Row) -> bool:
        if isinstance(predicate, Comparison):
            return self.comparisons[predicate].holds(row)
        if isinstance(predicate, algebra.Not):
            return not self._holds(predicate.child, row)
        if isinstance(predicate, algebra.And):
            return all(self._holds(item, row) for item in predicate.items)
        return any(self._holds(item, row) for item in predicate.items)

    def blame(self, row: Row) -> Optional[BoundComparison]:
        """The first comparison, left to right, responsible for rejecting ``row``.

        Returns None when the row satisfies the predicate.
        """
        if self.holds(row):
            return None
        return self._blame(self.predicate, row, expected=True)

    def _blame(self, predicate: Predicate, row: Row, expected: bool) -> BoundComparison:
        # precondition: predicate evaluates to ``not expected`` on row
        if isinstance(predicate, Comparison):
            return self.comparisons[predicate]
        if isinstance(predicate, algebra.Not):
            return self._blame(predicate.child, row, not expected)
        for item in predicate.items:
            if self._holds(item, row) != expected:
                return self._blame(item, row, expected)
        raise AssertionError("blame requested for a predicate with the expected outcome")


def bind_predicate(predicate: Predicate, header: Header) -> BoundPredicate:
    """Resolve names and type literals of ``predicate`` against ``header``.

    Raises:
        UnknownAttributeError: If a compared attribute is not in the header.
        TypeMismatchError: If compared operands have different types.
    """
    bound = {c: _bind_comparison(c, header) for c in algebra.comparisons(predicate)}
    return BoundPredicate(predicate, MappingProxyType(bound))


# -- evaluation -----------------------------------------------------------------


@dataclass
class _Annotated:
    polynomial: Polynomial
    where: Tuple[FrozenSet[SourceCell], ...]


class _Relation:
    """Mutable K-relation under construction; keyed by row values."""

    def __init__(self, header: Header):
        self.header = header
        self.rows: Dict[Row, _Annotated] = {}

    def add(
        self, values: Row, polynomial: Polynomial, where: Sequence[FrozenSet[SourceCell]]
    ) -> None:
        existing = self.rows.get(values)
        if existing is None:
            self.rows[values] = _Annotated(polynomial, tuple(where))
            return
        existing.polynomial = poly_add(existing.polynomial, polynomial)
        existing.where = tuple(a | b for a, b in zip(existing.where, where))


def _evaluate(expr: AlgebraExpr, state: DatabaseState) -> _Relation:
    if isinstance(expr, Scan):
        relation_state = state.relation(expr.relation)
        out = _Relation(scan_header(state, expr.relation))
        for item in relation_state:
            where = [
                frozenset({SourceCell(expr.relation, item.id, name)})
                for name in out.header.attributes
            ]
            out.add(item.values, Polynomial.variable(item.id), where)
        return out

    if isinstance(expr, Select):
        child = _evaluate(expr.child, state)
        bound = bind_predicate(expr.predicate, child.header)
        out = _Relation(child.header)
        for values, annotated in child.rows.items():
            if bound.holds(values):
                out.add(values, annotated.polynomial, annotated.where)
        return out

    if isinstance(expr, Project):
        child = _evaluate(expr.child, state)
        header = project_header(child.header, expr.attributes)
        indexes = [child.header.index_of(name) for name in header.attributes]
        out = _Relation(header)
        for values, annotated in child.rows.items():
            out.add(
                tuple(values[i] for i in indexes),
                annotated.polynomial,
                [annotated.where[i] for i in indexes],
            )
        return out

    if isinstance(expr, NaturalJoin):
        left = _evaluate(expr.left, state)
        right = _evaluate(expr.right, state)
        header, shared = join_header(left.header, right.header)
        left_keys = [left.header.index_of(name) for name in shared]
        right_keys = [right.header.index_of(name) for name in shared]
        right_extra = [
            right.header.index_of(name) for name in header.attributes[len(left.header.attributes):]
        ]
        by_key: Dict[Row, List[Tuple[Row, _Annotated]]] = {}
        for values, annotated in right.rows.items():
            by_key.setdefault(tuple(values[i] for i in right_keys), []).append((values, annotated))
        out = _Relation(header)
        for l_values, l_annotated in left.rows.items():
            key = tuple(l_values[i] for i in left_keys)
            for r_values, r_annotated in by_key.get(key, ()):
                where = list(l_annotated.where)
                for l_index, r_index in zip(left_keys, right_keys):
                    where[l_index] = where[l_index] | r_annotated.where[r_index]
                where.extend(r_annotated.where[i] for i in right_extra)
                out.add(
                    l_values + tuple(r_values[i] for i in right_extra),
                    poly_mul(l_annotated.polynomial, r_annotated.polynomial),
                    where,
                )
        return out

    left = _evaluate(expr.left, state)
    right = _evaluate(expr.right, state)
    out = _Relation(union_header(left.header, right.header))
    for source in (left, right):
        for values, annotated in source.rows.items():
            out.add(values, annotated.polynomial, annotated.where)
    return out


def header_of(expr: AlgebraExpr, state: DatabaseState) -> Header:
    """Output header of ``expr`` without evaluating any row."""
    if isinstance(expr, Scan):
        return scan_header(state, expr.relation)
    if isinstance(expr, Select):
        header = header_of(expr.child, state)
        bind_predicate(expr.predicate, header)
        return header
    if isinstance(expr, Project):
        return project_header(header_of(expr.child, state), expr.attributes)
    if isinstance(expr, NaturalJoin):
        return join_header(header_of(expr.left, state), header_of(expr.right, state))[0]
    return union_header(header_of(expr.left, state), header_of(expr.right, state))


# -- results --------------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    values: Row
    polynomial: Polynomial
    where: Mapping[str, FrozenSet[SourceCell]]


RowRef = Union[int, ResultRow, Sequence[Value]]  # 1-based position, row or values


def _row_sort_key(values: Row) -> tuple:
    return tuple(value.sort_key() for value in values)


@dataclass(frozen=True)
class AnnotatedResult:
    """Query result with provenance; rows sorted by their values."""

    schema: Schema
    rows: Tuple[ResultRow, ...]
    type_map: Mapping[str, AttributeOrigin]

    def __len__(self) -> int:
        return len(self.rows)

    def row(self, number: int) -> ResultRow:
        """Row by 1-based position in the sorted result."""
        if not 1 <= number <= len(self.rows):
            raise RowNotFoundError(f"no row {number}; the result has {len(self.rows)} rows")
        return self.rows[number - 1]

    def find(self, values: Iterable[Value]) -> ResultRow:
        wanted = tuple(values)
        for row in self.rows:
            if row.values == wanted:
                return row
        raise RowNotFoundError(f"no row ({', '.join(str(v) for v in wanted)}) in the result")

    def matching(self, expectation: Mapping[str, Value]) -> Tuple[ResultRow, ...]:
        """Rows whose values equal ``expectation`` on the named attributes."""
        indexes = {name: self.schema.index_of(name) for name in expectation}
        return tuple(
            row
            for row in self.rows
            if all(row.values[indexes[name]] == value for name, value in expectation.items())
        )


def evaluate(expr: AlgebraExpr, state: DatabaseState) -> AnnotatedResult:
    """Evaluate ``expr`` on ``state`` with polynomial and where annotations.

    Raises:
        UnknownRelationError: For a scan of an unknown relation.
        UnknownAttributeError: For an unknown attribute in a predicate or projection.
        TypeMismatchError: For comparisons or joins over differently typed operands.
        QueryError: For joins without shared attributes or unions of different schemas.
    """
    relation = _evaluate(expr, state)
    header = relation.header
    schema = Schema(
        RESULT_RELATION, tuple((name, header.origins[name].type) for name in header.attributes)
    )
    rows = tuple(
        ResultRow(
            values,
            annotated.polynomial,
            MappingProxyType(dict(zip(header.attributes, annotated.where))),
        )
        for values, annotated in sorted(
            relation.rows.items(), key=lambda item: _row_sort_key(item[0])
        )
    )
    logger.debug("Evaluated %s at t%d: %d rows", expr, state.version, len(rows))
    return AnnotatedResult(schema, rows, MappingProxyType(dict(header.origins)))


def _resolve_row(result: AnnotatedResult, row: RowRef) -> ResultRow:
    if isinstance(row, ResultRow):
        if row not in result.rows:
            raise RowNotFoundError("row is not part of the result")
        return row
    if isinstance(row, int):
        return result.row(row)
    return result.find(row)


def how_provenance(result: AnnotatedResult, row: RowRef) -> Polynomial:
    """The provenance polynomial of a row."""
    return _resolve_row(result, row).polynomial


def why_provenance(result: AnnotatedResult, row: RowRef) -> WitnessBasis:
    """Witness basis of a row (the variable sets of its polynomial)."""
    return to_witness_basis(_resolve_row(result, row).polynomial)


def where_provenance(
    result: AnnotatedResult, row: RowRef, attribute: str
) -> FrozenSet[SourceCell]:
    """Source cells whose value was copied into ``row.attribute``.

    Raises:
        RowNotFoundError: If the row is not in the result.
        UnknownAttributeError: If the result has no such attribute.
    """
    resolved = _resolve_row(result, row)
    if attribute not in resolved.where:
        raise UnknownAttributeError(f"result has no attribute {attribute!r}")
    return resolved.where[attribute]


def what_provenance(result: AnnotatedResult) -> Mapping[str, AttributeOrigin]:
    """Declared type and source relations of every output attribute."""
    return result.type_map
