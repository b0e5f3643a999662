"""
Relational algebra expressions and selection predicates.

Expressions are immutable trees. ``str()`` renders them in a compact algebra
notation, e.g. ``π[voltage_2](σ[intensity_1 < intensity_2](R ⋈ S))``.
"""

from __future__ import annotations

import typing
from dataclasses import dataclass
from enum import StrEnum
from typing import Iterator, Optional, Tuple


class Comparator(StrEnum):
    LT = "<"
    LE = "<="
    EQ = "="
    NE = "<>"
    GE = ">="
    GT = ">"

    def apply(self, left, right) -> bool:
        if self is Comparator.LT:
            return left < right
        if self is Comparator.LE:
            return left <= right
        if self is Comparator.EQ:
            return left == right
        if self is Comparator.NE:
            return left != right
        if self is Comparator.GE:
            return left >= right
        return left > right


class LiteralKind(StrEnum):
    NUMBER = "number"
    TEXT = "text"
    BOOLEAN = "boolean"


@dataclass(frozen=True)
class AttributeRef:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Literal:
    """Constant operand as written in the query; typed during evaluation."""

    text: str
    kind: LiteralKind

    def __str__(self) -> str:
        if self.kind is LiteralKind.TEXT:
            return "'" + self.text.replace("'", "''") + "'"
        return self.text


Operand = typing.Union[AttributeRef, Literal]


@dataclass(frozen=True)
class Comparison:
    left: Operand
    op: Comparator
    right: Operand

    def __str__(self) -> str:
        return f"{self.left} {self.op.value} {self.right}"


@dataclass(frozen=True)
class And:
    items: Tuple[Predicate, ...]

    def __str__(self) -> str:
        return " AND ".join(_wrap(item, Or) for item in self.items)


@dataclass(frozen=True)
class Or:
    items: Tuple[Predicate, ...]

    def __str__(self) -> str:
        return " OR ".join(str(item) for item in self.items)


@dataclass(frozen=True)
class Not:
    child: Predicate

    def __str__(self) -> str:
        if isinstance(self.child, Comparison):
            return f"NOT {self.child}"
        return f"NOT ({self.child})"


Predicate = typing.Union[Comparison, And, Or, Not]


def _wrap(predicate: Predicate, kind: type) -> str:
    return f"({predicate})" if isinstance(predicate, kind) else str(predicate)


def comparisons(predicate: Predicate) -> Iterator[Comparison]:
    """Atomic comparisons of a predicate, left to right."""
    if isinstance(predicate, Comparison):
        yield predicate
    elif isinstance(predicate, Not):
        yield from comparisons(predicate.child)
    else:
        for item in predicate.items:
            yield from comparisons(item)


@dataclass(frozen=True)
class Scan:
    relation: str

    def __str__(self) -> str:
        return self.relation


@dataclass(frozen=True)
class Select:
    predicate: Predicate
    child: AlgebraExpr

    def __str__(self) -> str:
        return f"σ[{self.predicate}]({self.child})"


@dataclass(frozen=True)
class Project:
    """Projection; ``attributes=None`` keeps every attribute of the child."""

    attributes: Optional[Tuple[str, ...]]
    child: AlgebraExpr

    def __str__(self) -> str:
        attrs = "*" if self.attributes is None else ", ".join(self.attributes)
        return f"π[{attrs}]({self.child})"


@dataclass(frozen=True)
class NaturalJoin:
    left: AlgebraExpr
    right: AlgebraExpr

    def __str__(self) -> str:
        nested = isinstance(self.right, (NaturalJoin, Union))
        right = f"({self.right})" if nested else str(self.right)
        return f"{self.left} ⋈ {right}"


@dataclass(frozen=True)
class Union:
    left: AlgebraExpr
    right: AlgebraExpr

    def __str__(self) -> str:
        return f"{self.left} ∪ {self.right}"


AlgebraExpr = typing.Union[Scan, Select, Project, NaturalJoin, Union]


def scanned_relations(expr: AlgebraExpr) -> Tuple[str, ...]:
    """Relation names read by the expression, left to right, without repeats."""
    seen: dict = {}
    for node in walk(expr):
        if isinstance(node, Scan):
            seen.setdefault(node.relation, None)
    return tuple(seen)


def walk(expr: AlgebraExpr) -> Iterator[AlgebraExpr]:
    """Pre-order traversal."""
    yield expr
    if isinstance(expr, (Select, Project)):
        yield from walk(expr.child)
    elif isinstance(expr, (NaturalJoin, Union)):
        yield from walk(expr.left)
        yield from walk(expr.right)


def without_selections(expr: AlgebraExpr) -> AlgebraExpr:
    """Same expression with every Select node removed."""
    if isinstance(expr, Select):
        return without_selections(expr.child)
    if isinstance(expr, Project):
        return Project(expr.attributes, without_selections(expr.child))
    if isinstance(expr, NaturalJoin):
        return NaturalJoin(without_selections(expr.left), without_selections(expr.right))
    if isinstance(expr, Union):
        return Union(without_selections(expr.left), without_selections(expr.right))
    return expr
