"""
Attribute types, typed values and provenance identifiers.

Decimal values are stored as exact scaled integers: ``40.027`` in a
``decimal(6,3)`` column is kept as ``40027``. No floating point is involved in
parsing, comparison or rendering.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from enum import StrEnum
from typing import Optional, Union

from uniprov.common.errors import SchemaError, TypeMismatchError

MAX_DECIMAL_PRECISION = 18

IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

_TYPE_PATTERN = re.compile(
    r"^\s*(?P<kind>[A-Za-z]+)\s*(?:\(\s*(?P<precision>\d+)\s*,\s*(?P<scale>\d+)\s*\))?\s*$"
)

_KIND_ALIASES = {
    "int": "integer",
    "integer": "integer",
    "decimal": "decimal",
    "numeric": "decimal",
    "text": "text",
    "string": "text",
    "bool": "boolean",
    "boolean": "boolean",
}


class TypeKind(StrEnum):
    INTEGER = "integer"
    DECIMAL = "decimal"
    TEXT = "text"
    BOOLEAN = "boolean"


def check_identifier(name: str, what: str = "identifier") -> str:
    if not isinstance(name, str) or not IDENTIFIER.match(name):
        raise SchemaError(f"invalid {what}: {name!r}")
    return name


@dataclass(frozen=True)
class AttributeType:
    """Declared type of an attribute."""

    kind: TypeKind
    precision: Optional[int] = None
    scale: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind is TypeKind.DECIMAL:
            if self.precision is None or self.scale is None:
                raise SchemaError("decimal requires precision and scale")
            if not 0 < self.precision <= MAX_DECIMAL_PRECISION:
                raise SchemaError(
                    f"decimal precision must be between 1 and {MAX_DECIMAL_PRECISION}, "
                    f"got {self.precision}"
                )
            if not 0 <= self.scale <= self.precision:
                raise SchemaError(
                    f"decimal scale must be between 0 and precision, got {self.scale}"
                )
        elif self.precision is not None or self.scale is not None:
            raise SchemaError(f"{self.kind} takes no precision or scale")

    @classmethod
    def integer(cls) -> AttributeType:
        return cls(TypeKind.INTEGER)

    @classmethod
    def decimal(cls, precision: int, scale: int) -> AttributeType:
        return cls(TypeKind.DECIMAL, precision, scale)

    @classmethod
    def text(cls) -> AttributeType:
        return cls(TypeKind.TEXT)

    @classmethod
    def boolean(cls) -> AttributeType:
        return cls(TypeKind.BOOLEAN)

    @classmethod
    def parse(cls, text: str) -> AttributeType:
        """Parse ``int``, ``integer``, ``decimal(p,s)``, ``text`` or ``boolean``."""
        match = _TYPE_PATTERN.match(text or "")
        kind = _KIND_ALIASES.get(match.group("kind").lower()) if match else None
        if kind is None:
            raise SchemaError(f"unknown attribute type: {text!r}")
        if kind == "decimal":
            if match.group("precision") is None:
                raise SchemaError(f"bad decimal spec: {text!r}")
            return cls.decimal(int(match.group("precision")), int(match.group("scale")))
        if match.group("precision") is not None:
            raise SchemaError(f"{kind} takes no precision or scale: {text!r}")
        return cls(TypeKind(kind))

    def __str__(self) -> str:
        if self.kind is TypeKind.DECIMAL:
            return f"decimal({self.precision},{self.scale})"
        return self.kind.value

    def parse_value(self, text: str) -> Value:
        """Parse the textual form of a value of this type."""
        return Value.parse(self, text)


@dataclass(frozen=True)
class Value:
    """A scalar tagged with its attribute type.

    ``raw`` holds an int for integer and decimal values (decimals scaled by
    ``10**scale``), a str for text and a bool for boolean values.
    """

    type: AttributeType
    raw: Union[int, str, bool]

    @classmethod
    def parse(cls, attr_type: AttributeType, text: str) -> Value:
        kind = attr_type.kind
        if kind is TypeKind.TEXT:
            return cls(attr_type, text)
        stripped = text.strip()
        if kind is TypeKind.BOOLEAN:
            lowered = stripped.lower()
            if lowered not in ("true", "false"):
                raise TypeMismatchError(f"not a boolean: {text!r}")
            return cls(attr_type, lowered == "true")
        if kind is TypeKind.INTEGER:
            if not re.fullmatch(r"[+-]?\d+", stripped):
                raise TypeMismatchError(f"not an integer: {text!r}")
            return cls(attr_type, int(stripped))
        return cls(attr_type, _parse_scaled(stripped, attr_type))

    @classmethod
    def of(cls, attr_type: AttributeType, value: Union[int, str, bool]) -> Value:
        """Build a value from a Python scalar; decimals are given as text."""
        if attr_type.kind is TypeKind.DECIMAL or isinstance(value, str):
            return cls.parse(attr_type, str(value))
        if attr_type.kind is TypeKind.BOOLEAN and isinstance(value, bool):
            return cls(attr_type, value)
        if attr_type.kind is TypeKind.INTEGER and isinstance(value, int) and not isinstance(
            value, bool
        ):
            return cls(attr_type, value)
        raise TypeMismatchError(f"{value!r} is not a valid {attr_type} value")

    def _check_comparable(self, other: object) -> Value:
        if not isinstance(other, Value):
            return NotImplemented  # type: ignore[return-value]
        if other.type != self.type:
            raise TypeMismatchError(f"cannot compare {self.type} with {other.type}")
        return other

    def __lt__(self, other: object) -> bool:
        other_value = self._check_comparable(other)
        if other_value is NotImplemented:
            return NotImplemented
        return self.raw < other_value.raw  # type: ignore[operator]

    def __le__(self, other: object) -> bool:
        other_value = self._check_comparable(other)
        if other_value is NotImplemented:
            return NotImplemented
        return self.raw <= other_value.raw  # type: ignore[operator]

    def __gt__(self, other: object) -> bool:
        other_value = self._check_comparable(other)
        if other_value is NotImplemented:
            return NotImplemented
        return self.raw > other_value.raw  # type: ignore[operator]

    def __ge__(self, other: object) -> bool:
        other_value = self._check_comparable(other)
        if other_value is NotImplemented:
            return NotImplemented
        return self.raw >= other_value.raw  # type: ignore[operator]

    def sort_key(self) -> tuple:
        return (self.type.kind.value, self.raw)

    def __str__(self) -> str:
        if self.type.kind is TypeKind.BOOLEAN:
            return "true" if self.raw else "false"
        if self.type.kind is TypeKind.DECIMAL:
            return _render_scaled(int(self.raw), self.type.scale or 0)
        return str(self.raw)


def _parse_scaled(text: str, attr_type: AttributeType) -> int:
    scale = attr_type.scale or 0
    precision = attr_type.precision or 0
    if not re.fullmatch(r"[+-]?(\d+(\.\d*)?|\.\d+)", text):
        raise TypeMismatchError(f"not a decimal: {text!r}")
    try:
        scaled = Decimal(text).scaleb(scale)
    except InvalidOperation as exc:
        raise TypeMismatchError(f"not a decimal: {text!r}") from exc
    if scaled != scaled.to_integral_value():
        raise TypeMismatchError(f"{text} has more than {scale} fractional digits for {attr_type}")
    raw = int(scaled)
    if abs(raw) >= 10**precision:
        raise TypeMismatchError(f"{text} exceeds the precision of {attr_type}")
    return raw


def _render_scaled(raw: int, scale: int) -> str:
    if scale == 0:
        return str(raw)
    sign = "-" if raw < 0 else ""
    digits = str(abs(raw)).rjust(scale + 1, "0")
    return f"{sign}{digits[:-scale]}.{digits[-scale:]}"


_ID_PATTERN = re.compile(r"^(?P<base>[A-Za-z_][A-Za-z0-9_]*)(?:@t(?P<version>\d+))?$")


@dataclass(frozen=True)
class ProvenanceId:
    """Identifier of a source tuple (or, after lifting, of a file).

    Rendered as ``base`` or, when versioned, ``base@t<version>``.
    """

    base: str
    version: Optional[int] = None

    def __post_init__(self) -> None:
        if not IDENTIFIER.match(self.base):
            raise SchemaError(f"invalid provenance id base: {self.base!r}")
        if self.version is not None and self.version < 0:
            raise SchemaError(f"provenance id version must be non-negative: {self.version}")

    @classmethod
    def parse(cls, text: str) -> ProvenanceId:
        match = _ID_PATTERN.match(text.strip())
        if not match:
            raise SchemaError(f"invalid provenance id: {text!r}")
        version = match.group("version")
        return cls(match.group("base"), int(version) if version is not None else None)

    def __str__(self) -> str:
        if self.version is None:
            return self.base
        return f"{self.base}@t{self.version}"

    def __lt__(self, other: ProvenanceId) -> bool:
        return str(self) < str(other)
