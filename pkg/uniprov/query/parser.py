"""
Parser for the supported SQL subset.

Grammar (keywords case-insensitive)::

    query      := select (UNION select)*
    select     := SELECT (* | attr (, attr)*) FROM rel (NATURAL JOIN rel)* [WHERE predicate]
    predicate  := conj (OR conj)*
    conj       := factor (AND factor)*
    factor     := NOT factor | ( predicate ) | operand cmp operand
    operand    := identifier | number | 'text' | TRUE | FALSE
    cmp        := < | <= | = | <> | != | >= | > | ≤ | ≠ | ≥

A select maps to ``Project(attrs, Select(pred, NaturalJoin(...)))``; the
Select node is omitted without WHERE and joins associate to the left. Names
are resolved later, during evaluation.
"""

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from uniprov.common.errors import QuerySyntaxError
from uniprov.query.algebra import (
    AlgebraExpr,
    And,
    AttributeRef,
    Comparator,
    Comparison,
    Literal,
    LiteralKind,
    NaturalJoin,
    Not,
    Operand,
    Or,
    Predicate,
    Project,
    Scan,
    Select,
    Union,
)

KEYWORDS = frozenset(
    {"SELECT", "FROM", "NATURAL", "JOIN", "WHERE", "AND", "OR", "NOT", "TRUE", "FALSE", "UNION"}
)

_COMPARATORS = {
    "<": Comparator.LT,
    "<=": Comparator.LE,
    "≤": Comparator.LE,
    "=": Comparator.EQ,
    "<>": Comparator.NE,
    "!=": Comparator.NE,
    "≠": Comparator.NE,
    ">=": Comparator.GE,
    "≥": Comparator.GE,
    ">": Comparator.GT,
}

_TOKEN_SPEC = [
    ("ws", r"\s+"),
    ("number", r"-?\d+(?:\.\d+)?"),
    ("ident", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("text", r"'(?:[^']|'')*'"),
    ("cmp", r"<=|>=|<>|!=|≤|≥|≠|<|>|="),
    ("punct", r"[,()*]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))


@dataclass(frozen=True)
class Token:
    kind: str  # keyword, ident, number, text, cmp, punct
    value: str
    offset: int

    def describe(self) -> str:
        return repr(self.value)


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    position = 0
    while position < len(text):
        match = _TOKEN_RE.match(text, position)
        if not match:
            raise QuerySyntaxError(
                f"unexpected character {text[position]!r}", len(tokens) + 1, position
            )
        kind = match.lastgroup or ""
        value = match.group()
        if kind == "ident" and value.upper() in KEYWORDS:
            tokens.append(Token("keyword", value.upper(), position))
        elif kind == "text":
            tokens.append(Token("text", value[1:-1].replace("''", "'"), position))
        elif kind != "ws":
            tokens.append(Token(kind, value, position))
        position = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    # -- token helpers ----------------------------------------------------

    def peek(self) -> Optional[Token]:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def error(self, message: str) -> QuerySyntaxError:
        token = self.peek()
        offset = token.offset if token else len(self.text)
        found = token.describe() if token else "end of query"
        return QuerySyntaxError(f"{message}, found {found}", self.index + 1, offset)

    def at_keyword(self, *keywords: str) -> bool:
        token = self.peek()
        return token is not None and token.kind == "keyword" and token.value in keywords

    def at_punct(self, value: str) -> bool:
        token = self.peek()
        return token is not None and token.kind == "punct" and token.value == value

    def expect_keyword(self, keyword: str) -> None:
        if not self.at_keyword(keyword):
            raise self.error(f"expected {keyword}")
        self.index += 1

    def expect_punct(self, value: str) -> None:
        if not self.at_punct(value):
            raise self.error(f"expected {value!r}")
        self.index += 1

    def expect_ident(self, what: str) -> str:
        token = self.peek()
        if token is None or token.kind != "ident":
            raise self.error(f"expected {what}")
        self.index += 1
        return token.value

    # -- grammar ----------------------------------------------------------

    def parse(self) -> AlgebraExpr:
        expr = self.select()
        while self.at_keyword("UNION"):
            self.index += 1
            expr = Union(expr, self.select())
        if self.peek() is not None:
            raise self.error("expected end of query")
        return expr

    def select(self) -> AlgebraExpr:
        self.expect_keyword("SELECT")
        attributes: Optional[Tuple[str, ...]]
        if self.at_punct("*"):
            self.index += 1
            attributes = None
        else:
            names = [self.expect_ident("attribute name or '*'")]
            while self.at_punct(","):
                self.index += 1
                names.append(self.expect_ident("attribute name"))
            attributes = tuple(names)
        self.expect_keyword("FROM")
        source: AlgebraExpr = Scan(self.expect_ident("relation name"))
        while self.at_keyword("NATURAL"):
            self.index += 1
            self.expect_keyword("JOIN")
            source = NaturalJoin(source, Scan(self.expect_ident("relation name")))
        if self.at_keyword("WHERE"):
            self.index += 1
            source = Select(self.predicate(), source)
        return Project(attributes, source)

    def predicate(self) -> Predicate:
        items = [self.conjunction()]
        while self.at_keyword("OR"):
            self.index += 1
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction(self) -> Predicate:
        items = [self.factor()]
        while self.at_keyword("AND"):
            self.index += 1
            items.append(self.factor())
        return items[0] if len(items) == 1 else And(tuple(items))

    def factor(self) -> Predicate:
        if self.at_keyword("NOT"):
            self.index += 1
            return Not(self.factor())
        if self.at_punct("("):
            self.index += 1
            inner = self.predicate()
            self.expect_punct(")")
            return inner
        left = self.operand()
        token = self.peek()
        if token is None or token.kind != "cmp":
            raise self.error("expected comparison operator")
        self.index += 1
        return Comparison(left, _COMPARATORS[token.value], self.operand())

    def operand(self) -> Operand:
        token = self.peek()
        if token is None:
            raise self.error("expected operand")
        if token.kind == "ident":
            self.index += 1
            return AttributeRef(token.value)
        if token.kind == "number":
            self.index += 1
            return Literal(token.value, LiteralKind.NUMBER)
        if token.kind == "text":
            self.index += 1
            return Literal(token.value, LiteralKind.TEXT)
        if token.kind == "keyword" and token.value in ("TRUE", "FALSE"):
            self.index += 1
            return Literal(token.value.lower(), LiteralKind.BOOLEAN)
        raise self.error("expected operand")


def parse_query(text: str) -> AlgebraExpr:
    """Parse query text into a relational algebra tree.

    Raises:
        QuerySyntaxError: With the 1-based token index and character offset.
    """
    return _Parser(text).parse()
