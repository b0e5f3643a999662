"""
Provenance polynomials and witness bases.

Polynomials are elements of the commutative semiring ``(N[X], +, *, 0, 1)``
over provenance identifiers: ``+`` combines alternative derivations
(duplicates from projection or union), ``*`` combines jointly used tuples
(joins). Every :class:`Polynomial` is kept in canonical form, so structural
equality is semantic equality and rendering is bit-exact:

- monomials are joined by ``" + "``,
- variables within a monomial are sorted by their rendering and joined by ``"*"``,
- a coefficient ``k`` is printed as ``"k*"`` only when ``k > 1``,
- monomials are ordered by their tuple of variable renderings,
- the zero polynomial renders as ``"0"``.

Witness bases are the variable-set images of the monomials. They are not
minimized.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Mapping, Tuple

from uniprov.common.errors import MissingVariableError, PolynomialSyntaxError, SchemaError
from uniprov.data.types import ProvenanceId

Variables = Tuple[ProvenanceId, ...]


def _sorted_variables(variables: Iterable[ProvenanceId]) -> Variables:
    return tuple(sorted(variables, key=str))


def _monomial_key(variables: Variables) -> Tuple[str, ...]:
    return tuple(str(v) for v in variables)


@dataclass(frozen=True)
class Monomial:
    """``coefficient * v1 * v2 * ...``; variables sorted, repeats kept."""

    coefficient: int
    variables: Variables = ()

    def __post_init__(self) -> None:
        if self.coefficient < 1:
            raise ValueError(f"monomial coefficient must be positive, got {self.coefficient}")

    def __str__(self) -> str:
        if not self.variables:
            return str(self.coefficient)
        body = "*".join(str(v) for v in self.variables)
        return body if self.coefficient == 1 else f"{self.coefficient}*{body}"


@dataclass(frozen=True)
class Polynomial:
    """Canonical provenance polynomial. Build with the constructors below."""

    monomials: Tuple[Monomial, ...] = ()

    @classmethod
    def from_terms(cls, terms: Mapping[Variables, int]) -> Polynomial:
        """Canonicalize a mapping of variable multiset to coefficient."""
        merged: Dict[Variables, int] = {}
        for variables, coefficient in terms.items():
            if coefficient == 0:
                continue
            key = _sorted_variables(variables)
            merged[key] = merged.get(key, 0) + coefficient
        ordered = sorted(merged.items(), key=lambda item: _monomial_key(item[0]))
        return cls(tuple(Monomial(coefficient, variables) for variables, coefficient in ordered))

    @classmethod
    def zero(cls) -> Polynomial:
        return cls()

    @classmethod
    def one(cls) -> Polynomial:
        return cls.constant(1)

    @classmethod
    def constant(cls, k: int) -> Polynomial:
        if k < 0:
            raise ValueError("polynomial constants are natural numbers")
        return cls.from_terms({(): k})

    @classmethod
    def variable(cls, pid: ProvenanceId) -> Polynomial:
        return cls((Monomial(1, (pid,)),))

    def terms(self) -> Dict[Variables, int]:
        return {m.variables: m.coefficient for m in self.monomials}

    def variables(self) -> FrozenSet[ProvenanceId]:
        return frozenset(v for m in self.monomials for v in m.variables)

    @property
    def is_zero(self) -> bool:
        return not self.monomials

    def __add__(self, other: Polynomial) -> Polynomial:
        return poly_add(self, other)

    def __mul__(self, other: Polynomial) -> Polynomial:
        return poly_mul(self, other)

    def __str__(self) -> str:
        if not self.monomials:
            return "0"
        return " + ".join(str(m) for m in self.monomials)


@dataclass(frozen=True)
class WitnessBasis:
    """Set of witnesses; each witness is a set of provenance identifiers."""

    witnesses: FrozenSet[FrozenSet[ProvenanceId]] = frozenset()

    def __post_init__(self) -> None:
        if any(not witness for witness in self.witnesses):
            raise ValueError("witnesses must not be empty")

    @classmethod
    def of(cls, *witnesses: Iterable[ProvenanceId]) -> WitnessBasis:
        return cls(frozenset(frozenset(w) for w in witnesses))

    def __or__(self, other: WitnessBasis) -> WitnessBasis:
        return WitnessBasis(self.witnesses | other.witnesses)

    def __len__(self) -> int:
        return len(self.witnesses)

    def sorted_witnesses(self) -> Tuple[Tuple[ProvenanceId, ...], ...]:
        return tuple(
            sorted((_sorted_variables(w) for w in self.witnesses), key=_monomial_key)
        )

    def __str__(self) -> str:
        inner = ",".join(
            "{" + ",".join(str(v) for v in witness) + "}" for witness in self.sorted_witnesses()
        )
        return "{" + inner + "}"


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    """Canonical sum; equal variable multisets merge by adding coefficients."""
    terms: Counter = Counter(a.terms())
    terms.update(b.terms())
    return Polynomial.from_terms(terms)


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Canonical distributed product."""
    terms: Counter = Counter()
    for left in a.monomials:
        for right in b.monomials:
            terms[_sorted_variables(left.variables + right.variables)] += (
                left.coefficient * right.coefficient
            )
    return Polynomial.from_terms(terms)


def to_witness_basis(p: Polynomial) -> WitnessBasis:
    """Map each monomial to the set of its distinct variables.

    Coefficients and multiplicities are dropped; a constant monomial has no
    witness and is skipped.
    """
    return WitnessBasis(
        frozenset(frozenset(m.variables) for m in p.monomials if m.variables)
    )


def specialize(p: Polynomial, assignment: Mapping[ProvenanceId, int]) -> int:
    """Evaluate ``p`` in the natural numbers under ``assignment``.

    Raises:
        MissingVariableError: If a variable of ``p`` has no assigned value.
    """
    total = 0
    for monomial in p.monomials:
        product = monomial.coefficient
        for variable in monomial.variables:
            try:
                value = assignment[variable]
            except KeyError:
                raise MissingVariableError(f"no value assigned to {variable}") from None
            if value < 0:
                raise ValueError(f"assignment for {variable} must be non-negative")
            product *= value
        total += product
    return total


def rename_variables(
    p: Polynomial, mapping: Mapping[ProvenanceId, ProvenanceId]
) -> Polynomial:
    """Substitute variables and re-canonicalize (collided monomials merge).

    Raises:
        MissingVariableError: If a variable of ``p`` is not mapped.
    """
    terms: Counter = Counter()
    for monomial in p.monomials:
        renamed = []
        for variable in monomial.variables:
            try:
                renamed.append(mapping[variable])
            except KeyError:
                raise MissingVariableError(f"no mapping for {variable}") from None
        terms[_sorted_variables(renamed)] += monomial.coefficient
    return Polynomial.from_terms(terms)


def parse_polynomial(text: str) -> Polynomial:
    """Parse the canonical rendering produced by ``str(Polynomial)``.

    Raises:
        PolynomialSyntaxError: On malformed input.
    """
    stripped = text.strip()
    if stripped == "0":
        return Polynomial.zero()
    if not stripped:
        raise PolynomialSyntaxError("empty polynomial text")
    terms: Counter = Counter()
    for term in stripped.split("+"):
        factors = [factor.strip() for factor in term.split("*")]
        if any(not factor for factor in factors):
            raise PolynomialSyntaxError(f"malformed term {term.strip()!r}")
        coefficient = 1
        variables = []
        for position, factor in enumerate(factors):
            if factor.isdigit():
                if position != 0:
                    raise PolynomialSyntaxError(f"coefficient must lead the term: {term.strip()!r}")
                coefficient = int(factor)
                continue
            try:
                variables.append(ProvenanceId.parse(factor))
            except SchemaError as exc:
                raise PolynomialSyntaxError(str(exc)) from exc
        if coefficient == 0:
            continue
        terms[_sorted_variables(variables)] += coefficient
    return Polynomial.from_terms(terms)
