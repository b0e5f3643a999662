"""
Property tests: N[X] is a commutative semiring and the maps out of it are
homomorphisms.
"""

from hypothesis import given, settings
from hypothesis import strategies as st

from uniprov.annotations import (
    Polynomial,
    parse_polynomial,
    poly_add,
    poly_mul,
    rename_variables,
    specialize,
    to_witness_basis,
)
from uniprov.data.types import ProvenanceId

VARIABLES = [ProvenanceId(base) for base in ("r1", "r2", "s1", "s2", "s3")] + [
    ProvenanceId("r2", 1),
    ProvenanceId("r2", 2),
]

variables = st.sampled_from(VARIABLES)
monomials = st.tuples(st.lists(variables, max_size=3).map(tuple), st.integers(1, 3))
polynomials = st.lists(monomials, max_size=4).map(
    lambda terms: Polynomial.from_terms(_merge(terms))
)
assignments = st.fixed_dictionaries({v: st.integers(0, 4) for v in VARIABLES})
file_mappings = st.fixed_dictionaries({v: st.sampled_from(["fR", "fS", "fT"]) for v in VARIABLES})

LAWS = settings(max_examples=150, deadline=None)


def _merge(terms):
    merged = {}
    for variables_, coefficient in terms:
        key = tuple(sorted(variables_, key=str))
        merged[key] = merged.get(key, 0) + coefficient
    return merged


@LAWS
@given(polynomials, polynomials, polynomials)
def test_addition_is_associative(p, q, r):
    assert poly_add(poly_add(p, q), r) == poly_add(p, poly_add(q, r))


@LAWS
@given(polynomials, polynomials)
def test_addition_is_commutative(p, q):
    assert poly_add(p, q) == poly_add(q, p)


@LAWS
@given(polynomials)
def test_zero_is_additive_identity(p):
    assert poly_add(p, Polynomial.zero()) == p


@LAWS
@given(polynomials, polynomials, polynomials)
def test_multiplication_is_associative(p, q, r):
    assert poly_mul(poly_mul(p, q), r) == poly_mul(p, poly_mul(q, r))


@LAWS
@given(polynomials, polynomials)
def test_multiplication_is_commutative(p, q):
    assert poly_mul(p, q) == poly_mul(q, p)


@LAWS
@given(polynomials)
def test_one_is_multiplicative_identity(p):
    assert poly_mul(p, Polynomial.one()) == p


@LAWS
@given(polynomials)
def test_zero_annihilates(p):
    assert poly_mul(p, Polynomial.zero()) == Polynomial.zero()


@LAWS
@given(polynomials, polynomials, polynomials)
def test_multiplication_distributes_over_addition(p, q, r):
    assert poly_mul(p, poly_add(q, r)) == poly_add(poly_mul(p, q), poly_mul(p, r))


@LAWS
@given(polynomials, polynomials, assignments)
def test_specialization_is_a_homomorphism(p, q, assignment):
    assert specialize(poly_add(p, q), assignment) == specialize(p, assignment) + specialize(
        q, assignment
    )
    assert specialize(poly_mul(p, q), assignment) == specialize(p, assignment) * specialize(
        q, assignment
    )


@LAWS
@given(polynomials, polynomials)
def test_witness_basis_of_sum_is_union(p, q):
    assert to_witness_basis(poly_add(p, q)) == to_witness_basis(p) | to_witness_basis(q)


@LAWS
@given(polynomials, polynomials, file_mappings)
def test_renaming_commutes_with_the_operations(p, q, names):
    mapping = {v: ProvenanceId(name) for v, name in names.items()}
    assert rename_variables(poly_add(p, q), mapping) == poly_add(
        rename_variables(p, mapping), rename_variables(q, mapping)
    )
    assert rename_variables(poly_mul(p, q), mapping) == poly_mul(
        rename_variables(p, mapping), rename_variables(q, mapping)
    )


@LAWS
@given(polynomials)
def test_rendering_is_canonical(p):
    assert parse_polynomial(str(p)) == p
