"""
Tests for provenance polynomials and witness bases.
"""

import pytest

from tests.experiment import pid
from uniprov.annotations import (
    Monomial,
    Polynomial,
    WitnessBasis,
    parse_polynomial,
    poly_add,
    poly_mul,
    rename_variables,
    specialize,
    to_witness_basis,
)
from uniprov.common.errors import MissingVariableError, PolynomialSyntaxError


def var(text):
    return Polynomial.variable(pid(text))


class TestRendering:
    def test_zero_and_one(self):
        assert str(Polynomial.zero()) == "0"
        assert str(Polynomial.one()) == "1"

    def test_join_then_union(self):
        p = poly_add(poly_mul(var("r1"), var("s1")), poly_mul(var("r1"), var("s3")))
        assert str(p) == "r1*s1 + r1*s3"

    def test_variables_sorted_within_monomial(self):
        assert str(poly_mul(var("s1"), var("r1"))) == "r1*s1"

    def test_coefficient_only_above_one(self):
        p = poly_add(poly_mul(var("fR"), var("fS")), poly_mul(var("fS"), var("fR")))
        assert str(p) == "2*fR*fS"

    def test_repeated_variable(self):
        assert str(poly_mul(var("r1"), var("r1"))) == "r1*r1"

    def test_versioned_ids(self):
        assert str(poly_mul(var("r2@t1"), var("s1"))) == "r2@t1*s1"

    def test_monomial_rejects_zero_coefficient(self):
        with pytest.raises(ValueError):
            Monomial(0, (pid("r1"),))


class TestArithmetic:
    def test_add_merges_equal_monomials(self):
        assert poly_add(var("r1"), var("r1")) == Polynomial.from_terms({(pid("r1"),): 2})

    def test_zero_annihilates(self):
        assert poly_mul(var("r1"), Polynomial.zero()).is_zero

    def test_operators(self):
        assert var("r1") * var("s1") + var("r1") == poly_add(
            poly_mul(var("r1"), var("s1")), var("r1")
        )

    def test_from_terms_drops_zero_coefficients(self):
        assert Polynomial.from_terms({(pid("r1"),): 0}).is_zero

    def test_constant_rejects_negative(self):
        with pytest.raises(ValueError):
            Polynomial.constant(-1)


class TestWitnessBasis:
    def test_drops_coefficients_and_multiplicities(self):
        p = poly_add(poly_mul(var("r1"), var("r1")), poly_mul(var("r1"), var("s1")))
        p = poly_add(p, p)
        assert str(to_witness_basis(p)) == "{{r1},{r1,s1}}"

    def test_rendering(self):
        p = parse_polynomial("r1*s1 + r1*s3")
        assert str(to_witness_basis(p)) == "{{r1,s1},{r1,s3}}"

    def test_constant_has_no_witness(self):
        assert len(to_witness_basis(Polynomial.constant(3))) == 0
        assert str(WitnessBasis()) == "{}"

    def test_rejects_empty_witness(self):
        with pytest.raises(ValueError):
            WitnessBasis.of([])


class TestSpecialize:
    def test_counts_derivations(self):
        p = parse_polynomial("r1*s1 + r1*s3")
        assert specialize(p, {pid("r1"): 1, pid("s1"): 1, pid("s3"): 1}) == 2

    def test_deleting_a_tuple(self):
        p = parse_polynomial("r1*s1 + r1*s3")
        assert specialize(p, {pid("r1"): 1, pid("s1"): 0, pid("s3"): 1}) == 1

    def test_missing_variable(self):
        with pytest.raises(MissingVariableError):
            specialize(var("r1"), {})


class TestRename:
    def test_lifting_merges_monomials(self):
        p = parse_polynomial("r1*s1 + r1*s3")
        mapping = {pid("r1"): pid("fR"), pid("s1"): pid("fS"), pid("s3"): pid("fS")}
        assert str(rename_variables(p, mapping)) == "2*fR*fS"

    def test_unmapped_variable(self):
        with pytest.raises(MissingVariableError):
            rename_variables(var("r1"), {})


class TestParse:
    @pytest.mark.parametrize(
        "text", ["0", "1", "r1", "r1*s1 + r1*s3", "2*fR*fS", "3 + r2@t1*s1", "r1*r1"]
    )
    def test_canonical_text_is_stable(self, text):
        assert str(parse_polynomial(text)) == text

    def test_parse_canonicalizes(self):
        assert str(parse_polynomial("s3*r1 + s1*r1 + s1*r1")) == "2*r1*s1 + r1*s3"

    @pytest.mark.parametrize("text", ["", "r1 +", "*r1", "r1*2", "r-1"])
    def test_malformed(self, text):
        with pytest.raises(PolynomialSyntaxError):
            parse_polynomial(text)
