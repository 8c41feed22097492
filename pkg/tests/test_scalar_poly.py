import pytest
from fractions import Fraction
from hypothesis import given

from fedosov.scalar_poly import (
    GaussianRational,
    NuSeries,
    ParseError,
    Scalar,
    canonical_string,
    conjugate_scalar,
    parse_scalar,
    parse_series,
    partial_derivative,
)

from strategies import scalars, series


def P(text):
    return parse_scalar(text, 2)


class TestParse:
    def test_literal(self):
        s = P("x1*x2 + 3/2")
        assert s.terms == {(1, 1): GaussianRational(1), (0, 0): GaussianRational(Fraction(3, 2))}

    def test_complex_square(self):
        assert P("(x1+i)^2") == P("x1^2") + P("2*i*x1") - P("1")
        assert str(P("(x1+i)^2")) == "x1^2 + 2*i*x1 - 1"

    @pytest.mark.parametrize("text,pos", [("x3", 0), ("x1 +", 4), ("x1**2", 3), ("(x1", 3), ("2/0", 2)])
    def test_errors_carry_position(self, text, pos):
        with pytest.raises(ParseError) as info:
            P(text)
        assert info.value.pos == pos

    def test_out_of_range_message(self):
        with pytest.raises(ParseError, match="out of range"):
            P("x3")

    def test_whitespace_insignificant(self):
        assert P(" x1 *  x2+1 ") == P("x1*x2+1")

    def test_leading_minus(self):
        assert P("-x1 + x2") == P("x2") - P("x1")


class TestCanonical:
    def test_zero(self):
        assert canonical_string(Scalar.zero(2)) == "0"

    def test_ordering(self):
        assert canonical_string(P("x2*x1")) == "x1*x2"

    def test_imaginary(self):
        assert canonical_string(P("1/2*i")) == "1/2*i"

    def test_graded_lex(self):
        assert canonical_string(P("1 + x2 + x1 + x1*x2 + x2^2 + x1^2")) == \
            "x1^2 + x1*x2 + x2^2 + x1 + x2 + 1"

    @given(scalars())
    def test_roundtrip(self, s):
        assert parse_scalar(canonical_string(s), 2) == s

    @given(series())
    def test_series_roundtrip(self, f):
        assert parse_series(str(f), 2) == f


class TestDerivative:
    def test_power_rule(self):
        assert partial_derivative(P("x1^2*x2"), 1) == P("2*x1*x2")

    def test_constant(self):
        assert not partial_derivative(P("7/3 + i"), 2)

    def test_distinct(self):
        assert partial_derivative(P("x1*x2"), 2) == P("x1")

    def test_bad_index(self):
        with pytest.raises(ValueError):
            partial_derivative(P("x1"), 3)

    @given(scalars(), scalars())
    def test_leibniz(self, a, b):
        for i in (1, 2):
            assert (a * b).derivative(i) == a.derivative(i) * b + a * b.derivative(i)

    @given(scalars(max_deg=4))
    def test_commute(self, s):
        assert s.derivative(1).derivative(2) == s.derivative(2).derivative(1)


class TestConjugate:
    def test_examples(self):
        assert conjugate_scalar(P("i*x1")) == P("-i*x1")
        assert conjugate_scalar(P("x1 + x2")) == P("x1 + x2")
        assert P("(1+i)^2") == P("2*i")
        assert conjugate_scalar(P("(1+i)^2")) == P("-2*i")

    @given(scalars(), scalars())
    def test_homomorphism(self, a, b):
        assert conjugate_scalar(a * b) == conjugate_scalar(a) * conjugate_scalar(b)
        assert conjugate_scalar(conjugate_scalar(a)) == a


class TestRing:
    @given(scalars(max_deg=4), scalars(max_deg=4), scalars(max_deg=4))
    def test_axioms(self, a, b, c):
        assert a * (b + c) == a * b + a * c
        assert (a * b) * c == a * (b * c)
        assert a * b == b * a
        assert a + b == b + a
        assert a - a == Scalar.zero(2)
        assert a * Scalar.constant(2, 1) == a

    def test_no_zero_coefficients_stored(self):
        s = P("x1 + x2") - P("x2")
        assert s.terms == {(1, 0): GaussianRational(1)}

    def test_gaussian_division(self):
        z = GaussianRational(1, 1)
        assert z * (GaussianRational(1) / z) == GaussianRational(1)
        with pytest.raises(ZeroDivisionError):
            GaussianRational(1) / GaussianRational(0)


class TestSeries:
    def test_shift_requires_divisibility(self):
        f = parse_series("nu*x1 + nu^2", 2)
        assert f.shift(-1) == parse_series("x1 + nu", 2)
        with pytest.raises(ValueError):
            parse_series("x1 + nu", 2).shift(-1)

    def test_parity_and_conjugate(self):
        f = parse_series("i*x1 + nu*x2", 2)
        assert f.parity() == parse_series("i*x1 - nu*x2", 2)
        assert f.conjugate() == parse_series("-i*x1 - nu*x2", 2)

    def test_truncate(self):
        assert parse_series("1 + nu + nu^3", 2).truncate(1) == parse_series("1 + nu", 2)

    def test_of_scalar(self):
        assert NuSeries.of(P("x1"))[0] == P("x1")
