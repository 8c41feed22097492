from fractions import Fraction

import pytest
from hypothesis import given, strategies as hst

from fedosov.fedosov import ChartData, build_state, star_multiply
from fedosov.scalar_poly import NuSeries, parse_series
from fedosov.symmetry import (
    FormalOperator,
    check_antiautomorphism,
    check_derivation,
    check_equivalence,
    inner_derivation,
    monomials,
    operator_compose,
    operator_exp,
    operator_inverse,
    operator_log,
    operator_power,
    parse_operator,
    random_moyal_derivation,
    star_variant,
    build_weyl_type_data,
    symmetrize_equivalence,
)

STD = [[0, 1], [-1, 0]]


def S(text):
    return parse_series(text, 2)


def vf(order, comps, nu=0):
    return FormalOperator.vector_field(2, order, comps, nu)


class TestOperators:
    def test_exp_zero(self):
        assert operator_exp(FormalOperator.zero(2, 3)) == FormalOperator.identity(2, 3)

    def test_exp_translation(self):
        T = operator_exp(vf(3, {1: 1}, nu=1))
        assert T.apply(S("x1")) == S("x1 + nu")
        assert T.apply(S("x1^2")) == S("x1^2 + 2*nu*x1 + nu^2")

    def test_log_exp(self):
        D = vf(4, {2: "x1"}, nu=1)
        assert operator_log(operator_exp(D)) == D

    def test_exp_requires_nu(self):
        with pytest.raises(ValueError):
            operator_exp(vf(3, {1: 1}))

    def test_power_half_squares(self):
        A = operator_exp(vf(3, {1: "x2", 2: 1}, nu=1) + vf(3, {1: "x1^2"}, nu=2))
        h = operator_power(A, Fraction(1, 2))
        assert h @ h == A

    def test_text_roundtrip(self, flat6):
        D = random_moyal_derivation(flat6.pd, 3, seed=7)
        T = operator_exp(D.shift_nu(1))
        assert parse_operator(str(T), 2, 3) == T

    def test_parse_example(self):
        T = parse_operator("nu^0: (1) * d/dx^(0,0)\nnu^1: (x1) * d/dx^(0,1) + (1/2) * d/dx^(2,0)\n", 2)
        assert T.apply(S("x2 + x1^2")) == S("x2 + x1^2 + nu*x1 + nu")

    @given(seed=hst.integers(0, 10**6))
    def test_inverse(self, seed, flat6):
        D = random_moyal_derivation(flat6.pd, 3, seed=seed, max_deg=2)
        T = operator_exp(D.shift_nu(1))
        I = FormalOperator.identity(2, 3)
        assert operator_compose(T, operator_inverse(T)) == I
        assert operator_compose(operator_inverse(T), T) == I

    @given(seed=hst.integers(0, 10**6))
    def test_involutions(self, seed, flat6):
        T = operator_exp(random_moyal_derivation(flat6.pd, 3, seed=seed, max_deg=2).shift_nu(1))
        assert T.conjugate().conjugate() == T
        assert T.parity().parity() == T


class TestDerivations:
    def test_inner_is_derivation(self, flat6):
        D = inner_derivation(flat6.pd, S("x1^2*x2 + nu*x2^3"), 3)
        ok, why = check_derivation(D, flat6, monomials(2, 3), 3)
        assert ok, why

    def test_inner_matches_commutator(self, flat6):
        H, f = S("x1^3 + nu*x1*x2"), S("x1*x2^2")
        D = inner_derivation(flat6.pd, H, 2)
        comm = star_multiply(flat6, H, f) - star_multiply(flat6, f, H)
        assert D.apply(f).truncate(2) == comm.shift(-1).truncate(2)

    def test_moyal_derivation(self, flat6):
        D = random_moyal_derivation(flat6.pd, 3, seed=11)
        ok, why = check_derivation(D, flat6, monomials(2, 3), 3)
        assert ok, why

    def test_euler_like_field_is_not(self, flat6):
        ok, why = check_derivation(vf(3, {1: "x1"}), flat6, monomials(2, 2), 3)
        assert not ok and why.startswith("f=")

    def test_exp_is_equivalence(self, flat6):
        T = operator_exp(random_moyal_derivation(flat6.pd, 3, seed=3).shift_nu(1))
        ok, why = check_equivalence(T, flat6, flat6, monomials(2, 3), 3)
        assert ok, why


class TestVariants:
    def test_opposite(self, flat6):
        assert star_variant(flat6, "opposite", "x1", "x2") == S("x1*x2 - 1/2*nu")

    def test_parity(self, flat6):
        assert star_variant(flat6, "parity", "x1", "x2") == S("x1*x2 - 1/2*nu")

    def test_conjugate(self, flat6):
        assert star_variant(flat6, "conjugate", "i*x1", "x2") == S("i*x1*x2 - 1/2*i*nu")

    def test_unknown(self, flat6):
        with pytest.raises(ValueError):
            star_variant(flat6, "reverse", "x1", "x2")

    @given(hst.sampled_from(monomials(2, 3)), hst.sampled_from(monomials(2, 3)))
    def test_parity_variant_twice(self, curved, f, g):
        # applying the P-twist twice gives back the original product
        pf, pg = NuSeries.of(f).parity(), NuSeries.of(g).parity()
        twice = star_variant(curved, "parity", pf, pg).parity()
        assert twice == star_multiply(curved, NuSeries.of(f), NuSeries.of(g))


class TestAntiAutomorphism:
    def test_flat(self, flat6):
        assert check_antiautomorphism(flat6, "P").ok
        assert check_antiautomorphism(flat6, "C").ok

    def test_nu_omega_fails_parity(self):
        st = build_state(ChartData.build(STD, Omega={1: "2 @ dx1&dx2"}, cap=6))
        assert not check_antiautomorphism(st, "P", max_deg=2).ok
        assert check_antiautomorphism(st, "C", max_deg=2).ok is False

    def test_nu2_omega_passes(self):
        st = build_state(ChartData.build(STD, Omega={2: "2 @ dx1&dx2"}, cap=6))
        assert check_antiautomorphism(st, "P", max_deg=2).ok
        assert check_antiautomorphism(st, "C", max_deg=2).ok

    def test_bad_which(self, flat6):
        with pytest.raises(ValueError):
            check_antiautomorphism(flat6, "Q")


class TestWeylTypeData:
    @pytest.mark.parametrize("mode,target,s", [
        ("P", {1: "(1 + x1*x2) @ dx1&dx2"}, "nu^2*x1*dx2"),
        ("C", {0: "i @ dx1&dx2", 1: "x2^2 @ dx1&dx2"}, "i*nu*x1*dx2"),
        ("Weyl", {1: "3 @ dx1&dx2"}, "nu^2*x2*dx1"),
    ])
    def test_modes(self, mode, target, s):
        Omega, s_el = build_weyl_type_data(target, mode, s=s)
        assert set(Omega) == {k + 1 for k in target}
        st = build_state(ChartData.build(STD, Omega=Omega, s=s_el, cap=6))
        if mode in ("P", "Weyl"):
            assert st.r.parity() == st.r
            assert check_antiautomorphism(st, "P", max_deg=2, order=2).ok
        if mode in ("C", "Weyl"):
            assert st.r.conjugate() == st.r
            assert check_antiautomorphism(st, "C", max_deg=2, order=2).ok

    @pytest.mark.parametrize("mode,target,s", [
        ("P", {0: "1 @ dx1&dx2"}, None),
        ("Weyl", {0: "i @ dx1&dx2"}, None),
        ("C", {0: "1 @ dx1&dx2"}, None),
        ("C", {1: "i @ dx1&dx2"}, None),
        ("P", {1: "1 @ dx1&dx2"}, "nu*x1*dx2"),
        ("C", {}, "nu*x1*dx2"),
        ("Q", {}, None),
    ])
    def test_rejections(self, mode, target, s):
        with pytest.raises(ValueError):
            build_weyl_type_data(target, mode, s=s)


class TestSymmetrize:
    def test_identity(self, flat6):
        I = FormalOperator.identity(2, 3)
        for mode in ("P", "C", "Weyl"):
            Sop, rep = symmetrize_equivalence(I, flat6, flat6, mode, max_deg=2, test_deg=3)
            assert Sop == I and rep.ok

    @pytest.mark.parametrize("mode", ["P", "C", "Weyl"])
    def test_seeded(self, flat6, mode):
        T = operator_exp(random_moyal_derivation(flat6.pd, 3, seed=5, max_deg=2).shift_nu(1))
        Sop, rep = symmetrize_equivalence(T, flat6, flat6, mode, max_deg=2, test_deg=3)
        assert rep.ok, str(rep)
        if mode != "P":
            assert Sop.conjugate() == Sop
        if mode != "C":
            assert Sop.parity() == Sop

    def test_not_equivalence(self, flat6):
        T = operator_exp(vf(3, {1: "x1", 2: "i"}, nu=1))
        with pytest.raises(ValueError, match="not an equivalence"):
            symmetrize_equivalence(T, flat6, flat6, "C", max_deg=2)

    def test_missing_property(self):
        st = build_state(ChartData.build(STD, Omega={1: "2 @ dx1&dx2"}, cap=6))
        with pytest.raises(ValueError, match="P anti-automorphism"):
            symmetrize_equivalence(FormalOperator.identity(2, 2), st, st, "P", max_deg=2)
