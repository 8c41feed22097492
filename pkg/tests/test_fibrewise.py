import pytest
from hypothesis import given

from fedosov.fibrewise import (
    H_apply,
    PoissonData,
    ad_over_nu,
    circ_product,
    conjugate_apply,
    lie_derivative_field,
    parity_apply,
    sigma_of_circ,
    super_commutator,
)
from fedosov.weyl import WeylElement, delta, delta_star, parse_weyl, sigma_project, total_degree, vector_field

from strategies import weyl

PD = PoissonData.standard(2)
EULER = vector_field(2, {1: "1/2*x1", 2: "1/2*x2"})


def W(text, cap=None):
    return parse_weyl(text, 2, cap)


def Deg(a):
    return a.map_coeffs(lambda k, c: c.scale(total_degree(k)) if total_degree(k) else None)


def definitional_commutator(a, b, cap):
    out = WeylElement.zero(2, cap)
    for (ka, A), pa in _by_anti(a).items():
        for (kb, B), pb in _by_anti(b).items():
            sign = -1 if (len(A) * len(B)) % 2 else 1
            out = out + circ_product(pa, pb, PD, cap) - circ_product(pb, pa, PD, cap).scale(sign)
    return out


def _by_anti(a):
    parts = {}
    for key in a.keys():
        parts.setdefault((0, key[2]), set()).add(key)
    return {g: a.filter(lambda k, ks=ks: k in ks) for g, ks in parts.items()}


class TestPoissonData:
    def test_standard(self):
        lam = PD.lambda_const()
        assert lam[0][1] == 1 and lam[1][0] == -1
        assert PD.omega[0][1].constant_term() == 1

    def test_inverse_relation_4d(self):
        pd = PoissonData.standard(4)
        for i in range(4):
            for k in range(4):
                acc = sum((pd.omega[k][j] * pd.lam[i][j] for j in range(4)), pd.omega[0][0] * 0)
                assert acc.constant_term() == (1 if i == k else 0)

    def test_non_constant_rejected(self):
        with pytest.raises(ValueError):
            PoissonData.from_omega([["0", "x1"], ["-x1", "0"]])

    def test_singular_rejected(self):
        with pytest.raises(ValueError):
            PoissonData.from_omega([[0, 0], [0, 0]])


class TestCirc:
    def test_examples(self):
        assert circ_product(W("dx1"), W("dx2"), PD) == W("dx1*dx2 + 1/2*nu")
        assert circ_product(W("x1"), W("x2 + i"), PD) == W("x1*x2 + i*x1")
        assert circ_product(W("dx1"), W("dx1"), PD) == W("dx1*dx1")

    def test_sigma_of_circ(self):
        a, b = W("x1*dx1*dx2 + dx2"), W("dx1*dx1 + x2*dx1")
        assert sigma_of_circ(a, b, PD, 6) == WeylElement.from_series(sigma_project(circ_product(a, b, PD, 6)))

    @given(weyl(cap=6), weyl(cap=6), weyl(cap=6))
    def test_associative(self, a, b, c):
        lhs = circ_product(circ_product(a, b, PD), c, PD)
        rhs = circ_product(a, circ_product(b, c, PD), PD)
        assert lhs == rhs

    @given(weyl(cap=7), weyl(cap=7))
    def test_deg_is_derivation(self, a, b):
        assert Deg(circ_product(a, b, PD)) == circ_product(Deg(a), b, PD) + circ_product(a, Deg(b), PD)

    @given(weyl(cap=6), weyl(cap=6))
    def test_H_is_derivation_flat(self, a, b):
        lhs = H_apply(EULER, circ_product(a, b, PD))
        rhs = circ_product(H_apply(EULER, a), b, PD) + circ_product(a, H_apply(EULER, b), PD)
        assert lhs == rhs


class TestCommutator:
    def test_example(self):
        assert super_commutator(W("dx1"), W("dx2"), PD) == W("nu")
        assert ad_over_nu(W("dx1"), W("dx2"), PD) == W("1")

    def test_scalars_central(self):
        assert not super_commutator(W("1 @ dx1"), W("x1*x2"), PD)

    @given(weyl(cap=6), weyl(cap=6))
    def test_matches_definition(self, a, b):
        assert super_commutator(a, b, PD) == definitional_commutator(a, b, 6)

    @given(weyl(cap=6, anti=0))
    def test_even_self_commutator(self, a):
        assert not super_commutator(a, a, PD)

    @given(weyl(cap=5), weyl(cap=5))
    def test_ad_over_nu_consistent(self, a, b):
        assert ad_over_nu(a, b, PD).shift_nu(1).with_cap(5) == super_commutator(a, b, PD).with_cap(5)


class TestSymmetries:
    def test_examples(self):
        assert parity_apply(W("x1 + nu*x2")) == W("x1 - nu*x2")
        assert conjugate_apply(W("i*x1")) == W("-i*x1")

    @given(weyl())
    def test_involutions(self, a):
        assert parity_apply(parity_apply(a)) == a
        assert conjugate_apply(conjugate_apply(a)) == a

    def test_flat_coordinate_reversal(self):
        x1, x2 = W("x1 + dx1"), W("x2 + dx2")
        lhs = conjugate_apply(circ_product(conjugate_apply(x1), conjugate_apply(x2), PD))
        assert lhs == circ_product(x2, x1, PD)
        assert sigma_project(lhs).truncate(1) == sigma_project(W("x1*x2 - 1/2*nu"))

    @given(weyl(cap=6, anti=0), weyl(cap=6, anti=0))
    def test_reversal_identity(self, a, b):
        ba = circ_product(b, a, PD)
        assert conjugate_apply(circ_product(conjugate_apply(a), conjugate_apply(b), PD)) == ba
        assert parity_apply(circ_product(parity_apply(a), parity_apply(b), PD)) == ba


class TestLie:
    def test_examples(self):
        assert lie_derivative_field(vector_field(2, {1: 1}), W("x1")) == W("1")
        assert lie_derivative_field(vector_field(2, {1: "x1"}), W("dx1")) == W("dx1")
        om = W("1 @ dx1&dx2")
        assert lie_derivative_field(EULER, om) == om

    @given(weyl(), weyl())
    def test_derivation_of_mu(self, a, b):
        from fedosov.weyl import mu_product
        X = vector_field(2, {1: "x2^2", 2: "x1 + 1"})
        assert lie_derivative_field(X, mu_product(a, b)) == \
            mu_product(lie_derivative_field(X, a), b) + mu_product(a, lie_derivative_field(X, b))

    @given(weyl())
    def test_commutes_with_delta_for_linear_fields(self, a):
        X = vector_field(2, {1: "2*x1 - x2", 2: "1/3*x1"})
        for op in (delta, delta_star):
            assert lie_derivative_field(X, op(a)) == op(lie_derivative_field(X, a))
