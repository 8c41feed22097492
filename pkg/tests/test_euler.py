import pytest
from fractions import Fraction

from fedosov.euler import (
    PotentialChoice,
    T_alpha_report,
    c2_minus,
    cartan_formula_check,
    characteristic_form,
    check_potential,
    deligne_pair,
    deligne_pair_check,
    euler_derivation_apply,
    euler_report,
    generator_set,
    rho2_form,
    rho2_from_star,
    solve_h_alpha,
    tensor_T_alpha,
    xi_from_theta,
)
from fedosov.fedosov import ChartData, build_state, fedosov_D, hamiltonian_field
from fedosov.forms import evaluate_two_form, exterior_d
from fedosov.scalar_poly import parse_scalar, parse_series
from fedosov.weyl import parse_weyl, sigma_project, vector_field

STD = [[0, 1], [-1, 0]]
HALF = Fraction(1, 2)


def W(text, cap=None):
    return parse_weyl(text, 2, cap)


def S(text):
    return parse_series(text, 2)


def P(text):
    return parse_scalar(text, 2)


@pytest.fixture(scope="module")
def curved_euler(curved, curved_cfg):
    return {k: solve_h_alpha(curved, p) for k, p in curved_cfg.potentials.items()}


class TestPotentials:
    def test_auto_flat(self, flat6):
        p = PotentialChoice.auto(flat6.chart)
        assert p.theta == W("1/2*x2 @ dx1 - 1/2*x1 @ dx2")
        assert [str(c) for c in p.xi] == ["1/2*x1", "1/2*x2"]
        assert check_potential(flat6.chart, p).ok

    def test_auto_curved(self, curved_cfg):
        for p in curved_cfg.potentials.values():
            assert check_potential(curved_cfg.chart, p).ok

    def test_wrong_sign_detected(self, flat6):
        theta = W("1/2*x1 @ dx2 - 1/2*x2 @ dx1")
        p = PotentialChoice(theta, {}, xi_from_theta(flat6.pd, theta), "bad")
        names = [n for n, _ in check_potential(flat6.chart, p).failures()]
        assert "[bad] d theta = -omega" in names


class TestT:
    def test_flat_zero(self, flat6):
        Sx, T = tensor_T_alpha(flat6.chart, PotentialChoice.auto(flat6.chart))
        assert not T
        assert all(not v for m in Sx for row in m for v in row)

    def test_curved_identities(self, curved, curved_cfg):
        gens = generator_set(2, 6, max_deg=2)
        for p in curved_cfg.potentials.values():
            rep = T_alpha_report(curved, p, generators=gens)
            assert rep.ok, str(rep)


class TestH:
    def test_flat_zero(self, flat6):
        e = solve_h_alpha(flat6, PotentialChoice.auto(flat6.chart))
        assert not e.h

    def test_flat_constant_omega(self, flat_omega_c):
        st = flat_omega_c
        e = solve_h_alpha(st, PotentialChoice.auto(st.chart))
        assert e.h
        assert fedosov_D(st, e.h).truncate(4) == e.source.truncate(4)
        assert e.h.min_degree() >= 3
        assert not sigma_project(e.h)

    def test_flat_examples(self, flat6):
        e = solve_h_alpha(flat6, PotentialChoice.auto(flat6.chart))
        assert euler_derivation_apply(flat6, e, "x1") == S("1/2*x1")
        x12 = euler_derivation_apply(flat6, e, "x1*x2 + 1/2*nu")
        assert x12 == S("x1*x2 + 1/2*nu")

    def test_curved_report(self, curved, curved_euler):
        pairs = [(P("x1"), P("x2")), (P("x1*x2 + x2^2"), P("x1^2 - 2*x2"))]
        gens = generator_set(2, 6, max_deg=2)
        for e in curved_euler.values():
            rep = euler_report(curved, e, pairs, gens)
            assert rep.ok, str(rep)


class TestCartan:
    def test_flat_constant_field(self, flat6):
        rep = cartan_formula_check(flat6, X=vector_field(2, {1: 1}), generators=generator_set(2, 6, 2))
        assert rep.ok

    def test_flat_hamiltonian(self, flat6):
        rep = cartan_formula_check(flat6, f="x1", generators=generator_set(2, 6, 2))
        assert rep.ok and len(rep.checks) == 2

    def test_curved_general(self, curved):
        rep = cartan_formula_check(curved, X=vector_field(2, {2: "x1"}))
        assert rep.ok, str(rep)

    def test_detects_wrong_field(self, curved):
        """Feeding the Hamiltonian form a field that is not X_f must fail."""
        from fedosov.euler import cartan_hamiltonian_rhs
        from fedosov.fibrewise import lie_derivative_field
        a = W("x1*dx1*dx2", 6)
        X = vector_field(2, {1: 1})
        assert lie_derivative_field(X, a).truncate(4) != cartan_hamiltonian_rhs(curved, P("x2^2"), a).truncate(4)


class TestC2:
    def test_flat_zero(self, flat6):
        for f, g in [("x1", "x2"), ("x1^2*x2", "x2^3 + x1")]:
            assert not c2_minus(flat6, f, g)

    def test_constant_omega(self, flat_omega_c):
        assert c2_minus(flat_omega_c, "x1", "x2") == P("-3/2")

    def test_s1(self):
        st = build_state(ChartData.build(STD, s="nu*x1*dx2", cap=6))
        rho = rho2_form(st.chart)
        assert rho == W("-1/2 @ dx1&dx2")
        for f, g in [("x1", "x2"), ("x1^2", "x1*x2"), ("x2^3", "x1 + x2^2")]:
            fs, gs = P(f), P(g)
            val = sigma_project(evaluate_two_form(rho, hamiltonian_field(st.pd, fs), hamiltonian_field(st.pd, gs)))[0]
            assert c2_minus(st, fs, gs) == val
        assert rho2_from_star(st) == rho

    def test_curved(self, curved):
        assert rho2_from_star(curved) == rho2_form(curved.chart)


class TestCharacteristic:
    def test_flat(self, flat6):
        cf = characteristic_form(flat6)
        assert set(cf.terms) == {-1} and cf.certified

    def test_constant_omega(self, flat_omega_c):
        cf = characteristic_form(flat_omega_c)
        assert cf.terms[0] == W("3 @ dx1&dx2")
        assert cf.rho2 == W("-3/2 @ dx1&dx2")
        assert cf.certified

    def test_s1(self):
        st = build_state(ChartData.build(STD, s="nu*x1*dx2", cap=6))
        cf = characteristic_form(st)
        assert set(cf.terms) == {-1}
        assert cf.rho2 == exterior_d(W("-1/2*x1 @ dx2"))
        assert cf.certified
        assert cf.lines()[-1].startswith("PASS")


class TestPair:
    def test_identical_choices(self, flat6):
        e = solve_h_alpha(flat6, PotentialChoice.auto(flat6.chart))
        d_ab, rep = deligne_pair_check(flat6, e, e, ["x1", "x1*x2"])
        assert not d_ab and rep.ok

    def test_flat_shift(self, flat6):
        pA = PotentialChoice.auto(flat6.chart, "A")
        pB = PotentialChoice.from_forms(flat6.chart, pA.theta + W("x2 @ dx1 + x1 @ dx2"), label="B")
        eA, eB = solve_h_alpha(flat6, pA), solve_h_alpha(flat6, pB)
        d_ab, rep = deligne_pair_check(flat6, eA, eB, ["x1", "x2^2", "x1*x2"])
        assert d_ab == S("-x1*x2")
        assert rep.ok, str(rep)

    def test_curved(self, curved, curved_euler):
        eA, eB = curved_euler["A"], curved_euler["B"]
        d_ab, rep = deligne_pair_check(curved, eA, eB, ["x1", "x2", "x1*x2", "x2^3 - x1^2"])
        assert rep.ok, str(rep)

    def test_correction_needed_with_s1(self):
        """With a nu-weighted symmetric-degree-one part of s, d_ab = f_ab + a_ab alone fails."""
        st = build_state(ChartData.build(STD, s="nu*x1*dx2", cap=6))
        pA = PotentialChoice.auto(st.chart, "A")
        pB = PotentialChoice.from_forms(st.chart, pA.theta + W("x2 @ dx1 + x1 @ dx2"), label="B")
        eA, eB = solve_h_alpha(st, pA), solve_h_alpha(st, pB)
        d_ab, f_ab, a_ab, correction, target = deligne_pair(st, eA, eB)
        assert correction
        g = S("x1")
        lhs = (euler_derivation_apply(st, eA, g) - euler_derivation_apply(st, eB, g)).truncate(2)

        def ad(d):
            from fedosov.fedosov import star_multiply
            return (star_multiply(st, d, g) - star_multiply(st, g, d)).shift(-1).truncate(2)

        assert ad(d_ab) == lhs
        assert ad(f_ab + a_ab) != lhs

    def test_non_closed_difference_reported(self, flat6):
        pA = PotentialChoice.auto(flat6.chart, "A")
        theta = pA.theta + W("x1 @ dx2")
        pB = PotentialChoice(theta, {}, xi_from_theta(flat6.pd, theta), "B")
        eA = solve_h_alpha(flat6, pA)
        eB = solve_h_alpha(flat6, pB, check=False)
        d_ab, rep = deligne_pair_check(flat6, eA, eB, ["x1"])
        assert not rep.ok and not d_ab
        assert rep.failures()[0][0].endswith("are closed")
