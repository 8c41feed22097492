"""Local nu-Euler derivations and the identities built on them.

Given potentials ``theta`` (with ``d theta = -omega``) and ``Theta_i`` (with
``d Theta_i = Omega_i``) the vector field ``xi`` defined by
``i_xi omega = -theta`` is conformally symplectic.  From these data we build
``S = L_xi nabla``, the element ``T``, the one-form series
``A = (id - H) Theta`` and ``h = D^-1(1 (x) A + r - H r - T)``; the fibrewise
derivation ``E = H + (1/nu) ad(h)`` commutes with ``D`` and induces the
derivation ``E f = sigma(E tau(f))`` of the star product.

The module also contains the two forms of the deformed Cartan formula, the
antisymmetric second-order cochain ``C_2^-`` with its two-form ``rho_2``, the
comparison of two potential choices and the characteristic form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .fedosov import (
    ChartData,
    FedosovState,
    ValidationReport,
    d_inverse_homotopy,
    extract_Ck,
    fedosov_D,
    hamiltonian_field,
    nabla_apply,
    star_multiply,
    symmetric_covariant,
    taylor_series,
)
from .fibrewise import H_apply, PoissonData, ad_over_nu, lie_derivative_field
from .forms import (
    exterior_d,
    form_to_sym,
    interior,
    is_form,
    poincare_potential,
    sym_to_form,
)
from .scalar_poly import GaussianRational, NuSeries, Scalar, parse_series
from .weyl import (
    VectorField,
    WeylElement,
    delta,
    format_weyl,
    insert_anti,
    insert_sym,
    sigma_project,
)

__all__ = [
    "PotentialChoice",
    "EulerData",
    "xi_from_theta",
    "check_potential",
    "S_tensor",
    "tensor_T_alpha",
    "T_alpha_report",
    "A_series",
    "solve_h_alpha",
    "fibrewise_euler",
    "euler_derivation_apply",
    "euler_order",
    "euler_report",
    "cartan_general_rhs",
    "cartan_hamiltonian_rhs",
    "cartan_formula_check",
    "c2_minus",
    "rho2_form",
    "rho2_from_star",
    "s1_form",
    "deligne_pair",
    "deligne_pair_check",
    "CharacteristicForm",
    "characteristic_form",
    "generator_set",
]

HALF = GaussianRational(1) / 2


def _first_diff(a: WeylElement, b: WeylElement) -> str:
    d = a - b
    if not d:
        return ""
    text = format_weyl(d)
    return text.split(" + ")[0]


def _first_series_diff(a: NuSeries, b: NuSeries) -> str:
    d = a - b
    if not d:
        return ""
    k, c = d.items()[0]
    return f"nu^{k}: {c}"


# --------------------------------------------------------------------------
# potentials

def xi_from_theta(pd: PoissonData, theta: WeylElement) -> VectorField:
    """Vector field with ``i_xi omega = -theta``: ``xi^m = -Lambda^{mj} theta_j``."""
    from .forms import one_form_components
    comps = one_form_components(theta)
    n = pd.dim
    out = []
    for m in range(n):
        v = Scalar.zero(n)
        for j in range(n):
            if pd.lam[m][j] and comps[j]:
                v = v - pd.lam[m][j] * comps[j]
        out.append(v)
    return tuple(out)


@dataclass
class PotentialChoice:
    """Local potentials ``theta``, ``Theta_i`` and the induced field ``xi``.

    Attributes
    ----------
    theta : WeylElement
        One-form with ``d theta = -omega``.
    Theta : dict
        ``{i: one-form}`` with ``d Theta_i = Omega_i``.
    xi : tuple of Scalar
        Components of ``xi`` with ``i_xi omega = -theta``.
    label : str
        Name of the choice (plays the role of a chart index).
    """

    theta: WeylElement
    Theta: Dict[int, WeylElement]
    xi: VectorField
    label: str = "A"

    @classmethod
    def auto(cls, chart: ChartData, label: str = "A") -> "PotentialChoice":
        """Radial-homotopy potentials: ``theta = -K(omega)``, ``Theta_i = K(Omega_i)``."""
        theta = -poincare_potential(chart.omega_form())
        Theta = {i: poincare_potential(f) for i, f in sorted(chart.Omega.items()) if f}
        return cls(theta, Theta, xi_from_theta(chart.pd, theta), label)

    @classmethod
    def from_forms(cls, chart: ChartData, theta, Theta=None, label: str = "A") -> "PotentialChoice":
        """Build from explicit one-forms (WeylElement or text); missing ``Theta_i`` default to radial."""
        from .weyl import parse_weyl
        n = chart.dim
        if isinstance(theta, str):
            theta = parse_weyl(theta, n)
        Th = {}
        for i, f in sorted(chart.Omega.items()):
            given = (Theta or {}).get(i)
            if given is None:
                if f:
                    Th[i] = poincare_potential(f)
            else:
                Th[i] = parse_weyl(given, n) if isinstance(given, str) else given
        return cls(theta, Th, xi_from_theta(chart.pd, theta), label)

    def Theta_series(self) -> WeylElement:
        n = self.theta.dim
        out = WeylElement.zero(n)
        for i, f in sorted(self.Theta.items()):
            out = out + f.shift_nu(i)
        return out


def check_potential(chart: ChartData, p: PotentialChoice) -> ValidationReport:
    rep = ValidationReport()
    om = chart.omega_form()
    rep.add(f"[{p.label}] theta is a one-form", is_form(p.theta, 1), "")
    rep.add(f"[{p.label}] d theta = -omega", exterior_d(p.theta) == -om,
            _first_diff(exterior_d(p.theta), -om))
    rep.add(f"[{p.label}] i_xi omega = -theta", interior(p.xi, om) == -p.theta,
            _first_diff(interior(p.xi, om), -p.theta))
    rep.add(f"[{p.label}] L_xi omega = omega", lie_derivative_field(p.xi, om) == om,
            _first_diff(lie_derivative_field(p.xi, om), om))
    for i, f in sorted(chart.Omega.items()):
        Th = p.Theta.get(i, WeylElement.zero(chart.dim))
        rep.add(f"[{p.label}] d Theta_{i} = Omega_{i}", exterior_d(Th) == f,
                _first_diff(exterior_d(Th), f))
    return rep


# --------------------------------------------------------------------------
# S, T, A

def S_tensor(chart: ChartData, xi: VectorField):
    """``S[p][i][j] = ((L_xi nabla)_{d_i} d_j)^p``.

    ``S^p_ij = xi^m d_m Gamma^p_ij - Gamma^m_ij d_m xi^p + d_i d_j xi^p
    + Gamma^p_im d_j xi^m + Gamma^p_mj d_i xi^m``.
    """
    n = chart.dim
    g = chart.gamma
    S = [[[Scalar.zero(n) for _ in range(n)] for _ in range(n)] for _ in range(n)]
    dxi = [[xi[p].derivative(m + 1) for m in range(n)] for p in range(n)]  # dxi[p][m] = d_m xi^p
    for p in range(n):
        for i in range(n):
            for j in range(n):
                v = xi[p].derivative(i + 1).derivative(j + 1)
                for m in range(n):
                    if xi[m]:
                        v = v + xi[m] * g[p][i][j].derivative(m + 1)
                    v = v - g[m][i][j] * dxi[p][m] + g[p][i][m] * dxi[m][j] + g[p][m][j] * dxi[m][i]
                S[p][i][j] = v
    return S


def tensor_T_alpha(chart: ChartData, p: PotentialChoice):
    """Return ``(S, T)`` with ``T = 1/2 omega_ij S^j_kl y^i y^l (x) dx^k``."""
    n = chart.dim
    S = S_tensor(chart, p.xi)
    T = WeylElement.zero(n, chart.cap)
    for i in range(n):
        for j in range(n):
            w = chart.pd.omega[i][j]
            if not w:
                continue
            for k in range(n):
                for l in range(n):
                    c = S[j][k][l]
                    if c:
                        T = T + WeylElement.monomial(n, chart.cap, sym=(i + 1, l + 1), anti=(k + 1,),
                                                     coeff=(c * w).scale(HALF))
    return S, T


def generator_set(dim: int, cap: int, max_deg: int = 3, coeffs: Sequence[str] = ("1", "x1", "x2"),
                  antidegrees: Optional[Sequence[int]] = None) -> List[WeylElement]:
    """Monomial WeylElements of total degree ``<= max_deg`` with the given coefficients."""
    from itertools import combinations, product
    out = []
    antis = [A for p in range(dim + 1) for A in combinations(range(1, dim + 1), p)
             if antidegrees is None or p in antidegrees]
    for k in range(max_deg // 2 + 1):
        for alpha in product(range(max_deg + 1), repeat=dim):
            if sum(alpha) + 2 * k > max_deg:
                continue
            sym = [i + 1 for i, e in enumerate(alpha) for _ in range(e)]
            for A in antis:
                for c in coeffs:
                    out.append(WeylElement.monomial(dim, cap, sym=sym, anti=A, coeff=c, nu=k))
    return out


def T_alpha_report(st: FedosovState, p: PotentialChoice, S=None, T=None,
                   generators: Optional[List[WeylElement]] = None) -> ValidationReport:
    """Certify the structural identities satisfied by ``S`` and ``T``."""
    c = st.chart
    n = c.dim
    if S is None or T is None:
        S, T = tensor_T_alpha(c, p)
    rep = ValidationReport()
    lab = p.label
    bad = [(q, i, j) for q in range(n) for i in range(n) for j in range(n) if S[q][i][j] != S[q][j][i]]
    rep.add(f"[{lab}] S symmetric", not bad, f"at {bad[0]}" if bad else "")
    bad = []
    om = c.pd.omega
    for z in range(n):
        for x in range(n):
            for y in range(n):
                lhs = Scalar.zero(n)
                rhs = Scalar.zero(n)
                for m in range(n):
                    lhs = lhs + om[z][m] * S[m][x][y]
                    rhs = rhs + S[m][x][z] * om[m][y]
                if lhs != -rhs:
                    bad.append((z + 1, x + 1, y + 1))
    rep.add(f"[{lab}] omega(Z,S(X,Y)) = -omega(S(X,Z),Y)", not bad, f"at {bad[0]}" if bad else "")
    R = st.R
    alt = insert_anti(p.xi, R) + nabla_apply(c, symmetric_covariant(c, form_to_sym(p.theta)).scale(HALF))
    rep.add(f"[{lab}] T = i_a(xi)R + nabla(1/2 D theta)", alt.with_cap(c.cap) == T, _first_diff(alt, T))
    rep.add(f"[{lab}] delta T = 0", not delta(T), _first_diff(delta(T), WeylElement.zero(n)))
    lhs = nabla_apply(c, T)
    rhs = lie_derivative_field(p.xi, R) - R
    rep.add(f"[{lab}] nabla T = L_xi R - R", lhs == rhs, _first_diff(lhs, rhs))
    gens = generators if generators is not None else generator_set(n, c.cap)
    fails = 0
    first = ""
    for a in gens:
        l = ad_over_nu(T, a, c.pd)
        r = nabla_apply(c, lie_derivative_field(p.xi, a)) - lie_derivative_field(p.xi, nabla_apply(c, a))
        if l.truncate(c.cap - 1) != r.truncate(c.cap - 1):
            fails += 1
            first = first or f"on {format_weyl(a)}: {_first_diff(l, r)}"
    rep.add(f"[{lab}] (1/nu) ad(T) = [nabla, L_xi] on {len(gens)} generators", not fails, first)
    return rep


def A_series(chart: ChartData, p: PotentialChoice) -> WeylElement:
    """``A = (id - H) Theta = sum_i nu^i ((1 - i) Theta_i - L_xi Theta_i)``."""
    Th = p.Theta_series()
    return Th - H_apply(p.xi, Th)


# --------------------------------------------------------------------------
# h and the derivations

@dataclass
class EulerData:
    """Everything built from one potential choice on a solved state."""

    choice: PotentialChoice
    S: list
    T: WeylElement
    A: WeylElement
    h: WeylElement
    source: WeylElement = field(repr=False, default=None)


def euler_order(st: FedosovState) -> int:
    """Highest nu-order at which the induced derivation is certified: ``floor((N-2)/2)``."""
    return (st.cap - 2) // 2


def solve_h_alpha(st: FedosovState, p: PotentialChoice, check: bool = True) -> EulerData:
    """Solve ``D h = 1 (x) A + r - H r - T`` with ``sigma(h) = 0``.

    Raises
    ------
    ArithmeticError
        If the source fails the solvability condition ``D(source) = 0``.
    """
    c = st.chart
    N = c.cap
    S, T = tensor_T_alpha(c, p)
    A = A_series(c, p).with_cap(N)
    src = A + st.r - H_apply(p.xi, st.r) - T
    if check:
        cons = fedosov_D(st, src).truncate(N - 2)
        if cons:
            raise ArithmeticError("solvability condition D(1(x)A + r - Hr - T) = 0 fails: "
                                  + _first_diff(cons, WeylElement.zero(c.dim)))
    h = d_inverse_homotopy(st, src)
    return EulerData(p, S, T, A, h, src)


def fibrewise_euler(st: FedosovState, e: EulerData, a: WeylElement) -> WeylElement:
    """``E a = nu d/dnu a + L_xi a + (1/nu) ad(h) a``."""
    return H_apply(e.choice.xi, a) + ad_over_nu(e.h, a, st.pd)


def euler_derivation_apply(st: FedosovState, e: EulerData, f) -> NuSeries:
    """``E f = sigma(E tau(f))`` through nu-order ``euler_order(st)``."""
    if isinstance(f, str):
        f = parse_series(f, st.dim)
    f = NuSeries.of(f)
    tf = taylor_series(st, f)
    out = sigma_project(fibrewise_euler(st, e, tf))
    return out.truncate(euler_order(st))


def euler_report(st: FedosovState, e: EulerData, pairs: Iterable[Tuple], generators=None,
                 order: Optional[int] = None) -> ValidationReport:
    """Derivation identity on ``pairs`` (modulo ``nu^(order+1)``) and ``[D, E] = 0`` on generators."""
    c = st.chart
    lab = e.choice.label
    order = euler_order(st) if order is None else order
    rep = ValidationReport()
    dh = fedosov_D(st, e.h).truncate(c.cap - 2)
    rep.add(f"[{lab}] D h = 1(x)A + r - Hr - T", dh == e.source.truncate(c.cap - 2),
            _first_diff(dh, e.source.truncate(c.cap - 2)))
    rep.add(f"[{lab}] sigma(h) = 0", not sigma_project(e.h), "")
    rep.add(f"[{lab}] h has only terms of Deg >= 3", e.h.min_degree() < 0 or e.h.min_degree() >= 3,
            f"min Deg {e.h.min_degree()}")
    fails, first, count = 0, "", 0
    for f, g in pairs:
        count += 1
        fg = star_multiply(st, f, g)
        lhs = euler_derivation_apply(st, e, fg).truncate(order)
        rhs = (star_multiply(st, euler_derivation_apply(st, e, f), g)
               + star_multiply(st, f, euler_derivation_apply(st, e, g))).truncate(order)
        if lhs != rhs:
            fails += 1
            first = first or f"f={f}, g={g}: {_first_series_diff(lhs, rhs)}"
    rep.add(f"[{lab}] E(f*g) = Ef*g + f*Eg mod nu^{order + 1} on {count} pairs", not fails, first)
    gens = generators if generators is not None else generator_set(c.dim, c.cap)
    fails, first = 0, ""
    for a in gens:
        comm = fedosov_D(st, fibrewise_euler(st, e, a)) - fibrewise_euler(st, e, fedosov_D(st, a))
        comm = comm.truncate(c.cap - 2)
        if comm:
            fails += 1
            first = first or f"on {format_weyl(a)}: {_first_diff(comm, WeylElement.zero(c.dim))}"
    rep.add(f"[{lab}] [D, E] = 0 on {len(gens)} generators", not fails, first)
    # shape: E - nu d/dnu - L_xi starts at nu^1
    fails = 0
    for f, _ in pairs:
        fs = NuSeries.of(f if not isinstance(f, str) else parse_series(f, c.dim))
        rest = euler_derivation_apply(st, e, fs) - fs.nu_euler() - fs.map(
            lambda v: _apply_field(e.choice.xi, v))
        if rest[0]:
            fails += 1
    rep.add(f"[{lab}] E - nu d/dnu - L_xi starts at order nu^1", not fails, "")
    return rep


def _apply_field(X: VectorField, f: Scalar) -> Scalar:
    out = Scalar.zero(f.dim)
    for i, c in enumerate(X):
        if c:
            out = out + c * f.derivative(i + 1)
    return out


# --------------------------------------------------------------------------
# deformed Cartan formula

def _nabla_field(chart: ChartData, X: VectorField, i: int) -> VectorField:
    """``nabla_{d_i} X`` (0-based ``i``)."""
    n = chart.dim
    out = []
    for k in range(n):
        v = X[k].derivative(i + 1)
        for j in range(n):
            if X[j]:
                v = v + chart.gamma[k][i][j] * X[j]
        out.append(v)
    return tuple(out)


def cartan_general_rhs(st: FedosovState, X: VectorField, a: WeylElement) -> WeylElement:
    """``D i_a(X) + i_a(X) D + i_s(X) + dx^i v i_s(nabla_i X) + (1/nu) ad(i_a(X) r)``."""
    c = st.chart
    n = c.dim
    out = fedosov_D(st, insert_anti(X, a)) + insert_anti(X, fedosov_D(st, a)) + insert_sym(X, a)
    for i in range(n):
        yi = WeylElement.monomial(n, a.cap, sym=(i + 1,))
        out = out + yi * insert_sym(_nabla_field(c, X, i), a)
    return out + ad_over_nu(insert_anti(X, st.r), a, c.pd)


def cartan_hamiltonian_rhs(st: FedosovState, f: Scalar, a: WeylElement) -> WeylElement:
    """``D i_a(X_f) + i_a(X_f) D - (1/nu) ad(f + df + 1/2 D df - i_a(X_f) r)``."""
    c = st.chart
    X = hamiltonian_field(c.pd, f)
    df = form_to_sym(exterior_d(WeylElement.scalar(f)))
    gen = (WeylElement.scalar(f) + df + symmetric_covariant(c, df).scale(HALF)).with_cap(a.cap)
    gen = gen - insert_anti(X, st.r)
    return (fedosov_D(st, insert_anti(X, a)) + insert_anti(X, fedosov_D(st, a))
            - ad_over_nu(gen, a, c.pd))


def cartan_formula_check(st: FedosovState, X: Optional[VectorField] = None, f=None,
                         generators: Optional[List[WeylElement]] = None,
                         label: str = "") -> ValidationReport:
    """Compare ``L_X`` with the deformed Cartan formula on a generator set.

    With ``f`` given, ``X`` defaults to the Hamiltonian field of ``f`` and the
    Hamiltonian form of the formula is checked as well.  Agreement is
    required through Deg ``N - 2``.
    """
    c = st.chart
    if isinstance(f, str):
        from .scalar_poly import parse_scalar
        f = parse_scalar(f, c.dim)
    if X is None:
        if f is None:
            raise ValueError("need a vector field or a function")
        X = hamiltonian_field(c.pd, f)
    gens = generators if generators is not None else generator_set(c.dim, c.cap)
    lim = c.cap - 2
    name = label or "X = (" + ", ".join(str(v) for v in X) + ")"
    rep = ValidationReport()
    fails, first = 0, ""
    for a in gens:
        lhs = lie_derivative_field(X, a).truncate(lim)
        rhs = cartan_general_rhs(st, X, a).truncate(lim)
        if lhs != rhs:
            fails += 1
            first = first or f"on {format_weyl(a)}: {_first_diff(lhs, rhs)}"
    rep.add(f"Cartan (general) {name} on {len(gens)} generators", not fails, first)
    if f is not None:
        fails, first = 0, ""
        for a in gens:
            lhs = lie_derivative_field(X, a).truncate(lim)
            rhs = cartan_hamiltonian_rhs(st, f, a).truncate(lim)
            if lhs != rhs:
                fails += 1
                first = first or f"on {format_weyl(a)}: {_first_diff(lhs, rhs)}"
        rep.add(f"Cartan (Hamiltonian) f = {f} on {len(gens)} generators", not fails, first)
    return rep


# --------------------------------------------------------------------------
# C_2^- and rho_2

def c2_minus(st: FedosovState, f, g) -> Scalar:
    """``1/2 (C_2(f, g) - C_2(g, f))``."""
    return (extract_Ck(st, 2, f, g) - extract_Ck(st, 2, g, f)).scale(HALF)


def s1_form(chart: ChartData) -> WeylElement:
    """The one-form ``s_1`` in ``s^(3) = s_3 + nu s_1``."""
    part = chart.s.filter(lambda k: k[0] == 1 and sum(k[1]) == 1 and not k[2])
    return sym_to_form(part.shift_nu(-1)) if part else WeylElement.zero(chart.dim)


def rho2_form(chart: ChartData) -> WeylElement:
    """``rho_2 = -1/2 (Omega_1 + d s_1)``."""
    Om1 = chart.Omega.get(1, WeylElement.zero(chart.dim))
    return (Om1 + exterior_d(s1_form(chart))).scale(-HALF)


def rho2_from_star(st: FedosovState) -> WeylElement:
    """Two-form read off ``C_2^-`` on coordinate functions: ``rho = -omega P omega``."""
    n = st.dim
    if st.cap < 4:
        raise ValueError("C_2 needs cap N >= 4")
    xs = [Scalar.variable(n, a + 1) for a in range(n)]
    P = [[c2_minus(st, xs[a], xs[b]) if a != b else Scalar.zero(n) for b in range(n)] for a in range(n)]
    om = st.pd.omega
    out = WeylElement.zero(n)
    for m in range(n):
        for q in range(m + 1, n):
            v = Scalar.zero(n)
            for a in range(n):
                for b in range(n):
                    if om[m][a] and om[b][q] and P[a][b]:
                        v = v + om[m][a] * P[a][b] * om[b][q]
            v = -v
            if v:
                out = out + WeylElement.monomial(n, None, anti=(m + 1, q + 1), coeff=v)
    return out


# --------------------------------------------------------------------------
# pairs of potential choices

def deligne_pair(st: FedosovState, eA: EulerData, eB: EulerData):
    """Return ``(d_ab, f_ab, a_ab, correction, target)`` for two potential choices.

    ``d f_ab = theta_A - theta_B`` and
    ``d a_ab = -((A_A + i_xiA Omega) - (A_B + i_xiB Omega))``, both fixed by
    the radial primitive; ``target`` is the right-hand side ``d(f_ab + a_ab)``
    equals.  The flat section whose projection enters the commutator is
    ``f_ab + a_ab - sigma(i_a(X_{f_ab}) r)``; the last term is non-zero only
    when ``s`` has nu-weighted parts of symmetric degree one, since only
    those give ``r`` a part of symmetric degree zero.

    Raises
    ------
    ValueError
        If either right-hand side is not closed.
    """
    c = st.chart
    n = c.dim
    pA, pB = eA.choice, eB.choice
    dtheta = pA.theta - pB.theta
    if exterior_d(dtheta):
        raise ValueError("theta_A - theta_B is not closed")
    f_ab = poincare_potential(dtheta) if dtheta else WeylElement.zero(n)
    Om = c.Omega_series()
    diff = (A_series(c, pA) + interior(pA.xi, Om)) - (A_series(c, pB) + interior(pB.xi, Om))
    if exterior_d(diff):
        raise ValueError("(A_A + i_xiA Omega) - (A_B + i_xiB Omega) is not closed")
    a_ab = -poincare_potential(diff) if diff else WeylElement.zero(n)
    X = hamiltonian_field(c.pd, sigma_project(f_ab)[0])
    correction = sigma_project(insert_anti(X, st.r))
    d_ab = sigma_project(f_ab + a_ab) - correction
    target = dtheta - diff
    return d_ab, sigma_project(f_ab), sigma_project(a_ab), correction, target


def deligne_pair_check(st: FedosovState, eA: EulerData, eB: EulerData,
                       tests: Iterable, order: Optional[int] = None):
    """Verify ``(E_A - E_B) g = (1/nu)(d_ab * g - g * d_ab)`` on ``tests``.

    Returns
    -------
    d_ab : NuSeries
    report : ValidationReport
    """
    c = st.chart
    order = euler_order(st) if order is None else order
    rep = ValidationReport()
    pA, pB = eA.choice, eB.choice
    Om = c.Omega_series()
    d1 = exterior_d(pA.theta - pB.theta)
    d2 = exterior_d((A_series(c, pA) + interior(pA.xi, Om)) - (A_series(c, pB) + interior(pB.xi, Om)))
    rep.add("theta_A - theta_B and (A_A + i_xiA Omega) - (A_B + i_xiB Omega) are closed",
            not d1 and not d2, format_weyl(d1 + d2)[:200])
    if d1 or d2:
        return NuSeries(c.dim, {}), rep
    d_ab, f_ab, a_ab, correction, target = deligne_pair(st, eA, eB)
    dd = exterior_d(WeylElement.from_series(f_ab + a_ab))
    rep.add("d(f_ab + a_ab) = (theta_A - theta_B) - ((A_A + i_xiA Omega) - (A_B + i_xiB Omega))",
            dd == target, _first_diff(dd, target))
    fails, first, count = 0, "", 0
    for g in tests:
        count += 1
        if isinstance(g, str):
            g = parse_series(g, c.dim)
        g = NuSeries.of(g)
        lhs = (euler_derivation_apply(st, eA, g) - euler_derivation_apply(st, eB, g)).truncate(order)
        comm = star_multiply(st, d_ab, g) - star_multiply(st, g, d_ab)
        rhs = comm.shift(-1).truncate(order) if not comm[0] else None
        if rhs is None or lhs != rhs:
            fails += 1
            first = first or (f"g={g}: " + (_first_series_diff(lhs, rhs) if rhs is not None
                                              else "commutator has a nu^0 part"))
    rep.add(f"(E_A - E_B)(g) = (1/nu)[d_ab, g]_* mod nu^{order + 1} on {count} functions",
            not fails, first)
    return d_ab, rep


# --------------------------------------------------------------------------
# characteristic form

@dataclass
class CharacteristicForm:
    """Representative ``(1/nu)(omega + Omega)`` as ``{nu-power: two-form}``.

    ``terms[-1]`` is ``omega`` and ``terms[i - 1]`` is ``Omega_i``.  The
    certificate records that ``rho_2 + 1/2 Omega_1 = d(-1/2 s_1)``.
    """

    terms: Dict[int, WeylElement]
    rho2: WeylElement
    primitive: WeylElement
    certified: bool

    def lines(self) -> List[str]:
        out = []
        for k, f in sorted(self.terms.items()):
            out.append(f"nu^{k}: {format_weyl(f)}")
        out.append(f"rho_2 = {format_weyl(self.rho2)}")
        out.append(f"rho_2 + 1/2 Omega_1 = d({format_weyl(self.primitive)})")
        out.append(f"{'PASS' if self.certified else 'FAIL'} rho_2 + 1/2 Omega_1 is exact")
        return out


def characteristic_form(st: FedosovState) -> CharacteristicForm:
    c = st.chart
    terms = {-1: c.omega_form()}
    for i, f in sorted(c.Omega.items()):
        if f:
            terms[i - 1] = f
    rho = rho2_from_star(st)
    prim = s1_form(c).scale(-HALF)
    Om1 = c.Omega.get(1, WeylElement.zero(c.dim))
    ok = (rho + Om1.scale(HALF)) == exterior_d(prim)
    return CharacteristicForm(terms, rho, prim, ok)
