"""Seeded identity suites shared by the command line and the test-suite.

Each suite takes a :class:`~fedosov.config.Config` (and a solved state when
it needs one) and returns a :class:`~fedosov.fedosov.ValidationReport`.
Randomness always comes from ``random.Random(seed)`` so reports are
reproducible byte for byte.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Dict, List, Optional, Tuple

from .config import Config
from .euler import (
    PotentialChoice,
    c2_minus,
    cartan_formula_check,
    characteristic_form,
    check_potential,
    deligne_pair_check,
    euler_report,
    generator_set,
    rho2_form,
    solve_h_alpha,
)
from .fedosov import (
    FedosovState,
    ValidationReport,
    d_inverse_homotopy,
    extract_Ck,
    fedosov_D,
    hamiltonian_field,
    poisson_bracket,
    star_multiply,
    taylor_series,
)
from .forms import evaluate_two_form
from .scalar_poly import GaussianRational, NuSeries, Scalar, parse_scalar
from .symmetry import (
    FormalOperator,
    check_antiautomorphism,
    operator_compose,
    operator_exp,
    operator_inverse,
    operator_log,
    star_variant,
)
from .weyl import (
    WeylElement,
    delta,
    delta_inv,
    format_weyl,
    parse_weyl,
    sigma_project,
    vector_field,
)

__all__ = [
    "random_scalar",
    "random_weyl",
    "random_pairs",
    "SUITES",
    "run_suite",
]


def _rand_rational(rng: random.Random, complex_coeffs: bool = False) -> GaussianRational:
    re_ = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    im_ = Fraction(rng.randint(-4, 4), rng.randint(1, 3)) if complex_coeffs else 0
    return GaussianRational(re_, im_)


def random_scalar(rng: random.Random, dim: int, max_deg: int = 3, min_deg: int = 1,
                  density: float = 0.5, complex_coeffs: bool = False) -> Scalar:
    """Random polynomial with small rational coefficients; never zero."""
    exps = [e for e in product(range(max_deg + 1), repeat=dim) if min_deg <= sum(e) <= max_deg]
    while True:
        terms = {e: _rand_rational(rng, complex_coeffs) for e in exps if rng.random() < density}
        s = Scalar(dim, terms)
        if s:
            return s


def random_pairs(rng: random.Random, dim: int, count: int, max_deg: int = 3,
                 arity: int = 2) -> List[Tuple[Scalar, ...]]:
    return [tuple(random_scalar(rng, dim, max_deg) for _ in range(arity)) for _ in range(count)]


def random_weyl(rng: random.Random, dim: int, cap: Optional[int] = None, max_sym: int = 3,
                max_anti: int = 2, coeff_deg: int = 2, max_nu: int = 1, terms: int = 4,
                anti: Optional[int] = None) -> WeylElement:
    """Random WeylElement; ``anti`` fixes the antisymmetric degree."""
    out = WeylElement.zero(dim, cap)
    antis = [A for p in range(min(max_anti, dim) + 1) for A in combinations(range(1, dim + 1), p)
             if anti is None or p == anti]
    for _ in range(terms):
        alpha = [rng.randint(0, max_sym) for _ in range(dim)]
        while sum(alpha) > max_sym:
            alpha[rng.randrange(dim)] -= 1
            alpha = [max(a, 0) for a in alpha]
        sym = [i + 1 for i, e in enumerate(alpha) for _ in range(e)]
        A = rng.choice(antis)
        c = random_scalar(rng, dim, coeff_deg, min_deg=0)
        out = out + WeylElement.monomial(dim, cap, sym=sym, anti=A, coeff=c, nu=rng.randint(0, max_nu))
    return out


def _first(a, b) -> str:
    d = a - b
    if isinstance(d, NuSeries):
        k, c = d.items()[0]
        return f"nu^{k}: {c}"
    return format_weyl(d)[:200]


# --------------------------------------------------------------------------
# suites

def suite_hodge(cfg: Config, st: Optional[FedosovState] = None) -> ValidationReport:
    rng = random.Random(cfg.seed)
    rep = ValidationReport()
    n = cfg.dim
    fails, first = 0, ""
    count = 200
    for _ in range(count):
        a = random_weyl(rng, n)
        back = delta(delta_inv(a)) + delta_inv(delta(a)) + WeylElement.from_series(sigma_project(a))
        if back != a:
            fails += 1
            first = first or f"on {format_weyl(a)}"
    rep.add(f"delta delta^-1 + delta^-1 delta + sigma = id on {count} random elements", not fails, first)
    fails, first = 0, ""
    for _ in range(count):
        a = random_weyl(rng, n)
        if delta(delta(a)) or delta_inv(delta_inv(a)):
            fails += 1
            first = first or f"on {format_weyl(a)}"
    rep.add(f"delta^2 = 0 and (delta^-1)^2 = 0 on {count} random elements", not fails, first)
    return rep


def _generators(cfg: Config) -> List[WeylElement]:
    return generator_set(cfg.dim, cfg.cap, max_deg=cfg.sizes["generator_degree"],
                         coeffs=("1",) + tuple(f"x{i + 1}" for i in range(cfg.dim)))


def suite_dsquare(cfg: Config, st: FedosovState) -> ValidationReport:
    N = cfg.cap
    rep = ValidationReport()
    res = st.r_equation_residual()
    rep.add(f"r equation holds through Deg {N - 1}", not res, format_weyl(res)[:200])
    res = st.normalisation_residual()
    rep.add("delta^-1 r = s", not res, format_weyl(res)[:200])
    gens = _generators(cfg)
    fails, first = 0, ""
    for a in gens:
        dd = fedosov_D(st, fedosov_D(st, a)).truncate(N - 2)
        if dd:
            fails += 1
            first = first or f"on {format_weyl(a)}: {format_weyl(dd)[:200]}"
    rep.add(f"D^2 = 0 through Deg {N - 2} on {len(gens)} generators", not fails, first)
    fails, first = 0, ""
    pos = [a for a in gens if all(A for (_, _, A) in a.keys())]
    for a in pos:
        Da = fedosov_D(st, a)
        lhs = (fedosov_D(st, d_inverse_homotopy(st, a)) + d_inverse_homotopy(st, Da)).truncate(N - 2)
        if lhs != a.truncate(N - 2):
            fails += 1
            first = first or f"on {format_weyl(a)}"
    rep.add(f"D D^-1 + D^-1 D = id through Deg {N - 2} on {len(pos)} form generators", not fails, first)
    rng = random.Random(cfg.seed)
    fails, first = 0, ""
    funcs = [random_scalar(rng, cfg.dim, 3) for _ in range(cfg.sizes["functions"])]
    for f in funcs:
        tf = taylor_series(st, f)
        if fedosov_D(st, tf).truncate(N - 2) or sigma_project(tf) != NuSeries.of(f):
            fails += 1
            first = first or f"f = {f}"
    rep.add(f"D tau(f) = 0 and sigma tau(f) = f on {len(funcs)} functions", not fails, first)
    return rep


def suite_assoc(cfg: Config, st: FedosovState) -> ValidationReport:
    rng = random.Random(cfg.seed)
    order = cfg.cap // 2
    rep = ValidationReport()
    triples = random_pairs(rng, cfg.dim, cfg.sizes["triples"], 3, arity=3)
    fails, first = 0, ""
    for f, g, h in triples:
        lhs = star_multiply(st, star_multiply(st, f, g), h).truncate(order)
        rhs = star_multiply(st, f, star_multiply(st, g, h)).truncate(order)
        if lhs != rhs:
            fails += 1
            first = first or f"f={f}, g={g}, h={h}: {_first(lhs, rhs)}"
    rep.add(f"(f*g)*h = f*(g*h) mod nu^{order + 1} on {len(triples)} triples", not fails, first)
    one = Scalar.constant(cfg.dim, 1)
    bad = [f for f, _, _ in triples if star_multiply(st, one, f) != NuSeries.of(f)
           or star_multiply(st, f, one) != NuSeries.of(f)]
    rep.add("1*f = f*1 = f", not bad, f"f = {bad[0]}" if bad else "")
    return rep


def cartan_fields(cfg: Config) -> List[Tuple[str, object, Optional[Scalar]]]:
    """Five test fields: three general ones and two Hamiltonian ones."""
    n = cfg.dim
    fields = [
        ("X = x1 d/dx2", vector_field(n, {2: "x1"}), None),
        ("X = d/dx1 + x2^2 d/dx2", vector_field(n, {1: "1", 2: "x2^2"}), None),
        ("X = x1*x2 d/dx1 - x2 d/dx2", vector_field(n, {1: "x1*x2", 2: "-x2"}), None),
    ]
    for text in ("x1^2*x2", "x1*x2 + x2^3"):
        f = parse_scalar(text, n)
        fields.append((f"X = X_f, f = {text}", hamiltonian_field(cfg.chart.pd, f), f))
    return fields


def suite_cartan(cfg: Config, st: FedosovState) -> ValidationReport:
    rep = ValidationReport()
    gens = _generators(cfg)
    for label, X, f in cartan_fields(cfg):
        sub = cartan_formula_check(st, X=X, f=f, generators=gens, label=label)
        for name, ok, detail in sub.checks:
            rep.add(name, ok, detail)
    return rep


def _potential_pair(cfg: Config) -> Tuple[PotentialChoice, PotentialChoice]:
    labels = sorted(cfg.potentials)
    pA = cfg.potentials[labels[0]]
    if len(labels) > 1:
        return pA, cfg.potentials[labels[1]]
    # second choice: shift theta by d(x1 x2) and each Theta_i by d(x1^2 x2)
    n = cfg.dim
    theta = pA.theta + parse_weyl("x2 @ dx1 + x1 @ dx2", n)
    Theta = {i: f + parse_weyl("(2*x1*x2) @ dx1 + (x1^2) @ dx2", n) for i, f in pA.Theta.items()}
    pB = PotentialChoice.from_forms(cfg.chart, theta, Theta, "B")
    return pA, pB


def suite_euler(cfg: Config, st: FedosovState) -> ValidationReport:
    rng = random.Random(cfg.seed)
    rep = ValidationReport()
    pairs = random_pairs(rng, cfg.dim, cfg.sizes["pairs"], 3)
    gens = _generators(cfg)
    for label in sorted(cfg.potentials):
        p = cfg.potentials[label]
        for name, ok, detail in check_potential(cfg.chart, p).checks:
            rep.add(name, ok, detail)
        e = solve_h_alpha(st, p)
        for name, ok, detail in euler_report(st, e, pairs, gens).checks:
            rep.add(name, ok, detail)
    return rep


def suite_deligne_pair(cfg: Config, st: FedosovState) -> ValidationReport:
    rng = random.Random(cfg.seed)
    pA, pB = _potential_pair(cfg)
    rep = ValidationReport()
    for p in (pA, pB):
        for name, ok, detail in check_potential(cfg.chart, p).checks:
            rep.add(name, ok, detail)
    eA, eB = solve_h_alpha(st, pA), solve_h_alpha(st, pB)
    tests = [random_scalar(rng, cfg.dim, 3) for _ in range(cfg.sizes["functions"])]
    d_ab, sub = deligne_pair_check(st, eA, eB, tests)
    for name, ok, detail in sub.checks:
        rep.add(name, ok, detail)
    return rep


def suite_c2(cfg: Config, st: FedosovState) -> ValidationReport:
    rng = random.Random(cfg.seed)
    rep = ValidationReport()
    pairs = random_pairs(rng, cfg.dim, 30, 3)
    rho = rho2_form(cfg.chart)
    fails, first = 0, ""
    for f, g in pairs:
        lhs = c2_minus(st, f, g)
        Xf = hamiltonian_field(cfg.chart.pd, f)
        Xg = hamiltonian_field(cfg.chart.pd, g)
        rhs = sigma_project(evaluate_two_form(rho, Xf, Xg))[0]
        if lhs != rhs:
            fails += 1
            first = first or f"f={f}, g={g}: {lhs} != {rhs}"
    rep.add(f"C2^-(f,g) = -1/2 (Omega_1 + d s_1)(X_f, X_g) on {len(pairs)} pairs", not fails, first)
    fails, first = 0, ""
    for f, g in pairs:
        c1 = extract_Ck(st, 1, f, g)
        pb = poisson_bracket(cfg.chart.pd, f, g).scale(Fraction(1, 2))
        if c1 != pb:
            fails += 1
            first = first or f"f={f}, g={g}"
    rep.add(f"C1(f,g) = 1/2 {{f,g}} on {len(pairs)} pairs", not fails, first)
    cf = characteristic_form(st)
    rep.add("rho_2 + 1/2 Omega_1 is exact (d of -1/2 s_1)", cf.certified, format_weyl(cf.rho2))
    return rep


def suite_symmetry(cfg: Config, st: FedosovState) -> ValidationReport:
    """Variant involutions, operator calculus round trips and the P/C properties.

    The P and C properties are facts about the configured star product, so
    they are reported as ``info`` lines rather than counted as checks.
    """
    rng = random.Random(cfg.seed)
    n = cfg.dim
    order = cfg.cap // 2
    rep = ValidationReport()
    pairs = random_pairs(rng, n, 10, 3)
    fails = 0
    for f, g in pairs:
        base = star_multiply(st, f, g).truncate(order)
        for tag, inv in (("parity", lambda s: s.parity()), ("conjugate", lambda s: s.conjugate())):
            twice = inv(star_variant(st, tag, inv(NuSeries.of(f)), inv(NuSeries.of(g)))).truncate(order)
            if twice != base:
                fails += 1
    rep.add(f"P and C variants are involutions on {len(pairs)} pairs", not fails, "")
    fails = 0
    for f, g, h in random_pairs(rng, n, 5, 2, arity=3):
        for tag in ("opposite", "parity", "conjugate"):
            lhs = star_variant(st, tag, star_variant(st, tag, f, g), h).truncate(order)
            rhs = star_variant(st, tag, f, star_variant(st, tag, g, h)).truncate(order)
            if lhs != rhs:
                fails += 1
    rep.add("opposite, parity and conjugate variants are associative on 5 triples", not fails, "")
    K = 4
    fails = 0
    for _ in range(5):
        ops = {k: {tuple(rng.randint(0, 2) for _ in range(n)): random_scalar(rng, n, 2, 0, complex_coeffs=True)}
               for k in range(1, K + 1)}
        N_ = FormalOperator(n, K, ops)
        A = FormalOperator.identity(n, K) + N_
        Ainv = operator_inverse(A)
        ok = operator_compose(A, Ainv) == FormalOperator.identity(n, K) == operator_compose(Ainv, A)
        ok = ok and operator_exp(operator_log(A)) == A and operator_log(operator_exp(N_)) == N_
        fails += not ok
    rep.add(f"operator inverse, exp and log round trips mod nu^{K + 1} on 5 random operators",
            not fails, "")
    for which in ("P", "C"):
        sub = check_antiautomorphism(st, which, order=min(order, 2))
        rep.info(f"star product has the {which} property: {'yes' if sub.ok else 'no'}")
    return rep


SUITES: Dict[str, Callable[..., ValidationReport]] = {
    "hodge": suite_hodge,
    "dsquare": suite_dsquare,
    "assoc": suite_assoc,
    "cartan": suite_cartan,
    "euler": suite_euler,
    "deligne-pair": suite_deligne_pair,
    "c2": suite_c2,
    "symmetry": suite_symmetry,
}

NEEDS_STATE = {name for name in SUITES if name != "hodge"}


def run_suite(name: str, cfg: Config, st: Optional[FedosovState] = None) -> ValidationReport:
    """Run one named suite; the solved state is required except for ``hodge``."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if name in NEEDS_STATE and st is None:
        raise ValueError(f"suite {name!r} needs a solved state")
    return SUITES[name](cfg, st)
