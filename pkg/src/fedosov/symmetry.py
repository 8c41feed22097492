"""Star-product variants, Weyl-type data and symmetrisation of equivalences.

A :class:`FormalOperator` is a nu-series ``sum_k nu^k T_k`` of linear
differential operators with polynomial coefficients, stored as
``{k: {gamma: Scalar}}`` where ``gamma`` is the derivative multi-index.
Series are truncated at a maximal nu power ``order``.

Text form, one line per nu power (canonical order: nu power, then the
derivative multi-index descending in graded-lex order)::

    nu^0: (1) * d/dx^(0,0)
    nu^1: (x1) * d/dx^(1,0) + (i) * d/dx^(0,1)
"""

from __future__ import annotations

import random
import re
from fractions import Fraction
from itertools import product
from math import comb
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .fedosov import FedosovState, ValidationReport, star_multiply
from .fibrewise import PoissonData
from .scalar_poly import (
    GaussianRational,
    NuSeries,
    Scalar,
    monomial_key,
    parse_scalar,
    parse_series,
)
from .weyl import WeylElement, parse_weyl

__all__ = [
    "FormalOperator",
    "parse_operator",
    "operator_compose",
    "operator_inverse",
    "operator_exp",
    "operator_log",
    "operator_power",
    "conjugate_operator",
    "parity_operator",
    "inner_derivation",
    "random_moyal_derivation",
    "STAR_VARIANTS",
    "star_variant",
    "check_antiautomorphism",
    "build_weyl_type_data",
    "monomials",
    "check_equivalence",
    "check_derivation",
    "symmetrize_equivalence",
]

Multi = Tuple[int, ...]


def _dmono(f: Scalar, gamma: Multi) -> Scalar:
    for i, g in enumerate(gamma):
        for _ in range(g):
            f = f.derivative(i + 1)
            if not f:
                return f
    return f


class FormalOperator:
    """Formal series of differential operators truncated at ``nu^order``."""

    __slots__ = ("dim", "order", "terms")

    def __init__(self, dim: int, order: int, terms: Optional[Mapping[int, Mapping[Multi, Scalar]]] = None):
        self.dim = dim
        self.order = order
        clean: Dict[int, Dict[Multi, Scalar]] = {}
        for k, ops in (terms or {}).items():
            if k < 0:
                raise ValueError("negative nu power in operator")
            if k > order:
                continue
            row = {}
            for gamma, c in ops.items():
                gamma = tuple(gamma)
                if len(gamma) != dim or min(gamma, default=0) < 0:
                    raise ValueError("malformed derivative multi-index")
                if not isinstance(c, Scalar):
                    c = parse_scalar(c, dim) if isinstance(c, str) else Scalar.constant(dim, c)
                if c:
                    row[gamma] = row[gamma] + c if gamma in row else c
            row = {g: c for g, c in row.items() if c}
            if row:
                clean[k] = row
        self.terms = clean

    # -- constructors ------------------------------------------------------
    @classmethod
    def identity(cls, dim: int, order: int) -> "FormalOperator":
        return cls(dim, order, {0: {(0,) * dim: Scalar.constant(dim, 1)}})

    @classmethod
    def zero(cls, dim: int, order: int) -> "FormalOperator":
        return cls(dim, order, {})

    @classmethod
    def vector_field(cls, dim: int, order: int, components: Mapping[int, object], nu: int = 0) -> "FormalOperator":
        """``nu^nu X^i d_i`` from a 1-based component map."""
        row = {}
        for i, c in components.items():
            g = tuple(1 if j == i - 1 else 0 for j in range(dim))
            row[g] = c
        return cls(dim, order, {nu: row})

    # -- algebra -----------------------------------------------------------
    def with_order(self, order: int) -> "FormalOperator":
        return FormalOperator(self.dim, order, self.terms)

    def __add__(self, other: "FormalOperator") -> "FormalOperator":
        order = min(self.order, other.order)
        out: Dict[int, Dict[Multi, Scalar]] = {k: dict(v) for k, v in self.terms.items()}
        for k, ops in other.terms.items():
            row = out.setdefault(k, {})
            for g, c in ops.items():
                row[g] = row[g] + c if g in row else c
        return FormalOperator(self.dim, order, out)

    def __neg__(self) -> "FormalOperator":
        return FormalOperator(self.dim, self.order, {k: {g: -c for g, c in v.items()}
                                                     for k, v in self.terms.items()})

    def __sub__(self, other: "FormalOperator") -> "FormalOperator":
        return self + (-other)

    def scale(self, factor) -> "FormalOperator":
        factor = GaussianRational.coerce(factor)
        return FormalOperator(self.dim, self.order, {k: {g: c.scale(factor) for g, c in v.items()}
                                                     for k, v in self.terms.items()})

    def shift_nu(self, n: int) -> "FormalOperator":
        return FormalOperator(self.dim, self.order, {k + n: v for k, v in self.terms.items()})

    def __matmul__(self, other: "FormalOperator") -> "FormalOperator":
        return operator_compose(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormalOperator):
            return NotImplemented
        order = min(self.order, other.order)
        a = self.with_order(order).terms
        b = other.with_order(order).terms
        return self.dim == other.dim and a == b

    def __hash__(self):
        return hash((self.dim, self.order, str(self)))

    def nu_part(self, k: int) -> Dict[Multi, Scalar]:
        return dict(self.terms.get(k, {}))

    def is_identity_leading(self) -> bool:
        return self.terms.get(0, {}) == {(0,) * self.dim: Scalar.constant(self.dim, 1)}

    def apply(self, f) -> NuSeries:
        """Act on a nu-series (or Scalar, or text) and truncate at ``nu^order``."""
        if isinstance(f, str):
            f = parse_series(f, self.dim)
        f = NuSeries.of(f)
        out: Dict[int, Scalar] = {}
        for k, ops in self.terms.items():
            for j, fj in f.items():
                if k + j > self.order:
                    continue
                acc = out.get(k + j, Scalar.zero(self.dim))
                for g, c in ops.items():
                    d = _dmono(fj, g)
                    if d:
                        acc = acc + c * d
                out[k + j] = acc
        return NuSeries(self.dim, out)

    def __call__(self, f) -> NuSeries:
        return self.apply(f)

    def conjugate(self) -> "FormalOperator":
        """``C T C``: conjugate coefficients and flip odd nu powers."""
        return FormalOperator(self.dim, self.order, {
            k: {g: (-c.conjugate() if k % 2 else c.conjugate()) for g, c in v.items()}
            for k, v in self.terms.items()})

    def parity(self) -> "FormalOperator":
        """``P T P``: flip odd nu powers."""
        return FormalOperator(self.dim, self.order, {
            k: {g: (-c if k % 2 else c) for g, c in v.items()} for k, v in self.terms.items()})

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        lines = []
        for k in sorted(self.terms):
            row = self.terms[k]
            parts = [f"({row[g]}) * d/dx^({','.join(map(str, g))})"
                     for g in sorted(row, key=monomial_key)]
            lines.append(f"nu^{k}: " + " + ".join(parts))
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"FormalOperator(dim={self.dim}, order={self.order}, {str(self)!r})"


_LINE = re.compile(r"^\s*nu\^(\d+)\s*:\s*(.*)$")
_DERIV = re.compile(r"^d/dx\^\(([\d,\s]*)\)$")


def _split_plus(text: str) -> List[str]:
    out, depth, cur = [], 0, []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch == "+":
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
        i += 1
    out.append("".join(cur))
    return [p.strip() for p in out if p.strip()]


def parse_operator(text: str, dim: int, order: Optional[int] = None) -> FormalOperator:
    """Parse the text form of a :class:`FormalOperator`.

    ``order`` defaults to the highest nu power present.
    """
    terms: Dict[int, Dict[Multi, Scalar]] = {}
    text = text.strip()
    if text in ("", "0"):
        return FormalOperator(dim, order or 0, {})
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.strip().startswith("#"):
            continue
        m = _LINE.match(line)
        if not m:
            raise ValueError(f"line {lineno}: expected 'nu^k: ...'")
        k = int(m.group(1))
        row = terms.setdefault(k, {})
        for part in _split_plus(m.group(2)):
            if not part.startswith("("):
                raise ValueError(f"line {lineno}: term must start with '(coefficient)'")
            depth = 0
            for pos, ch in enumerate(part):
                depth += ch == "("
                depth -= ch == ")"
                if depth == 0:
                    break
            coeff = parse_scalar(part[1:pos], dim)
            rest = part[pos + 1:].strip()
            if not rest.startswith("*"):
                raise ValueError(f"line {lineno}: expected '*' after coefficient")
            dm = _DERIV.match(rest[1:].strip())
            if not dm:
                raise ValueError(f"line {lineno}: bad derivative {rest[1:].strip()!r}")
            gamma = tuple(int(v) for v in dm.group(1).split(",") if v.strip())
            if len(gamma) != dim:
                raise ValueError(f"line {lineno}: multi-index needs {dim} entries")
            row[gamma] = row[gamma] + coeff if gamma in row else coeff
    top = max(terms, default=0)
    return FormalOperator(dim, top if order is None else order, terms)


# --------------------------------------------------------------------------
# composition and functional calculus

def _compose_terms(a: Mapping[Multi, Scalar], b: Mapping[Multi, Scalar], dim: int) -> Dict[Multi, Scalar]:
    """``(c d^alpha) o (e d^beta) = c sum_mu C(alpha, mu) (d^mu e) d^(alpha - mu + beta)``."""
    out: Dict[Multi, Scalar] = {}
    for alpha, c in a.items():
        for beta, e in b.items():
            for mu in product(*(range(x + 1) for x in alpha)):
                de = _dmono(e, mu)
                if not de:
                    continue
                w = 1
                for x, m in zip(alpha, mu):
                    w *= comb(x, m)
                g = tuple(x - m + y for x, m, y in zip(alpha, mu, beta))
                v = (c * de).scale(w)
                out[g] = out[g] + v if g in out else v
    return out


def operator_compose(A: FormalOperator, B: FormalOperator) -> FormalOperator:
    """``A o B`` truncated at the smaller order."""
    if A.dim != B.dim:
        raise ValueError("dimension mismatch")
    order = min(A.order, B.order)
    out: Dict[int, Dict[Multi, Scalar]] = {}
    for ka, ta in A.terms.items():
        for kb, tb in B.terms.items():
            if ka + kb > order:
                continue
            row = out.setdefault(ka + kb, {})
            for g, c in _compose_terms(ta, tb, A.dim).items():
                row[g] = row[g] + c if g in row else c
    return FormalOperator(A.dim, order, out)


def _nilpotent_part(A: FormalOperator) -> FormalOperator:
    if not A.is_identity_leading():
        raise ValueError("operator must have the identity as its nu^0 part")
    return A - FormalOperator.identity(A.dim, A.order)


def operator_inverse(A: FormalOperator) -> FormalOperator:
    """Two-sided inverse of ``id + nu(...)``: ``sum_j (-N)^j``."""
    N = _nilpotent_part(A)
    out = FormalOperator.identity(A.dim, A.order)
    term = FormalOperator.identity(A.dim, A.order)
    for _ in range(A.order):
        term = operator_compose(term, -N)
        if not term.terms:
            break
        out = out + term
    return out


def operator_exp(D: FormalOperator) -> FormalOperator:
    """``exp(D)`` for ``D`` without nu^0 part."""
    if D.terms.get(0):
        raise ValueError("exp needs an operator without nu^0 part (pass nu*D)")
    out = FormalOperator.identity(D.dim, D.order)
    term = FormalOperator.identity(D.dim, D.order)
    for j in range(1, D.order + 1):
        term = operator_compose(term, D).scale(Fraction(1, j))
        if not term.terms:
            break
        out = out + term
    return out


def operator_log(A: FormalOperator) -> FormalOperator:
    """``log(A) = sum_j (-1)^(j+1) N^j / j`` for ``A = id + N``.

    Raises
    ------
    ValueError
        If the nu^0 part of ``A`` is not the identity.
    """
    N = _nilpotent_part(A)
    out = FormalOperator.zero(A.dim, A.order)
    term = FormalOperator.identity(A.dim, A.order)
    for j in range(1, A.order + 1):
        term = operator_compose(term, N)
        if not term.terms:
            break
        out = out + term.scale(Fraction((-1) ** (j + 1), j))
    return out


def operator_power(A: FormalOperator, t) -> FormalOperator:
    """``A^t = exp(t log A)``; ``t = 1/2`` gives the square root."""
    return operator_exp(operator_log(A).scale(t))


def conjugate_operator(T: FormalOperator) -> FormalOperator:
    return T.conjugate()


def parity_operator(T: FormalOperator) -> FormalOperator:
    return T.parity()


# --------------------------------------------------------------------------
# derivations of the Moyal product

def inner_derivation(pd: PoissonData, H, order: int) -> FormalOperator:
    """``f -> (1/nu)(H * f - f * H)`` for the Moyal product of ``pd``.

    Only odd contraction orders survive: the operator is
    ``sum_{m odd} 2 nu^(m-1) W_m(gamma, eps) (d^gamma H) d^eps``.
    """
    n = pd.dim
    if isinstance(H, str):
        H = parse_series(H, n)
    H = NuSeries.of(H)
    terms: Dict[int, Dict[Multi, Scalar]] = {}
    for j, Hj in H.items():
        m = 1
        while j + m - 1 <= order and m <= Hj.degree():
            for (gamma, eps), w in pd.weights(m).items():
                dH = _dmono(Hj, gamma)
                if not dH:
                    continue
                row = terms.setdefault(j + m - 1, {})
                v = dH.scale(w * 2)
                row[eps] = row[eps] + v if eps in row else v
            m += 2
    return FormalOperator(n, order, terms)


def random_moyal_derivation(pd: PoissonData, order: int, seed: int, max_deg: int = 3,
                            complex_coeffs: bool = True) -> FormalOperator:
    """Seeded derivation of the Moyal product.

    Sum of an inner derivation of a random polynomial series
    ``H_0 + nu H_1`` and a random constant (complex) translation field; both
    are derivations of the Moyal product.
    """
    rng = random.Random(seed)
    n = pd.dim

    def rnd_coeff():
        re_ = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        im_ = Fraction(rng.randint(-3, 3), rng.randint(1, 3)) if complex_coeffs else 0
        return GaussianRational(re_, im_)

    def rnd_poly(deg):
        terms = {}
        for e in product(range(deg + 1), repeat=n):
            if 2 <= sum(e) <= deg and rng.random() < 0.5:
                terms[e] = rnd_coeff()
        return Scalar(n, terms)

    H = NuSeries(n, {0: rnd_poly(max_deg), 1: rnd_poly(max_deg - 1)})
    D = inner_derivation(pd, H, order)
    trans = {i + 1: Scalar.constant(n, rnd_coeff()) for i in range(n)}
    return D + FormalOperator.vector_field(n, order, trans)


# --------------------------------------------------------------------------
# star-product variants

STAR_VARIANTS = ("opposite", "conjugate", "parity")


def _series(f, dim: int) -> NuSeries:
    if isinstance(f, str):
        return parse_series(f, dim)
    return NuSeries.of(f)


def star_variant(st: FedosovState, tag: str, f, g) -> NuSeries:
    """``f *bar g = g * f``; ``f *^C g = C(Cf * Cg)``; ``f *^P g = P(Pf * Pg)``."""
    f = _series(f, st.dim)
    g = _series(g, st.dim)
    if tag == "opposite":
        return star_multiply(st, g, f)
    if tag == "conjugate":
        return star_multiply(st, f.conjugate(), g.conjugate()).conjugate()
    if tag == "parity":
        return star_multiply(st, f.parity(), g.parity()).parity()
    raise ValueError(f"unknown star variant {tag!r}; expected one of {STAR_VARIANTS}")


def monomials(dim: int, max_deg: int, min_deg: int = 0) -> List[Scalar]:
    out = []
    for e in product(range(max_deg + 1), repeat=dim):
        if min_deg <= sum(e) <= max_deg:
            out.append(Scalar(dim, {e: 1}))
    return sorted(out, key=lambda s: (s.degree(),) + monomial_key(next(iter(s.terms))))


def check_antiautomorphism(st: FedosovState, which: str, max_deg: int = 3,
                           order: Optional[int] = None, pairs=None) -> ValidationReport:
    """Check ``f *^P g = g * f`` (``which='P'``) or ``f *^C g = g * f`` (``which='C'``)."""
    tags = {"P": "parity", "C": "conjugate"}
    if which not in tags:
        raise ValueError("which must be 'P' or 'C'")
    order = st.cap // 2 if order is None else order
    if pairs is None:
        mons = monomials(st.dim, max_deg)
        pairs = [(a, b) for a in mons for b in mons]
    rep = ValidationReport()
    fails, first = 0, ""
    for f, g in pairs:
        lhs = star_variant(st, tags[which], f, g).truncate(order)
        rhs = star_variant(st, "opposite", f, g).truncate(order)
        if lhs != rhs:
            fails += 1
            if not first:
                k, c = (lhs - rhs).items()[0]
                first = f"f={f}, g={g}: nu^{k}: {c}"
    rep.add(f"f *^{which} g = g * f mod nu^{order + 1} on {len(pairs)} pairs", not fails, first)
    return rep


def build_weyl_type_data(target: Mapping[int, object], mode: str, dim: int = 2,
                         s=None) -> Tuple[Dict[int, WeylElement], WeylElement]:
    """Choose ``Omega`` and ``s`` realising the classes ``c^k`` with the mode's symmetry.

    ``target[k]`` is a two-form (WeylElement or text) for ``c^k``; the
    choice is ``Omega_{k+1} = c^k``.

    Raises
    ------
    ValueError
        If the target violates the mode's necessary condition or ``s`` is
        not invariant.
    """
    if mode not in ("P", "C", "Weyl"):
        raise ValueError("mode must be P, C or Weyl")
    forms: Dict[int, WeylElement] = {}
    for k, v in target.items():
        f = parse_weyl(v, dim) if isinstance(v, str) else v.with_cap(None)
        if f:
            forms[int(k)] = f
    for k, f in forms.items():
        if mode in ("P", "Weyl") and k % 2 == 0:
            raise ValueError(f"mode {mode}: c^{k} must vanish (even classes are obstructed)")
        if mode in ("C", "Weyl"):
            conj = f.map_coeffs(lambda key, c: c.conjugate())
            if k % 2 == 0 and conj != -f:
                raise ValueError(f"mode {mode}: c^{k} must be purely imaginary")
            if k % 2 == 1 and conj != f:
                raise ValueError(f"mode {mode}: c^{k} must be real")
    Omega = {k + 1: f for k, f in sorted(forms.items())}
    if s is None:
        s = WeylElement.zero(dim)
    elif isinstance(s, str):
        s = parse_weyl(s, dim)
    if mode in ("P", "Weyl") and s.parity() != s:
        raise ValueError("s must satisfy P s = s")
    if mode in ("C", "Weyl") and s.conjugate() != s:
        raise ValueError("s must satisfy C s = s")
    return Omega, s


# --------------------------------------------------------------------------
# symmetrisation

def check_equivalence(T: FormalOperator, st1: FedosovState, st2: FedosovState,
                      mons: Sequence[Scalar], order: int) -> Tuple[bool, str]:
    """``T(f *1 g) = Tf *2 Tg`` modulo ``nu^(order+1)`` on all monomial pairs."""
    for f in mons:
        Tf = T.apply(f)
        for g in mons:
            lhs = T.apply(star_multiply(st1, f, g)).truncate(order)
            rhs = star_multiply(st2, Tf, T.apply(g)).truncate(order)
            if lhs != rhs:
                k, c = (lhs - rhs).items()[0]
                return False, f"f={f}, g={g}: nu^{k}: {c}"
    return True, ""


def check_derivation(D: FormalOperator, st: FedosovState, mons: Sequence[Scalar],
                     order: int) -> Tuple[bool, str]:
    """Leibniz rule ``D(f*g) = Df*g + f*Dg`` modulo ``nu^(order+1)``."""
    for f in mons:
        Df = D.apply(f)
        for g in mons:
            lhs = D.apply(star_multiply(st, f, g)).truncate(order)
            rhs = (star_multiply(st, Df, g) + star_multiply(st, f, D.apply(g))).truncate(order)
            if lhs != rhs:
                k, c = (lhs - rhs).items()[0]
                return False, f"f={f}, g={g}: nu^{k}: {c}"
    return True, ""


def _commutes(A: FormalOperator, B: FormalOperator, mons: Sequence[Scalar], order: int) -> Tuple[bool, str]:
    for f in mons:
        a = A.apply(f).truncate(order)
        b = B.apply(f).truncate(order)
        if a != b:
            k, c = (a - b).items()[0]
            return False, f"on {f}: nu^{k}: {c}"
    return True, ""


def symmetrize_equivalence(T: FormalOperator, st1: FedosovState, st2: FedosovState, mode: str,
                           max_deg: int = 3, test_deg: int = 4):
    """Average an equivalence ``T: *1 -> *2`` into one commuting with ``C``, ``P`` or both.

    Parameters
    ----------
    T : FormalOperator
        Equivalence with identity leading part; its ``order`` fixes the
        truncation (checks are modulo ``nu^(order+1)``).
    st1, st2 : FedosovState
        Source and target star products.
    mode : {'P', 'C', 'Weyl'}
    max_deg : int
        Monomial degree for the star-product checks.
    test_deg : int
        Monomial degree on which operator identities are compared.

    Returns
    -------
    S : FormalOperator
    report : ValidationReport

    Raises
    ------
    ValueError
        If ``T`` is not an equivalence or a star product lacks the mode's
        anti-automorphism property.
    """
    if mode not in ("P", "C", "Weyl"):
        raise ValueError("mode must be P, C or Weyl")
    K = T.order
    n = T.dim
    mons = monomials(n, max_deg)
    tmons = monomials(n, test_deg)
    rep = ValidationReport()
    ok, why = check_equivalence(T, st1, st2, mons, K)
    rep.add(f"T is an equivalence mod nu^{K + 1}", ok, why)
    if not ok:
        raise ValueError("T is not an equivalence: " + why)
    needed = ("P", "C") if mode == "Weyl" else (mode,)
    for which in needed:
        for lab, st in (("*1", st1), ("*2", st2)):
            r = check_antiautomorphism(st, which, max_deg=max_deg, order=K)
            rep.add(f"{lab} has the {which} property", r.ok, "; ".join(d for _, d in r.failures()))
            if not r.ok:
                raise ValueError(f"{lab} lacks the {which} anti-automorphism property")
    Tinv = operator_inverse(T)

    def average(base: FormalOperator, conj) -> Tuple[FormalOperator, FormalOperator]:
        A = operator_compose(operator_inverse(base), conj(base))
        logA = operator_log(A)
        ok, why = check_derivation(logA, st1, mons, K)
        rep.add(f"log A is a derivation of *1 mod nu^{K + 1}", ok, why)
        return operator_compose(base, operator_exp(logA.scale(Fraction(1, 2)))), A

    if mode == "C":
        S, _ = average(T, lambda X: X.conjugate())
    elif mode == "P":
        S, _ = average(T, lambda X: X.parity())
    else:
        S2, _ = average(T, lambda X: X.parity())
        A1 = operator_compose(Tinv, T.conjugate())
        A2 = operator_compose(Tinv, T.parity())
        half2 = operator_power(A2, Fraction(1, 2))
        F2 = operator_compose(operator_compose(operator_inverse(half2), A1), half2.conjugate())
        logF = operator_log(F2)
        ok, why = check_derivation(logF, st1, mons, K)
        rep.add(f"log F2 is a derivation of *1 mod nu^{K + 1}", ok, why)
        S = operator_compose(S2, operator_exp(logF.scale(Fraction(1, 2))))
    ok, why = check_equivalence(S, st1, st2, mons, K)
    rep.add(f"S is an equivalence mod nu^{K + 1}", ok, why)
    if mode in ("C", "Weyl"):
        ok, why = _commutes(S.conjugate(), S, tmons, K)
        rep.add(f"C S C = S on monomials of degree <= {test_deg}", ok, why)
    if mode in ("P", "Weyl"):
        ok, why = _commutes(S.parity(), S, tmons, K)
        rep.add(f"P S P = S on monomials of degree <= {test_deg}", ok, why)
    return S, rep
