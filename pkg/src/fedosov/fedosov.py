"""Charts, the connection lift, the Fedosov recursion and the star product.

Conventions (all indices 0-based in code, 1-based in text):

* ``gamma[k][i][j]`` is the Christoffel symbol ``Gamma^k_{ij}``; the lift acts
  on a fibre monomial by ``d_i`` on coefficients and
  ``-Gamma^k_{ij} y^j d/dy^k`` on the symmetric part.
* ``R^t_{jkl} = d_k Gamma^t_{lj} - d_l Gamma^t_{kj}
  + Gamma^t_{km} Gamma^m_{lj} - Gamma^t_{lm} Gamma^m_{kj}`` and the curvature
  element is ``1/4 omega_{it} R^t_{jkl} y^i y^j (x) dx^k ^ dx^l``.  With this
  choice ``nabla^2 = -(1/nu) ad(R)`` holds exactly, which the test suite
  asserts.
* ``r`` solves ``delta r = R + nabla r - (1/nu) r o r + 1 (x) Omega`` with
  ``delta^-1 r = s`` and is built degree by degree.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple, Union

from .fibrewise import PoissonData, ad_over_nu, sigma_of_circ
from .forms import exterior_d, is_form
from .scalar_poly import (
    GaussianRational,
    NuSeries,
    Scalar,
    canonical_string,
    parse_scalar,
    parse_series,
)
from .weyl import (
    Key,
    WeylElement,
    _accumulate,
    _finish,
    delta,
    delta_inv,
    format_weyl,
    parse_weyl,
    sigma_project,
    total_degree,
    wedge_sign,
)

__all__ = [
    "ChartData",
    "ValidationReport",
    "FedosovState",
    "validate_chart",
    "nabla_apply",
    "covariant_derivative",
    "symmetric_covariant",
    "curvature_tensor",
    "curvature_R",
    "solve_r",
    "build_state",
    "fedosov_D",
    "d_inverse_homotopy",
    "taylor_series",
    "star_multiply",
    "extract_Ck",
    "poisson_bracket",
    "hamiltonian_field",
    "chart_hash",
    "save_state",
    "load_state",
    "CACHE_FORMAT",
    "CACHE_VERSION",
]

CACHE_FORMAT = "fedosov-state"
CACHE_VERSION = 1

FuncLike = Union[Scalar, NuSeries, str]


# --------------------------------------------------------------------------
# chart data

@dataclass
class ChartData:
    """Geometric input on one chart.

    Attributes
    ----------
    pd : PoissonData
        Constant symplectic form and its Poisson tensor.
    gamma : tuple
        ``gamma[k][i][j] = Gamma^k_{ij}`` as Scalars (0-based).
    Omega : dict
        ``{i: two-form}`` for the series ``sum_{i>=1} nu^i Omega_i``.
    s : WeylElement
        Normalisation element, ``sigma(s) = 0`` and every term of Deg >= 3.
    cap : int
        Total-degree truncation ``N``.
    """

    pd: PoissonData
    gamma: Tuple[Tuple[Tuple[Scalar, ...], ...], ...]
    Omega: Dict[int, WeylElement] = field(default_factory=dict)
    s: Optional[WeylElement] = None
    cap: int = 6

    def __post_init__(self):
        if self.s is None:
            self.s = WeylElement.zero(self.dim)

    @property
    def dim(self) -> int:
        return self.pd.dim

    @classmethod
    def build(cls, omega, gamma: Optional[Mapping] = None, Omega: Optional[Mapping] = None,
              s: Union[str, WeylElement, None] = None, cap: int = 6) -> "ChartData":
        """Convenience constructor from plain data.

        ``gamma`` maps 1-based ``(k, i, j)`` to a coefficient (string or number)
        and sets only that entry; ``Omega`` maps ``i`` to WeylElement text of a
        two-form such as ``"(1 + x2) @ dx1&dx2"``.
        """
        pd = omega if isinstance(omega, PoissonData) else PoissonData.from_omega(omega)
        n = pd.dim
        g = [[[Scalar.zero(n) for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for (k, i, j), v in (gamma or {}).items():
            g[k - 1][i - 1][j - 1] = parse_scalar(v, n) if isinstance(v, str) else (
                v if isinstance(v, Scalar) else Scalar.constant(n, v))
        gt = tuple(tuple(tuple(row) for row in mat) for mat in g)
        Om = {}
        for i, v in (Omega or {}).items():
            Om[int(i)] = parse_weyl(v, n) if isinstance(v, str) else v.with_cap(None)
        if isinstance(s, str):
            s = parse_weyl(s, n)
        elif s is not None:
            s = s.with_cap(None)
        return cls(pd, gt, Om, s, cap)

    def omega_form(self) -> WeylElement:
        """``omega = 1/2 omega_{ij} dx^i ^ dx^j`` as a form."""
        n = self.dim
        out = WeylElement.zero(n)
        for i in range(n):
            for j in range(i + 1, n):
                c = self.pd.omega[i][j]
                if c:
                    out = out + WeylElement.monomial(n, None, anti=(i + 1, j + 1), coeff=c)
        return out

    def Omega_series(self, cap: Optional[int] = None) -> WeylElement:
        """``sum_i nu^i Omega_i`` (a nu-series of two-forms)."""
        out = WeylElement.zero(self.dim, cap)
        for i, f in sorted(self.Omega.items()):
            out = out + f.shift_nu(i).with_cap(cap)
        return out

    def canonical_text(self) -> str:
        """Deterministic text of the geometric input (the cap is kept separately)."""
        n = self.dim
        lines = [f"dim {n}"]
        for i in range(n):
            lines.append("omega " + " ".join(str(v) for v in self.pd.omega[i]))
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    if self.gamma[k][i][j]:
                        lines.append(f"gamma {k + 1};{i + 1},{j + 1} {self.gamma[k][i][j]}")
        for i, f in sorted(self.Omega.items()):
            lines.append(f"Omega {i} {format_weyl(f)}")
        lines.append(f"s {format_weyl(self.s)}")
        return "\n".join(lines)


def chart_hash(c: ChartData) -> str:
    return hashlib.sha256(c.canonical_text().encode("utf-8")).hexdigest()


@dataclass
class ValidationReport:
    """Named checks with pass flags and a failure detail."""

    checks: List[Tuple[str, bool, str]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, bool(ok), detail))

    def info(self, text: str) -> None:
        """Record an informational line that does not affect :attr:`ok`."""
        self.notes.append(text)

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def failures(self) -> List[Tuple[str, str]]:
        return [(n, d) for n, ok, d in self.checks if not ok]

    def lines(self) -> List[str]:
        out = []
        for name, ok, detail in self.checks:
            out.append(f"{'PASS' if ok else 'FAIL'} {name}" + ("" if ok or not detail else f": {detail}"))
        out.extend(f"INFO {t}" for t in self.notes)
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines())


def validate_chart(c: ChartData) -> ValidationReport:
    """Check every structural requirement on a chart and report each one."""
    rep = ValidationReport()
    n = c.dim
    om, lam = c.pd.omega, c.pd.lam
    rep.add("dimension is even", n > 0 and n % 2 == 0, f"dim = {n}")
    bad = [(i + 1, j + 1) for i in range(n) for j in range(n) if om[i][j] != -om[j][i]]
    rep.add("omega antisymmetric", not bad, f"omega_{bad[0]} != -omega_{bad[0][::-1]}" if bad else "")
    bad = [(i + 1, j + 1) for i in range(n) for j in range(n) if lam[i][j] != -lam[j][i]]
    rep.add("Lambda antisymmetric", not bad, f"at {bad[0]}" if bad else "")
    bad = []
    for i in range(n):
        for k in range(n):
            acc = Scalar.zero(n)
            for j in range(n):
                acc = acc + om[k][j] * lam[i][j]
            if acc != Scalar.constant(n, 1 if i == k else 0):
                bad.append((i + 1, k + 1))
    rep.add("omega_kj Lambda^ij = delta^i_k", not bad, f"fails at (i,k) = {bad[0]}" if bad else "")
    rep.add("d omega = 0", not exterior_d(c.omega_form()), "omega is not closed")
    g = c.gamma
    bad = [(k + 1, i + 1, j + 1) for k in range(n) for i in range(n) for j in range(n)
           if g[k][i][j] != g[k][j][i]]
    rep.add("torsion free (Gamma^k_ij = Gamma^k_ji)", not bad,
            f"Gamma^{bad[0][0]}_{bad[0][1]}{bad[0][2]} != Gamma^{bad[0][0]}_{bad[0][2]}{bad[0][1]}" if bad else "")
    bad = []
    for k in range(n):
        for i in range(n):
            for j in range(n):
                val = om[i][j].derivative(k + 1)
                for m in range(n):
                    val = val - g[m][k][i] * om[m][j] - g[m][k][j] * om[i][m]
                if val:
                    bad.append((k + 1, i + 1, j + 1, str(val)))
    rep.add("symplectic connection (nabla omega = 0)", not bad,
            f"(nabla_{bad[0][0]} omega)_{bad[0][1]}{bad[0][2]} = {bad[0][3]}" if bad else "")
    for i, f in sorted(c.Omega.items()):
        if i < 1:
            rep.add(f"Omega_{i} index", False, "series starts at nu^1")
            continue
        shape = is_form(f, 2) and all(k == 0 for (k, _, _) in f.keys())
        rep.add(f"Omega_{i} is a two-form", shape, "expected nu-free two-form")
        dO = exterior_d(f)
        rep.add(f"d Omega_{i} = 0", not dO, f"d Omega_{i} = {format_weyl(dO)}")
    s = c.s
    rep.add("s has antisymmetric degree 0", all(not A for (_, _, A) in s.keys()), "s contains forms")
    rep.add("sigma(s) = 0", not sigma_project(s), "s has a scalar part")
    low = [k for k in s.keys() if total_degree(k) < 3]
    rep.add("s has only terms of Deg >= 3", not low, f"term of Deg {total_degree(low[0])}" if low else "")
    rep.add("cap N >= 2", c.cap >= 2, f"N = {c.cap}")
    return rep


# --------------------------------------------------------------------------
# connection

def _sym_gamma(c: ChartData, i: int, out, key: Key, coeff: Scalar) -> None:
    """Accumulate ``-Gamma^k_{ij} y^j d/dy^k`` applied to one term into ``out`` (no dx^i)."""
    k0, al, A = key
    n = c.dim
    for k in range(n):
        e = al[k]
        if not e:
            continue
        for j in range(n):
            gk = c.gamma[k][i][j]
            if not gk:
                continue
            new = list(al)
            new[k] -= 1
            new[j] += 1
            _accumulate(out, (k0, tuple(new), A), coeff * gk, -e)


def covariant_derivative(c: ChartData, i: int, a: WeylElement) -> WeylElement:
    """``nabla_{d_i}`` (1-based ``i``) on every slot of ``a``."""
    i -= 1
    n = c.dim
    out: Dict[Key, Dict] = {}
    for key, coeff in a.items():
        k0, al, A = key
        d = coeff.derivative(i + 1)
        if d:
            _accumulate(out, key, d, 1)
        _sym_gamma(c, i, out, key, coeff)
        for p, m in enumerate(A):
            rest = A[:p] + A[p + 1:]
            for j in range(n):
                gm = c.gamma[m][i][j]
                if not gm:
                    continue
                res = wedge_sign((j,), rest)
                if res is None:
                    continue
                sign, jA = res
                _accumulate(out, (k0, al, jA), coeff * gm, -sign * (-1 if p % 2 else 1))
    return _finish(n, a.cap, out)


def nabla_apply(c: ChartData, a: WeylElement) -> WeylElement:
    """``nabla = (1 (x) dx^i) nabla_{d_i}``.

    The Christoffel contraction on form slots cancels against ``dx^i ^`` for a
    torsion-free connection, so only coefficients and symmetric slots are
    differentiated.
    """
    n = c.dim
    out: Dict[Key, Dict] = {}
    for key, coeff in a.items():
        k0, al, A = key
        for i in range(n):
            res = wedge_sign((i,), A)
            if res is None:
                continue
            sign, iA = res
            part: Dict[Key, Dict] = {}
            d = coeff.derivative(i + 1)
            if d:
                _accumulate(part, (k0, al, A), d, 1)
            _sym_gamma(c, i, part, key, coeff)
            for (kk, bl, _), bucket in part.items():
                tgt = out.setdefault((kk, bl, iA), {})
                for e, v in bucket.items():
                    v = v * sign
                    w = tgt.get(e)
                    tgt[e] = v if w is None else w + v
    return _finish(n, a.cap, out)


def symmetric_covariant(c: ChartData, a: WeylElement) -> WeylElement:
    """``D = dx^i v nabla_{d_i}`` (symmetric covariant derivative)."""
    n = c.dim
    out = WeylElement.zero(n, a.cap)
    for i in range(n):
        yi = WeylElement.monomial(n, a.cap, sym=(i + 1,))
        out = out + yi * covariant_derivative(c, i + 1, a)
    return out


def curvature_tensor(c: ChartData):
    """``R[t][j][k][l] = R^t_{jkl}`` as Scalars."""
    n = c.dim
    g = c.gamma
    R = [[[[Scalar.zero(n) for _ in range(n)] for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for t in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    v = g[t][l][j].derivative(k + 1) - g[t][k][j].derivative(l + 1)
                    for m in range(n):
                        v = v + g[t][k][m] * g[m][l][j] - g[t][l][m] * g[m][k][j]
                    R[t][j][k][l] = v
    return R


def curvature_R(c: ChartData) -> WeylElement:
    """Curvature element ``1/4 omega_{it} R^t_{jkl} y^i y^j (x) dx^k ^ dx^l``."""
    n = c.dim
    Rt = curvature_tensor(c)
    out: Dict[Key, Dict] = {}
    quarter = GaussianRational(1) / 4
    for i in range(n):
        for t in range(n):
            w = c.pd.omega[i][t]
            if not w:
                continue
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        v = Rt[t][j][k][l]
                        if not v or k == l:
                            continue
                        res = wedge_sign((k,), (l,))
                        sign, kl = res
                        al = [0] * n
                        al[i] += 1
                        al[j] += 1
                        _accumulate(out, (0, tuple(al), kl), v * w, quarter * sign)
    return _finish(n, c.cap, out)


# --------------------------------------------------------------------------
# Fedosov recursion

def solve_r(c: ChartData, R: Optional[WeylElement] = None) -> Dict[int, WeylElement]:
    """Deg-homogeneous pieces ``{k: r^(k)}`` for ``2 <= k <= N``.

    ``r^(k) = delta s^(k+1) + delta^-1(R [k=3] + nu^i Omega_i [k=2i+1]
    + nabla r^(k-1) - 1/2 sum_{a+b=k+1} (1/nu)[r^(a), r^(b)])``.
    """
    N = c.cap
    n = c.dim
    R = curvature_R(c) if R is None else R
    Om = c.Omega_series(N)
    s_parts = {d: c.s.degree_part(d) for d in range(3, N + 2)}
    pieces: Dict[int, WeylElement] = {}
    for k in range(2, N + 1):
        src = WeylElement.zero(n, N)
        if k == 3:
            src = src + R
        src = src + Om.degree_part(k - 1)
        if k - 1 in pieces:
            src = src + nabla_apply(c, pieces[k - 1])
        for a in range(2, k):
            b = k + 1 - a
            if b < 2 or b not in pieces or a not in pieces:
                continue
            src = src - ad_over_nu(pieces[a], pieces[b], c.pd, N).scale(GaussianRational(1) / 2)
        piece = delta_inv(src.degree_part(k - 1)).with_cap(N)
        if k + 1 in s_parts:
            piece = piece + delta(s_parts[k + 1]).with_cap(N)
        pieces[k] = piece.degree_part(k)
    return pieces


class FedosovState:
    """Solved Fedosov data for one chart.

    The Taylor-series memo is shared between threads; inserts happen under a
    lock and values are deterministic, so concurrent fills are harmless.
    """

    def __init__(self, chart: ChartData, r_pieces: Dict[int, WeylElement], R: WeylElement):
        self.chart = chart
        self.R = R
        self.r_pieces = dict(sorted(r_pieces.items()))
        r = WeylElement.zero(chart.dim, chart.cap)
        for p in self.r_pieces.values():
            r = r + p
        self.r = r
        self.tau_cache: Dict[Tuple[str, int], WeylElement] = {}
        self._lock = threading.Lock()

    @property
    def cap(self) -> int:
        return self.chart.cap

    @property
    def pd(self) -> PoissonData:
        return self.chart.pd

    @property
    def dim(self) -> int:
        return self.chart.dim

    @classmethod
    def from_r(cls, chart: ChartData, r: WeylElement) -> "FedosovState":
        pieces: Dict[int, WeylElement] = {}
        for key, c in r.items():
            pieces.setdefault(total_degree(key), {})[key] = c
        return cls(chart, {d: WeylElement(chart.dim, chart.cap, t) for d, t in pieces.items()},
                   curvature_R(chart))

    def r_equation_residual(self) -> WeylElement:
        """``delta r - (R + nabla r - (1/nu) r o r + Omega)`` restricted to Deg <= N-1."""
        c = self.chart
        rhs = (self.R + nabla_apply(c, self.r)
               - ad_over_nu(self.r, self.r, c.pd, c.cap).scale(GaussianRational(1) / 2)
               + c.Omega_series(c.cap))
        return (delta(self.r) - rhs).truncate(c.cap - 1)

    def normalisation_residual(self) -> WeylElement:
        """``delta^-1 r - s`` up to Deg N+1, the highest degree ``r`` determines."""
        return (delta_inv(self.r.with_cap(None)) - self.chart.s).truncate(self.cap + 1)


def build_state(c: ChartData, check: bool = True) -> FedosovState:
    """Validate ``c`` and solve for ``r``."""
    if check:
        rep = validate_chart(c)
        if not rep.ok:
            raise ValueError("invalid chart:\n" + str(rep))
    R = curvature_R(c)
    return FedosovState(c, solve_r(c, R), R)


def fedosov_D(st: FedosovState, a: WeylElement) -> WeylElement:
    """``D = -delta + nabla - (1/nu) ad(r)``."""
    c = st.chart
    return -delta(a) + nabla_apply(c, a) - ad_over_nu(st.r, a, c.pd)


def _X(st: FedosovState, a: WeylElement) -> WeylElement:
    return nabla_apply(st.chart, a) - ad_over_nu(st.r, a, st.pd)


def d_inverse_homotopy(st: FedosovState, a: WeylElement) -> WeylElement:
    """``D^-1 a = -delta^-1 sum_j B^j a`` with ``B = [delta^-1, nabla - (1/nu) ad(r)]``.

    Raises
    ------
    ValueError
        If ``a`` has a component of antisymmetric degree zero.
    """
    if any(not A for (_, _, A) in a.keys()):
        raise ValueError("D^-1 is defined on elements of antisymmetric degree >= 1")
    cap = a.cap if a.cap is not None else st.cap
    total = WeylElement.zero(st.dim, cap)
    term = a.with_cap(cap)
    while term:
        total = total + term
        term = delta_inv(_X(st, term)) + _X(st, delta_inv(term))
    return -delta_inv(total)


def _as_series(f: FuncLike, dim: int) -> NuSeries:
    if isinstance(f, str):
        return parse_series(f, dim)
    return NuSeries.of(f)


def _taylor_scalar(st: FedosovState, f: Scalar, cap: int) -> WeylElement:
    key = (canonical_string(f), cap)
    hit = st.tau_cache.get(key)
    if hit is not None:
        return hit
    c = st.chart
    pieces = [WeylElement.scalar(f, cap)]
    for k in range(cap):
        src = nabla_apply(c, pieces[k])
        for l in range(k):
            rp = st.r_pieces.get(l + 2)
            if rp is not None:
                src = src - ad_over_nu(rp.with_cap(cap), pieces[k - l], c.pd, cap)
        pieces.append(delta_inv(src.degree_part(k)).with_cap(cap))
    out = WeylElement.zero(st.dim, cap)
    for p in pieces:
        out = out + p
    with st._lock:
        st.tau_cache.setdefault(key, out)
        return st.tau_cache[key]


def taylor_series(st: FedosovState, f: FuncLike) -> WeylElement:
    """Fedosov-Taylor series ``tau(f)``; nu-linear, memoised per coefficient."""
    f = _as_series(f, st.dim)
    N = st.cap
    out = WeylElement.zero(st.dim, N)
    for j, fj in f.items():
        if 2 * j > N:
            continue
        out = out + _taylor_scalar(st, fj, N - 2 * j).with_cap(N).shift_nu(j)
    return out


def star_multiply(st: FedosovState, f: FuncLike, g: FuncLike) -> NuSeries:
    """``f * g = sigma(tau(f) o tau(g))`` through nu-order ``floor(N/2)``."""
    prod = sigma_of_circ(taylor_series(st, f), taylor_series(st, g), st.pd, st.cap)
    return sigma_project(prod).truncate(st.cap // 2)


def extract_Ck(st: FedosovState, k: int, f: FuncLike, g: FuncLike) -> Scalar:
    """Bidifferential coefficient ``C_k(f, g)``: the ``nu^k`` part of ``f * g``.

    Raises
    ------
    ValueError
        If ``2k`` exceeds the truncation cap, so the coefficient is not certified.
    """
    if k < 0:
        raise ValueError("order must be non-negative")
    if 2 * k > st.cap:
        raise ValueError(f"C_{k} is not certified at cap N={st.cap}: need 2k <= N "
                         f"(valid orders 0..{st.cap // 2})")
    f = _as_series(f, st.dim)
    g = _as_series(g, st.dim)
    return star_multiply(st, f, g)[k]


# --------------------------------------------------------------------------
# classical data

def poisson_bracket(pd: PoissonData, f: Scalar, g: Scalar) -> Scalar:
    """``{f, g} = Lambda^{ij} d_i f d_j g``."""
    n = pd.dim
    out = Scalar.zero(n)
    for i in range(n):
        fi = f.derivative(i + 1)
        if not fi:
            continue
        for j in range(n):
            if pd.lam[i][j]:
                out = out + pd.lam[i][j] * fi * g.derivative(j + 1)
    return out


def hamiltonian_field(pd: PoissonData, f: Scalar):
    """``X_f^m = Lambda^{mj} d_j f`` so that ``i_{X_f} omega = df``."""
    n = pd.dim
    comps = []
    for m in range(n):
        v = Scalar.zero(n)
        for j in range(n):
            if pd.lam[m][j]:
                v = v + pd.lam[m][j] * f.derivative(j + 1)
        comps.append(v)
    return tuple(comps)


# --------------------------------------------------------------------------
# cache file

def save_state(st: FedosovState, path) -> None:
    """Write ``r`` with the chart hash and cap as JSON."""
    doc = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "chart_hash": chart_hash(st.chart),
        "cap": st.cap,
        "r": format_weyl(st.r),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def load_state(chart: ChartData, path) -> Tuple[Optional[FedosovState], str]:
    """Load a cached state for ``chart``.

    Returns
    -------
    state : FedosovState or None
        None when the file is missing, unreadable or stale.
    notice : str
        Empty on a hit; otherwise the reason the cache was not used.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        return None, "no cache file"
    except (OSError, ValueError) as exc:
        return None, f"cache unreadable ({exc})"
    if doc.get("format") != CACHE_FORMAT or doc.get("version") != CACHE_VERSION:
        return None, "cache format/version mismatch; recomputing"
    if doc.get("chart_hash") != chart_hash(chart):
        return None, "cache invalidated: chart hash differs; recomputing"
    if doc.get("cap") != chart.cap:
        return None, "cache invalidated: cap differs; recomputing"
    r = parse_weyl(doc["r"], chart.dim, chart.cap)
    return FedosovState.from_r(chart, r), ""
