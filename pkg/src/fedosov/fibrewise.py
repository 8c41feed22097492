"""The deformed fibrewise product and the operators built on it.

``a o b = mu o exp((nu/2) Lambda^{ij} i_s(d_i) (x) i_s(d_j)) (a (x) b)`` is a
Moyal product in the fibre variables ``y``; its contraction order ``m``
removes ``m`` symmetric degrees from each factor and adds ``nu^m``, so the
total degree ``symdeg + 2*nudeg`` is additive and the product is finite.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

from .scalar_poly import GaussianRational, Scalar, parse_scalar
from .weyl import (
    Key,
    VectorField,
    WeylElement,
    _accumulate,
    _finish,
    min_cap,
    wedge_sign,
)

__all__ = [
    "PoissonData",
    "circ_product",
    "super_commutator",
    "ad_over_nu",
    "parity_apply",
    "conjugate_apply",
    "lie_derivative_field",
    "nu_euler_apply",
    "H_apply",
]


def _invert(matrix: List[List[GaussianRational]]) -> List[List[GaussianRational]]:
    n = len(matrix)
    aug = [list(row) + [GaussianRational(1 if i == j else 0) for j in range(n)]
           for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col]), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = GaussianRational(1) / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


class PoissonData:
    """Constant symplectic matrix ``omega`` and Poisson tensor ``Lambda``.

    ``omega[i][j]`` is the coefficient ``omega_{ij}`` (0-based storage) and
    the two are tied by ``omega_{kj} Lambda^{ij} = delta^i_k``.
    """

    def __init__(self, omega: Sequence[Sequence[Scalar]], lam: Sequence[Sequence[Scalar]]):
        self.omega = tuple(tuple(row) for row in omega)
        self.lam = tuple(tuple(row) for row in lam)
        self.dim = len(self.omega)
        self._weights: Dict[int, Dict] = {}

    @classmethod
    def from_omega(cls, omega) -> "PoissonData":
        """Build from a (constant) omega matrix; entries may be strings or numbers."""
        n = len(omega)
        om = [[_as_scalar(v, n) for v in row] for row in omega]
        for row in om:
            for v in row:
                if not v.is_constant():
                    raise ValueError("omega must have constant entries (Darboux-type chart)")
        num = [[v.constant_term() for v in row] for row in om]
        inv = _invert(num)
        lam = [[Scalar.constant(n, inv[j][i]) for j in range(n)] for i in range(n)]
        return cls(om, lam)

    @classmethod
    def standard(cls, dim: int) -> "PoissonData":
        """``omega = sum_k dx^k ^ dx^{k+n}`` on a chart of dimension ``2n``."""
        if dim % 2:
            raise ValueError("dimension must be even")
        n = dim // 2
        om = [[0] * dim for _ in range(dim)]
        for k in range(n):
            om[k][k + n] = 1
            om[k + n][k] = -1
        if dim == 2:
            om = [[0, 1], [-1, 0]]
        return cls.from_omega(om)

    def lambda_const(self) -> Tuple[Tuple[GaussianRational, ...], ...]:
        return tuple(tuple(v.constant_term() for v in row) for row in self.lam)

    def is_constant(self) -> bool:
        return all(v.is_constant() for row in self.omega + self.lam for v in row)

    def weights(self, m: int) -> Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], GaussianRational]:
        """Coefficients of ``(1/2)^m/m! (Lambda^{ij} u_i v_j)^m`` keyed by ``(gamma, eps)``."""
        if m in self._weights:
            return self._weights[m]
        n = self.dim
        lam = self.lambda_const()
        if m == 0:
            table = {((0,) * n, (0,) * n): GaussianRational(1)}
        else:
            prev = self.weights(m - 1)
            acc: Dict = {}
            for (g, e), c in prev.items():
                for i in range(n):
                    for j in range(n):
                        if not lam[i][j]:
                            continue
                        g2 = g[:i] + (g[i] + 1,) + g[i + 1:]
                        e2 = e[:j] + (e[j] + 1,) + e[j + 1:]
                        v = c * lam[i][j] / (2 * m)
                        acc[(g2, e2)] = acc[(g2, e2)] + v if (g2, e2) in acc else v
            table = {k: v for k, v in acc.items() if v}
        self._weights[m] = table
        return table

    def __eq__(self, other) -> bool:
        return isinstance(other, PoissonData) and self.omega == other.omega and self.lam == other.lam

    def __hash__(self):
        return hash((self.omega, self.lam))


def _as_scalar(v, dim: int) -> Scalar:
    if isinstance(v, Scalar):
        return v
    if isinstance(v, str):
        return parse_scalar(v, dim)
    return Scalar.constant(dim, v)


@lru_cache(maxsize=None)
def _sub_indices(alpha: Tuple[int, ...], m: int):
    """All ``gamma <= alpha`` with ``|gamma| = m``, with falling factorial ``alpha!/(alpha-gamma)!``."""
    out = []
    for gamma in product(*(range(min(a, m) + 1) for a in alpha)):
        if sum(gamma) != m:
            continue
        ff = 1
        for a, g in zip(alpha, gamma):
            ff *= factorial(a) // factorial(a - g)
        out.append((gamma, tuple(a - g for a, g in zip(alpha, gamma)), ff))
    return tuple(out)


def _circ(a: WeylElement, b: WeylElement, pd: PoissonData, cap: Optional[int],
          odd_only: bool = False, sigma_only: bool = False, nu_shift: int = 0,
          factor=1) -> WeylElement:
    if not pd.is_constant():
        raise NotImplementedError("fibrewise product requires a constant Poisson tensor")
    a._check(b)
    out: Dict[Key, Dict] = {}
    zero = (0,) * a.dim
    for (k1, al, A), c1 in a._terms.items():
        s1 = sum(al)
        d1 = s1 + 2 * k1
        for (k2, be, B), c2 in b._terms.items():
            s2 = sum(be)
            if cap is not None and d1 + s2 + 2 * k2 > cap:
                continue
            if sigma_only:
                if A or B or s1 != s2:
                    continue
                mrange = (s1,)
            else:
                mrange = range(min(s1, s2) + 1)
            res = wedge_sign(A, B)
            if res is None:
                continue
            sign, AB = res
            cc = None
            for m in mrange:
                if odd_only and m % 2 == 0:
                    continue
                if k1 + k2 + m + nu_shift < 0:
                    continue
                W = pd.weights(m)
                if not W:
                    continue
                for gamma, rest_a, ffa in _sub_indices(al, m):
                    for eps, rest_b, ffb in _sub_indices(be, m):
                        w = W.get((gamma, eps))
                        if w is None:
                            continue
                        if cc is None:
                            cc = c1 * c2
                        key = (k1 + k2 + m + nu_shift,
                               tuple(x + y for x, y in zip(rest_a, rest_b)), AB)
                        if sigma_only and key[1] != zero:
                            continue
                        _accumulate(out, key, cc, w * (sign * ffa * ffb * factor))
    return _finish(a.dim, cap, out)


def circ_product(a: WeylElement, b: WeylElement, pd: PoissonData,
                 cap: Optional[int] = None) -> WeylElement:
    """Fibrewise product ``a o b`` truncated at total degree ``cap``."""
    cap = min_cap(a.cap, b.cap) if cap is None else cap
    return _circ(a, b, pd, cap)


def sigma_of_circ(a: WeylElement, b: WeylElement, pd: PoissonData,
                  cap: Optional[int] = None) -> WeylElement:
    """Only the symmetric- and antisymmetric-degree-zero part of ``a o b``."""
    cap = min_cap(a.cap, b.cap) if cap is None else cap
    return _circ(a, b, pd, cap, sigma_only=True)


def super_commutator(a: WeylElement, b: WeylElement, pd: PoissonData,
                     cap: Optional[int] = None) -> WeylElement:
    """``[a, b] = a o b - (-1)^{kl} b o a`` for antisymmetric degrees ``k, l``.

    For antisymmetric ``Lambda`` the even contraction orders cancel and the
    odd ones double, which is what is computed here.
    """
    cap = min_cap(a.cap, b.cap) if cap is None else cap
    return _circ(a, b, pd, cap, odd_only=True, factor=2)


def ad_over_nu(a: WeylElement, b: WeylElement, pd: PoissonData,
               cap: Optional[int] = None) -> WeylElement:
    """``(1/nu)[a, b]``; the commutator is formed two degrees deeper before dividing."""
    cap = min_cap(a.cap, b.cap) if cap is None else cap
    inner = None if cap is None else cap + 2
    comm = _circ(a, b, pd, inner, odd_only=True, factor=2)
    return comm.shift_nu(-1).with_cap(cap)


def parity_apply(a: WeylElement) -> WeylElement:
    """``P = (-1)^{deg_nu}``."""
    return a.parity()


def conjugate_apply(a: WeylElement) -> WeylElement:
    """Complex conjugation with ``C nu = -nu``."""
    return a.conjugate()


def nu_euler_apply(a: WeylElement) -> WeylElement:
    return a.nu_euler()


def _field_jacobian(X: VectorField):
    """``J[j][k] = d_j X^k`` (0-based), skipping zeros."""
    n = len(X)
    jac = {}
    for k in range(n):
        if not X[k]:
            continue
        for j in range(n):
            d = X[k].derivative(j + 1)
            if d:
                jac[(j, k)] = d
    return jac


def lie_derivative_field(X: VectorField, a: WeylElement) -> WeylElement:
    """Lie derivative of the tensor field ``a`` along ``X``.

    Acts as ``X(f)`` on coefficients and replaces every covector factor
    ``dx^k`` (symmetric or antisymmetric) by ``d(X^k) = d_j X^k dx^j``.
    """
    n = a.dim
    jac = _field_jacobian(X)
    out: Dict[Key, Dict] = {}
    for (k, al, A), c in a._terms.items():
        xc = None
        for i in range(n):
            if X[i]:
                d = c.derivative(i + 1)
                if d:
                    xc = d * X[i] if xc is None else xc + d * X[i]
        if xc:
            _accumulate(out, (k, al, A), xc, 1)
        for (j, kk), d in jac.items():
            e = al[kk]
            if e:
                new = list(al)
                new[kk] -= 1
                new[j] += 1
                _accumulate(out, (k, tuple(new), A), c * d, e)
            if kk in A:
                p = A.index(kk)
                rest = A[:p] + A[p + 1:]
                res = wedge_sign((j,), rest)
                if res is None:
                    continue
                sign, jA = res
                _accumulate(out, (k, al, jA), c * d, sign * (-1 if p % 2 else 1))
    return _finish(n, a.cap, out)


def H_apply(xi: VectorField, a: WeylElement) -> WeylElement:
    """``H = nu d/dnu + L_xi``."""
    return a.nu_euler() + lie_derivative_field(xi, a)
