"""Elements of the formal Weyl algebra tensored with forms.

An element is a finite sum of terms ``nu^k * f(x) * y^alpha (x) dx^A`` where

* ``y^alpha`` is the symmetric factor ``dx^i1 v dx^i2 v ...`` written as a
  monomial in fibre variables ``y^i`` (so ``i_s(d_i)`` is ``d/dy^i``),
* ``dx^A`` is a wedge product over a strictly increasing index set ``A``,
* ``f`` is a :class:`~fedosov.scalar_poly.Scalar`.

Internally the terms are kept in a dict keyed by ``(k, alpha, A)`` with
0-based indices; the public constructors and the text form are 1-based.

All arithmetic is truncated at a total-degree cap: a term survives only if
``symdeg + 2*nu_degree <= cap``.  ``cap=None`` means no truncation.

Canonical text form::

    element := '0' | term (' + ' term)*
    term    := ['ν^k * '] '(' scalar ')' [' * ' sym] [' ⊗ ' anti]
    sym     := 'dx' i ('∨dx' j)*          (indices non-decreasing)
    anti    := 'dx' i ('∧dx' j)*          (indices increasing)

Terms are ordered by nu power, then symmetric degree, then antisymmetric
degree, then indices.  The parser additionally accepts ``nu`` for ``ν``,
``*`` for ``∨``, ``@`` for ``⊗``, ``&`` for ``∧``, ``dxk^m`` for repeated
symmetric factors, bare scalar factors and a leading sign on terms.
"""

from __future__ import annotations

import re
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .scalar_poly import GaussianRational, NuSeries, Scalar, parse_scalar

Key = Tuple[int, Tuple[int, ...], Tuple[int, ...]]
VectorField = Tuple[Scalar, ...]

__all__ = [
    "WeylElement",
    "WeylTerm",
    "VectorField",
    "vector_field",
    "min_cap",
    "mu_product",
    "insert_sym",
    "insert_anti",
    "delta",
    "delta_star",
    "delta_inv",
    "sigma_project",
    "grade_decompose",
    "total_degree",
    "wedge_sign",
    "parse_weyl",
]


def min_cap(*caps: Optional[int]) -> Optional[int]:
    finite = [c for c in caps if c is not None]
    return min(finite) if finite else None


@lru_cache(maxsize=None)
def wedge_sign(A: Tuple[int, ...], B: Tuple[int, ...]):
    """Return ``(sign, merged)`` with ``dx^A ^ dx^B = sign * dx^merged``, or None."""
    if not A:
        return 1, B
    if not B:
        return 1, A
    if set(A) & set(B):
        return None
    inversions = sum(1 for a in A for b in B if a > b)
    return (-1 if inversions % 2 else 1), tuple(sorted(A + B))


def _accumulate(out: Dict[Key, Dict], key: Key, coeff: Scalar, factor) -> None:
    """out[key] += factor * coeff, working directly on the monomial dicts."""
    bucket = out.get(key)
    if bucket is None:
        bucket = out[key] = {}
    if factor == 1:
        for e, c in coeff.items():
            v = bucket.get(e)
            bucket[e] = c if v is None else v + c
    else:
        for e, c in coeff.items():
            v = bucket.get(e)
            c = c * factor
            bucket[e] = c if v is None else v + c


def _finish(dim: int, cap: Optional[int], out: Dict[Key, Dict]) -> "WeylElement":
    terms = {}
    for key, bucket in out.items():
        clean = {e: c for e, c in bucket.items() if c}
        if clean:
            terms[key] = Scalar._raw(dim, clean)
    return WeylElement._raw(dim, cap, terms)


class WeylTerm:
    """Read-only view of one term with 1-based index data."""

    __slots__ = ("nu", "sym", "anti", "coeff")

    def __init__(self, nu: int, sym: Tuple[int, ...], anti: Tuple[int, ...], coeff: Scalar):
        self.nu = nu
        self.sym = sym
        self.anti = anti
        self.coeff = coeff

    def __repr__(self) -> str:
        return f"WeylTerm(nu={self.nu}, sym={self.sym}, anti={self.anti}, coeff={self.coeff})"


class WeylElement:
    """Truncated element of the formal Weyl algebra with forms."""

    __slots__ = ("dim", "cap", "_terms")

    def __init__(self, dim: int, cap: Optional[int] = None,
                 terms: Optional[Mapping[Key, Scalar]] = None):
        self.dim = dim
        self.cap = cap
        clean = {}
        for (k, alpha, anti), c in (terms or {}).items():
            alpha = tuple(alpha)
            anti = tuple(anti)
            if len(alpha) != dim or k < 0:
                raise ValueError("malformed term key")
            if list(anti) != sorted(set(anti)):
                raise ValueError("antisymmetric index set must be strictly increasing")
            if cap is not None and sum(alpha) + 2 * k > cap:
                continue
            if c:
                clean[(k, alpha, anti)] = c
        self._terms = clean

    @classmethod
    def _raw(cls, dim: int, cap: Optional[int], terms: Dict[Key, Scalar]) -> "WeylElement":
        obj = object.__new__(cls)
        obj.dim = dim
        obj.cap = cap
        obj._terms = terms
        return obj

    # -- construction ------------------------------------------------------
    @classmethod
    def zero(cls, dim: int, cap: Optional[int] = None) -> "WeylElement":
        return cls._raw(dim, cap, {})

    @classmethod
    def monomial(cls, dim: int, cap: Optional[int] = None, *, sym: Sequence[int] = (),
                 anti: Sequence[int] = (), coeff=1, nu: int = 0) -> "WeylElement":
        """Single term ``nu^nu * coeff * dx^sym (x) dx^anti`` with 1-based indices."""
        if not isinstance(coeff, Scalar):
            coeff = parse_scalar(coeff, dim) if isinstance(coeff, str) else Scalar.constant(dim, coeff)
        alpha = [0] * dim
        for i in sym:
            if not 1 <= i <= dim:
                raise ValueError(f"index {i} out of range")
            alpha[i - 1] += 1
        sign = 1
        A: Tuple[int, ...] = ()
        for i in anti:
            if not 1 <= i <= dim:
                raise ValueError(f"index {i} out of range")
            res = wedge_sign(A, (i - 1,))
            if res is None:
                return cls.zero(dim, cap)
            s, A = res
            sign *= s
        return cls(dim, cap, {(nu, tuple(alpha), A): coeff.scale(sign)})

    @classmethod
    def scalar(cls, f: Scalar, cap: Optional[int] = None, nu: int = 0) -> "WeylElement":
        return cls(f.dim, cap, {(nu, (0,) * f.dim, ()): f})

    @classmethod
    def from_series(cls, f: NuSeries, cap: Optional[int] = None) -> "WeylElement":
        zero = (0,) * f.dim
        return cls(f.dim, cap, {(k, zero, ()): c for k, c in f.items()})

    # -- inspection --------------------------------------------------------
    def items(self):
        return self._terms.items()

    def keys(self):
        return self._terms.keys()

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def terms(self) -> Dict[int, List[WeylTerm]]:
        """Terms grouped by nu power, with 1-based index tuples."""
        out: Dict[int, List[WeylTerm]] = {}
        for (k, alpha, anti), c in sorted(self._terms.items(), key=lambda kv: _term_order(kv[0])):
            sym = tuple(i + 1 for i, e in enumerate(alpha) for _ in range(e))
            out.setdefault(k, []).append(WeylTerm(k, sym, tuple(a + 1 for a in anti), c))
        return out

    def coefficient(self, *, sym: Sequence[int] = (), anti: Sequence[int] = (), nu: int = 0) -> Scalar:
        probe = WeylElement.monomial(self.dim, None, sym=sym, anti=anti, nu=nu)
        if not probe:
            return Scalar.zero(self.dim)
        (key, c), = probe.items()
        sign = c.constant_term()
        return self._terms.get(key, Scalar.zero(self.dim)).scale(sign)

    def max_degree(self) -> int:
        return max((total_degree(k) for k in self._terms), default=-1)

    def min_degree(self) -> int:
        return min((total_degree(k) for k in self._terms), default=-1)

    def anti_degrees(self) -> set:
        return {len(k[2]) for k in self._terms}

    # -- arithmetic --------------------------------------------------------
    def with_cap(self, cap: Optional[int]) -> "WeylElement":
        if cap is None:
            return WeylElement._raw(self.dim, None, self._terms)
        return WeylElement._raw(self.dim, cap, {k: c for k, c in self._terms.items()
                                                if total_degree(k) <= cap})

    def truncate(self, max_deg: int) -> "WeylElement":
        """Keep only terms of total degree ``<= max_deg`` (cap unchanged)."""
        return WeylElement._raw(self.dim, self.cap, {k: c for k, c in self._terms.items()
                                                     if total_degree(k) <= max_deg})

    def degree_part(self, d: int) -> "WeylElement":
        return WeylElement._raw(self.dim, self.cap, {k: c for k, c in self._terms.items()
                                                     if total_degree(k) == d})

    def filter(self, pred) -> "WeylElement":
        return WeylElement._raw(self.dim, self.cap, {k: c for k, c in self._terms.items() if pred(k)})

    def _check(self, other: "WeylElement") -> None:
        if not isinstance(other, WeylElement):
            raise TypeError(f"expected WeylElement, got {type(other).__name__}")
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "WeylElement") -> "WeylElement":
        self._check(other)
        cap = min_cap(self.cap, other.cap)
        out = {k: c for k, c in self._terms.items() if cap is None or total_degree(k) <= cap}
        for k, c in other._terms.items():
            if cap is not None and total_degree(k) > cap:
                continue
            v = out.get(k)
            if v is None:
                out[k] = c
            else:
                v = v + c
                if v:
                    out[k] = v
                else:
                    del out[k]
        return WeylElement._raw(self.dim, cap, out)

    def __neg__(self) -> "WeylElement":
        return WeylElement._raw(self.dim, self.cap, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "WeylElement") -> "WeylElement":
        return self + (-other)

    def scale(self, factor) -> "WeylElement":
        """Multiply every coefficient by a number or a Scalar."""
        if isinstance(factor, Scalar):
            out = {}
            for k, c in self._terms.items():
                v = c * factor
                if v:
                    out[k] = v
            return WeylElement._raw(self.dim, self.cap, out)
        factor = GaussianRational.coerce(factor)
        if not factor:
            return WeylElement.zero(self.dim, self.cap)
        return WeylElement._raw(self.dim, self.cap, {k: c.scale(factor) for k, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, WeylElement):
            return mu_product(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def shift_nu(self, n: int) -> "WeylElement":
        """Multiply by ``nu^n``; negative ``n`` divides and requires divisibility."""
        out = {}
        for (k, a, A), c in self._terms.items():
            if k + n < 0:
                raise ArithmeticError("element is not divisible by the requested power of nu")
            key = (k + n, a, A)
            if self.cap is None or total_degree(key) <= self.cap:
                out[key] = c
        return WeylElement._raw(self.dim, self.cap, out)

    def map_coeffs(self, fn) -> "WeylElement":
        out = {}
        for k, c in self._terms.items():
            v = fn(k, c)
            if v:
                out[k] = v
        return WeylElement._raw(self.dim, self.cap, out)

    def nu_euler(self) -> "WeylElement":
        """``nu d/dnu``."""
        return self.map_coeffs(lambda k, c: c.scale(k[0]) if k[0] else None)

    def parity(self) -> "WeylElement":
        return self.map_coeffs(lambda k, c: -c if k[0] % 2 else c)

    def conjugate(self) -> "WeylElement":
        return self.map_coeffs(lambda k, c: -c.conjugate() if k[0] % 2 else c.conjugate())

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self.dim == other.dim and self._terms == other._terms

    def __hash__(self):
        return hash((self.dim, frozenset(self._terms.items())))

    def equal_up_to(self, other: "WeylElement", max_deg: int) -> bool:
        return self.truncate(max_deg) == other.truncate(max_deg)

    def __str__(self) -> str:
        return format_weyl(self)

    def __repr__(self) -> str:
        return f"WeylElement(dim={self.dim}, cap={self.cap}, {format_weyl(self)!r})"


def vector_field(dim: int, components: Mapping[int, object]) -> VectorField:
    """Vector field from a 1-based ``{index: component}`` map (strings are parsed)."""
    out = [Scalar.zero(dim) for _ in range(dim)]
    for i, c in components.items():
        if not 1 <= i <= dim:
            raise ValueError(f"index {i} out of range")
        if isinstance(c, str):
            c = parse_scalar(c, dim)
        elif not isinstance(c, Scalar):
            c = Scalar.constant(dim, c)
        out[i - 1] = c
    return tuple(out)


def total_degree(key: Key) -> int:
    return sum(key[1]) + 2 * key[0]


def _term_order(key: Key):
    k, alpha, anti = key
    return (k, sum(alpha), len(anti), tuple(-e for e in alpha), anti)


# --------------------------------------------------------------------------
# undeformed product, insertions, delta calculus

def mu_product(a: WeylElement, b: WeylElement, cap: Optional[int] = None) -> WeylElement:
    """Pointwise product: ``v`` on symmetric parts, ``^`` with sign on forms."""
    a._check(b)
    cap = min_cap(a.cap, b.cap) if cap is None else cap
    out: Dict[Key, Dict] = {}
    for (k1, al, A), c1 in a._terms.items():
        d1 = sum(al) + 2 * k1
        for (k2, be, B), c2 in b._terms.items():
            if cap is not None and d1 + sum(be) + 2 * k2 > cap:
                continue
            res = wedge_sign(A, B)
            if res is None:
                continue
            sign, AB = res
            key = (k1 + k2, tuple(x + y for x, y in zip(al, be)), AB)
            _accumulate(out, key, c1 * c2, sign)
    return _finish(a.dim, cap, out)


def insert_sym(X: VectorField, a: WeylElement) -> WeylElement:
    """Symmetric insertion ``i_s(X)``; acts as ``X^i d/dy^i``."""
    out: Dict[Key, Dict] = {}
    for (k, al, A), c in a._terms.items():
        for i, e in enumerate(al):
            if e and X[i]:
                new = al[:i] + (e - 1,) + al[i + 1:]
                _accumulate(out, (k, new, A), c * X[i], e)
    return _finish(a.dim, a.cap, out)


def insert_anti(X: VectorField, a: WeylElement) -> WeylElement:
    """Antisymmetric insertion ``i_a(X)`` (interior product on the form part)."""
    out: Dict[Key, Dict] = {}
    for (k, al, A), c in a._terms.items():
        for p, i in enumerate(A):
            if X[i]:
                _accumulate(out, (k, al, A[:p] + A[p + 1:]), c * X[i], -1 if p % 2 else 1)
    return _finish(a.dim, a.cap, out)


def wedge_left(i: int, A: Tuple[int, ...]):
    """``dx^i ^ dx^A`` for 0-based ``i``: ``(sign, merged)`` or None."""
    return wedge_sign((i,), A)


def delta(a: WeylElement) -> WeylElement:
    """``delta = (1 (x) dx^i) i_s(d_i)``; ignores the x-dependence of coefficients."""
    out: Dict[Key, Dict] = {}
    for (k, al, A), c in a._terms.items():
        for i, e in enumerate(al):
            if not e:
                continue
            res = wedge_sign((i,), A)
            if res is None:
                continue
            sign, iA = res
            _accumulate(out, (k, al[:i] + (e - 1,) + al[i + 1:], iA), c, sign * e)
    return _finish(a.dim, a.cap, out)


def delta_star(a: WeylElement) -> WeylElement:
    """``delta* = (dx^i (x) 1) i_a(d_i)``."""
    out: Dict[Key, Dict] = {}
    for (k, al, A), c in a._terms.items():
        for p, i in enumerate(A):
            new = al[:i] + (al[i] + 1,) + al[i + 1:]
            key = (k, new, A[:p] + A[p + 1:])
            if a.cap is not None and total_degree(key) > a.cap:
                continue
            _accumulate(out, key, c, -1 if p % 2 else 1)
    return _finish(a.dim, a.cap, out)


def delta_inv(a: WeylElement) -> WeylElement:
    """``delta^-1``: ``delta*`` divided by ``symdeg + antideg`` termwise, 0 on degree (0, 0)."""
    out: Dict[Key, Dict] = {}
    for (k, al, A), c in a._terms.items():
        if not A:
            continue
        w = sum(al) + len(A)
        for p, i in enumerate(A):
            new = al[:i] + (al[i] + 1,) + al[i + 1:]
            key = (k, new, A[:p] + A[p + 1:])
            if a.cap is not None and total_degree(key) > a.cap:
                continue
            _accumulate(out, key, c, GaussianRational(-1 if p % 2 else 1) / w)
    return _finish(a.dim, a.cap, out)


def sigma_project(a: WeylElement) -> NuSeries:
    """Part of symmetric and antisymmetric degree zero, as a nu-series."""
    zero = (0,) * a.dim
    return NuSeries(a.dim, {k: c for (k, al, A), c in a._terms.items() if al == zero and not A})


def grade_decompose(a: WeylElement) -> Dict[Tuple[int, int, int], WeylElement]:
    """Split into components keyed by ``(symdeg, antideg, nudeg)``."""
    parts: Dict[Tuple[int, int, int], Dict[Key, Scalar]] = {}
    for key, c in a._terms.items():
        k, al, A = key
        parts.setdefault((sum(al), len(A), k), {})[key] = c
    return {g: WeylElement._raw(a.dim, a.cap, t) for g, t in sorted(parts.items())}


# --------------------------------------------------------------------------
# text form

def format_weyl(a: WeylElement) -> str:
    if not a._terms:
        return "0"
    out = []
    for key in sorted(a._terms, key=_term_order):
        k, al, A = key
        parts = []
        if k == 1:
            parts.append("ν")
        elif k > 1:
            parts.append(f"ν^{k}")
        parts.append(f"({a._terms[key]})")
        sym = [f"dx{i + 1}" for i, e in enumerate(al) for _ in range(e)]
        if sym:
            parts.append("∨".join(sym))
        text = " * ".join(parts)
        if A:
            text += " ⊗ " + "∧".join(f"dx{i + 1}" for i in A)
        out.append(text)
    return " + ".join(out)


_DX = re.compile(r"^dx(\d+)(?:\^(\d+))?$")
_NU = re.compile(r"^(?:ν|nu)(?:\^(\d+))?$")


def _split_top(text: str, seps: str) -> List[Tuple[str, str]]:
    """Split at depth-0 separator characters; returns (separator, chunk) pairs."""
    chunks = []
    depth = 0
    cur = []
    sep = ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ValueError("unbalanced parentheses")
        if depth == 0 and ch in seps:
            chunks.append((sep, "".join(cur)))
            cur = []
            sep = ch
            continue
        cur.append(ch)
    if depth:
        raise ValueError("unbalanced parentheses")
    chunks.append((sep, "".join(cur)))
    return chunks


_GLUE = ("^", "/", "*", "∨", "⊗", "@", "∧", "&")


def _split_terms(text: str) -> List[Tuple[int, str]]:
    """Split a sum into signed terms; a sign right after an operator stays in its factor."""
    terms = []
    depth = 0
    cur: List[str] = []
    sign = 1
    prev = ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch in "+-" and prev not in _GLUE:
            body = "".join(cur).strip()
            if body:
                terms.append((sign, body))
                sign = 1
            if ch == "-":
                sign = -sign
            cur = []
            prev = ch
            continue
        cur.append(ch)
        if not ch.isspace():
            prev = ch
    body = "".join(cur).strip()
    if body:
        terms.append((sign, body))
    elif cur or prev in "+-":
        raise ValueError("dangling sign at end of expression")
    return terms


def parse_weyl(text: str, dim: int, cap: Optional[int] = None) -> WeylElement:
    """Parse the text form of a WeylElement (see module docstring)."""
    text = text.strip()
    result = WeylElement.zero(dim, cap)
    if text in ("", "0"):
        return result
    for sign, body in _split_terms(text):
        left, right = body, None
        pieces = _split_top(body, "⊗@")
        if len(pieces) > 2:
            raise ValueError(f"more than one tensor sign in term {body!r}")
        if len(pieces) == 2:
            left, right = pieces[0][1], pieces[1][1]
        k = 0
        coeff = Scalar.constant(dim, sign)
        sym: List[int] = []
        for _, factor in _split_top(left, "*∨"):
            f = factor.strip()
            if not f:
                raise ValueError(f"empty factor in term {body!r}")
            m = _NU.match(f)
            if m:
                k += int(m.group(1) or 1)
                continue
            m = _DX.match(f)
            if m:
                sym.extend([int(m.group(1))] * int(m.group(2) or 1))
                continue
            coeff = coeff * parse_scalar(f, dim)
        anti: List[int] = []
        if right is not None:
            for _, factor in _split_top(right, "∧&*"):
                f = factor.strip()
                m = _DX.match(f)
                if not m or m.group(2):
                    raise ValueError(f"bad form factor {f!r}")
                anti.append(int(m.group(1)))
        result = result + WeylElement.monomial(dim, cap, sym=sym, anti=anti, coeff=coeff, nu=k)
    return result
