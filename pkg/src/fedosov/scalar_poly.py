"""Exact polynomials over the Gaussian rationals.

Every coefficient function in the engine is a :class:`Scalar`: a sparse
polynomial in the chart coordinates ``x1 .. x{dim}`` whose coefficients are
:class:`GaussianRational` numbers ``a + b*i`` with ``a, b`` rational.  Nothing
here ever touches floating point.

Text form follows a small grammar::

    expr     := ['-'] term (('+'|'-') term)*
    term     := factor ('*' factor)*
    factor   := base ('^' uint)?
    base     := rational | 'i' | var | '(' expr ')'
    var      := 'x' uint
    rational := int ('/' uint)?

``canonical_string`` prints monomials in descending graded-lexicographic
order, so equal polynomials always print identically and the printed form
parses back to the same value.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

Rational = Fraction
Monomial = Tuple[int, ...]

__all__ = [
    "Rational",
    "GaussianRational",
    "Scalar",
    "NuSeries",
    "ParseError",
    "parse_scalar",
    "parse_series",
    "canonical_string",
    "partial_derivative",
    "conjugate_scalar",
    "monomial_key",
]


class ParseError(ValueError):
    """Syntax error in an expression; ``pos`` is the 0-based offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            raise TypeError("floating point complex values are not exact")
        if isinstance(value, float):
            raise TypeError("floating point values are not exact")
        return cls(value, 0)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __add__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        if not isinstance(other, GaussianRational):
            other = GaussianRational.coerce(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b:
            if not d:
                return GaussianRational(a * c, 0)
            return GaussianRational(a * c, a * d)
        if not d:
            return GaussianRational(a * c, b * c)
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.coerce(other)
        c, d = other.re, other.im
        den = c * c + d * d
        if not den:
            raise ZeroDivisionError("division by zero")
        return self * GaussianRational(c / den, -d / den)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __repr__(self) -> str:
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self) -> str:
        return _format_coeff(self)


def _fmt_frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _format_coeff(c: GaussianRational) -> str:
    if not c.im:
        return _fmt_frac(c.re)
    if not c.re:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return f"{_fmt_frac(c.im)}*i"
    im = c.im
    sign = "+" if im > 0 else "-"
    mag = "i" if abs(im) == 1 else f"{_fmt_frac(abs(im))}*i"
    return f"({_fmt_frac(c.re)} {sign} {mag})"


def monomial_key(exp: Monomial):
    """Sort key giving descending graded-lexicographic order (x1 > x2 > ...)."""
    return (-sum(exp), tuple(-e for e in exp))


def _format_monomial(exp: Monomial, names: Optional[Tuple[str, ...]] = None) -> str:
    parts = []
    for idx, e in enumerate(exp):
        if e:
            name = names[idx] if names else f"x{idx + 1}"
            parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def _format_poly(terms: Mapping[Monomial, GaussianRational],
                 names: Optional[Tuple[str, ...]] = None,
                 order=None) -> str:
    if not terms:
        return "0"
    keys = sorted(terms, key=order or monomial_key)
    out = []
    for n, exp in enumerate(keys):
        c = terms[exp]
        mono = _format_monomial(exp, names)
        negative = False
        if not c.im and c.re < 0:
            negative, c = True, -c
        elif not c.re and c.im < 0:
            negative, c = True, -c
        cs = _format_coeff(c)
        if mono:
            body = mono if cs == "1" else f"{cs}*{mono}"
        else:
            body = cs
        if n == 0:
            out.append(f"-{body}" if negative else body)
        else:
            out.append(f" - {body}" if negative else f" + {body}")
    return "".join(out)


class Scalar:
    """Polynomial in ``x1..x{dim}`` with Gaussian-rational coefficients.

    Instances are immutable; arithmetic returns new objects.  The term dict
    never stores zero coefficients.
    """

    __slots__ = ("dim", "_terms", "_hash")

    def __init__(self, dim: int, terms: Optional[Mapping[Monomial, object]] = None):
        if dim < 0:
            raise ValueError("dimension must be non-negative")
        self.dim = dim
        clean: Dict[Monomial, GaussianRational] = {}
        if terms:
            for exp, c in terms.items():
                exp = tuple(exp)
                if len(exp) != dim:
                    raise ValueError(f"monomial {exp} does not have length {dim}")
                c = GaussianRational.coerce(c)
                if c:
                    clean[exp] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, dim: int, terms: Dict[Monomial, GaussianRational]) -> "Scalar":
        obj = object.__new__(cls)
        obj.dim = dim
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, dim: int, value=1) -> "Scalar":
        value = GaussianRational.coerce(value)
        return cls._raw(dim, {(0,) * dim: value} if value else {})

    @classmethod
    def zero(cls, dim: int) -> "Scalar":
        return cls._raw(dim, {})

    @classmethod
    def variable(cls, dim: int, i: int) -> "Scalar":
        """The coordinate function ``x{i}`` (1-based)."""
        if not 1 <= i <= dim:
            raise ValueError(f"variable x{i} out of range for dim={dim}")
        exp = [0] * dim
        exp[i - 1] = 1
        return cls._raw(dim, {tuple(exp): GaussianRational(1)})

    @property
    def terms(self) -> Dict[Monomial, GaussianRational]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Monomial, GaussianRational]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_term(self) -> GaussianRational:
        return self._terms.get((0,) * self.dim, GaussianRational(0))

    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def _check(self, other: "Scalar") -> None:
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            self._check(other)
            return other
        return Scalar.constant(self.dim, other)

    def __eq__(self, other) -> bool:
        if isinstance(other, Scalar):
            return self.dim == other.dim and self._terms == other._terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self == Scalar.constant(self.dim, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, frozenset(self._terms.items())))
        return self._hash

    def __add__(self, other) -> "Scalar":
        other = self._coerce(other)
        out = dict(self._terms)
        for exp, c in other._terms.items():
            v = out.get(exp)
            if v is None:
                out[exp] = c
            else:
                v = v + c
                if v:
                    out[exp] = v
                else:
                    del out[exp]
        return Scalar._raw(self.dim, out)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar._raw(self.dim, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "Scalar":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Scalar":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Scalar":
        if not isinstance(other, Scalar):
            return self.scale(other)
        self._check(other)
        a, b = self._terms, other._terms
        if not a or not b:
            return Scalar._raw(self.dim, {})
        out: Dict[Monomial, GaussianRational] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                v = out.get(e)
                out[e] = c1 * c2 if v is None else v + c1 * c2
        return Scalar._raw(self.dim, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def scale(self, factor) -> "Scalar":
        factor = GaussianRational.coerce(factor)
        if not factor:
            return Scalar._raw(self.dim, {})
        if factor == 1:
            return self
        return Scalar._raw(self.dim, {e: c * factor for e, c in self._terms.items()})

    def __pow__(self, n: int) -> "Scalar":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = Scalar.constant(self.dim, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivative(self, i: int) -> "Scalar":
        """Partial derivative along ``x{i}`` (1-based)."""
        if not 1 <= i <= self.dim:
            raise ValueError(f"coordinate index {i} out of range for dim={self.dim}")
        k = i - 1
        out = {}
        for exp, c in self._terms.items():
            e = exp[k]
            if e:
                new = exp[:k] + (e - 1,) + exp[k + 1:]
                out[new] = c * e
        return Scalar._raw(self.dim, out)

    def conjugate(self) -> "Scalar":
        return Scalar._raw(self.dim, {e: c.conjugate() for e, c in self._terms.items()})

    def is_real(self) -> bool:
        return all(not c.im for c in self._terms.values())

    def evaluate(self, point: Iterable) -> GaussianRational:
        pt = [GaussianRational.coerce(p) for p in point]
        total = GaussianRational(0)
        for exp, c in self._terms.items():
            v = c
            for p, e in zip(pt, exp):
                for _ in range(e):
                    v = v * p
            total = total + v
        return total

    def __str__(self) -> str:
        return _format_poly(self._terms)

    def __repr__(self) -> str:
        return f"Scalar({self.dim}, {str(self)!r})"


# --------------------------------------------------------------------------
# formal nu-series of scalars

class NuSeries:
    """Truncated formal power series ``sum_k nu^k f_k`` with Scalar coefficients."""

    __slots__ = ("dim", "_coeffs")

    def __init__(self, dim: int, coeffs: Optional[Mapping[int, Scalar]] = None):
        self.dim = dim
        clean = {}
        for k, f in (coeffs or {}).items():
            if k < 0:
                raise ValueError("negative nu powers are not allowed")
            if not isinstance(f, Scalar):
                f = Scalar.constant(dim, f)
            if f.dim != dim:
                raise ValueError("dimension mismatch in series coefficient")
            if f:
                clean[k] = f
        self._coeffs = clean

    @classmethod
    def of(cls, f: Union[Scalar, "NuSeries"]) -> "NuSeries":
        if isinstance(f, NuSeries):
            return f
        return cls(f.dim, {0: f})

    def __getitem__(self, k: int) -> Scalar:
        return self._coeffs.get(k, Scalar.zero(self.dim))

    def items(self):
        return sorted(self._coeffs.items())

    def order(self) -> int:
        """Highest nu power present (-1 for zero)."""
        return max(self._coeffs, default=-1)

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, Scalar):
            other = NuSeries.of(other)
        if not isinstance(other, NuSeries):
            return NotImplemented
        return self.dim == other.dim and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.dim, frozenset(self._coeffs.items())))

    def __add__(self, other) -> "NuSeries":
        other = NuSeries.of(other) if isinstance(other, Scalar) else other
        out = dict(self._coeffs)
        for k, f in other._coeffs.items():
            out[k] = out[k] + f if k in out else f
        return NuSeries(self.dim, out)

    def __neg__(self) -> "NuSeries":
        return NuSeries(self.dim, {k: -f for k, f in self._coeffs.items()})

    def __sub__(self, other) -> "NuSeries":
        other = NuSeries.of(other) if isinstance(other, Scalar) else other
        return self + (-other)

    def scale(self, c) -> "NuSeries":
        return NuSeries(self.dim, {k: f.scale(c) for k, f in self._coeffs.items()})

    def shift(self, n: int) -> "NuSeries":
        """Multiply by ``nu^n`` (``n`` may be negative if divisible)."""
        if any(k + n < 0 for k in self._coeffs):
            raise ValueError("series is not divisible by the requested nu power")
        return NuSeries(self.dim, {k + n: f for k, f in self._coeffs.items()})

    def truncate(self, max_order: int) -> "NuSeries":
        """Drop every term of nu power greater than ``max_order``."""
        return NuSeries(self.dim, {k: f for k, f in self._coeffs.items() if k <= max_order})

    def parity(self) -> "NuSeries":
        return NuSeries(self.dim, {k: (-f if k % 2 else f) for k, f in self._coeffs.items()})

    def conjugate(self) -> "NuSeries":
        """Complex conjugation with ``nu -> -nu``."""
        return NuSeries(self.dim, {k: (-f.conjugate() if k % 2 else f.conjugate())
                                   for k, f in self._coeffs.items()})

    def nu_euler(self) -> "NuSeries":
        """``nu d/dnu``."""
        return NuSeries(self.dim, {k: f.scale(k) for k, f in self._coeffs.items()})

    def map(self, fn) -> "NuSeries":
        return NuSeries(self.dim, {k: fn(f) for k, f in self._coeffs.items()})

    def __str__(self) -> str:
        if not self._coeffs:
            return "0"
        terms = {}
        for k, f in self._coeffs.items():
            for exp, c in f.items():
                terms[exp + (k,)] = c
        names = tuple(f"x{i + 1}" for i in range(self.dim)) + ("nu",)
        return _format_poly(terms, names,
                            order=lambda e: (e[-1],) + monomial_key(e[:-1]))

    def __repr__(self) -> str:
        return f"NuSeries({self.dim}, {str(self)!r})"


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|(nu|\u03bd|x\d+|i)|(.))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(m.lastindex) if m.lastindex else pos
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), start))
        elif m.group(2) is not None:
            name = "nu" if m.group(2) == "\u03bd" else m.group(2)
            tokens.append(("name", name, start))
        elif m.group(3) is not None:
            if m.group(3).isspace():
                pos = m.end()
                continue
            tokens.append(("op", m.group(3), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, dim: int, allow_nu: bool):
        self.tokens = _tokenize(text)
        self.i = 0
        self.dim = dim
        self.nvars = dim + (1 if allow_nu else 0)
        self.allow_nu = allow_nu

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def parse(self) -> Scalar:
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return value

    def expr(self) -> Scalar:
        negate = False
        if self.peek()[1] == "-":
            self.take()
            negate = True
        value = self.term()
        if negate:
            value = -value
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Scalar:
        value = self.factor()
        while self.peek()[1] == "*":
            self.take()
            value = value * self.factor()
        return value

    def factor(self) -> Scalar:
        value = self.base()
        if self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "int":
                raise ParseError("exponent must be an unsigned integer", tok[2])
            value = value ** int(tok[1])
        return value

    def base(self) -> Scalar:
        tok = self.take()
        kind, text, pos = tok
        if text == "(":
            value = self.expr()
            self.expect(")")
            return value
        if kind == "int" or (text == "-" and self.peek()[0] == "int"):
            if text == "-":
                num = -int(self.take()[1])
            else:
                num = int(text)
            den = 1
            if self.peek()[1] == "/":
                self.take()
                dtok = self.take()
                if dtok[0] != "int":
                    raise ParseError("denominator must be an unsigned integer", dtok[2])
                den = int(dtok[1])
                if den == 0:
                    raise ParseError("zero denominator", dtok[2])
            return Scalar.constant(self.nvars, Fraction(num, den))
        if kind == "name":
            if text == "i":
                return Scalar.constant(self.nvars, GaussianRational(0, 1))
            if text == "nu":
                if not self.allow_nu:
                    raise ParseError("'nu' is not allowed here", pos)
                exp = [0] * self.nvars
                exp[-1] = 1
                return Scalar._raw(self.nvars, {tuple(exp): GaussianRational(1)})
            idx = int(text[1:])
            if not 1 <= idx <= self.dim:
                raise ParseError(f"variable {text} out of range for dim={self.dim}", pos)
            exp = [0] * self.nvars
            exp[idx - 1] = 1
            return Scalar._raw(self.nvars, {tuple(exp): GaussianRational(1)})
        raise ParseError(f"unexpected {text or 'end of input'!r}", pos)


def parse_scalar(text: str, dim: int) -> Scalar:
    """Parse ``text`` into a Scalar in ``dim`` variables."""
    if dim < 1:
        raise ValueError("dim must be positive")
    return _Parser(text, dim, allow_nu=False).parse()


def parse_series(text: str, dim: int) -> NuSeries:
    """Parse a polynomial that may also contain the formal parameter ``nu``."""
    poly = _Parser(text, dim, allow_nu=True).parse()
    coeffs: Dict[int, Dict[Monomial, GaussianRational]] = {}
    for exp, c in poly.items():
        coeffs.setdefault(exp[-1], {})[exp[:-1]] = c
    return NuSeries(dim, {k: Scalar(dim, t) for k, t in coeffs.items()})


def canonical_string(s: Union[Scalar, NuSeries]) -> str:
    return str(s)


def partial_derivative(s: Scalar, i: int) -> Scalar:
    return s.derivative(i)


def conjugate_scalar(s: Scalar) -> Scalar:
    return s.conjugate()
