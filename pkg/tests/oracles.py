"""Independent reference formulas used as test oracles."""

from fractions import Fraction
from itertools import product
from math import factorial

from fedosov.scalar_poly import NuSeries, Scalar


def _d(f: Scalar, idx) -> Scalar:
    for i in idx:
        f = f.derivative(i + 1)
        if not f:
            break
    return f


def moyal(f: NuSeries, g: NuSeries, lam, order: int) -> NuSeries:
    """Weyl-Moyal product ``sum_k (nu/2)^k/k! Lambda^{i1 j1}..(d_I f)(d_J g)``, written out
    as a plain sum over index tuples."""
    n = len(lam)
    f, g = NuSeries.of(f), NuSeries.of(g)
    out = {}
    for a, fa in f.items():
        for b, gb in g.items():
            for k in range(order - a - b + 1):
                acc = Scalar.zero(n)
                for I in product(range(n), repeat=k):
                    for J in product(range(n), repeat=k):
                        w = 1
                        for i, j in zip(I, J):
                            w *= lam[i][j]
                        if not w:
                            continue
                        acc = acc + (_d(fa, I) * _d(gb, J)).scale(w)
                acc = acc.scale(Fraction(1, 2 ** k * factorial(k)))
                out[a + b + k] = out.get(a + b + k, Scalar.zero(n)) + acc
    return NuSeries(n, out)


def monomials(dim: int, max_deg: int):
    return [Scalar(dim, {e: 1}) for e in product(range(max_deg + 1), repeat=dim) if sum(e) <= max_deg]
