"""Differential forms on a chart, stored as WeylElements without symmetric part.

A ``p``-form (possibly a nu-series of forms) is a WeylElement whose terms all
have ``alpha = 0`` and antisymmetric degree ``p``.  This module provides the
exterior derivative, the radial homotopy operator of the Poincare lemma and
a few conversions used by the Euler and Deligne constructions.
"""

from __future__ import annotations

from typing import Dict, Mapping, Optional, Sequence

from .scalar_poly import GaussianRational, Scalar, parse_scalar
from .weyl import (
    Key,
    VectorField,
    WeylElement,
    _accumulate,
    _finish,
    insert_anti,
    wedge_sign,
)

__all__ = [
    "form",
    "is_form",
    "exterior_d",
    "poincare_potential",
    "evaluate_two_form",
    "interior",
    "form_to_sym",
    "sym_to_form",
    "one_form_components",
]


def form(dim: int, components: Mapping[Sequence[int], object], nu: int = 0,
         cap: Optional[int] = None) -> WeylElement:
    """Build a form from ``{(i, j, ...): coefficient}`` with 1-based indices."""
    out = WeylElement.zero(dim, cap)
    for idx, c in components.items():
        if isinstance(idx, int):
            idx = (idx,)
        if isinstance(c, str):
            c = parse_scalar(c, dim)
        out = out + WeylElement.monomial(dim, cap, anti=tuple(idx), coeff=c, nu=nu)
    return out


def is_form(a: WeylElement, degree: Optional[int] = None) -> bool:
    zero = (0,) * a.dim
    return all(al == zero and (degree is None or len(A) == degree) for (_, al, A) in a.keys())


def exterior_d(a: WeylElement) -> WeylElement:
    """``d = dx^i ^ d/dx^i`` on coefficients (any symmetric part is carried along)."""
    out: Dict[Key, Dict] = {}
    for (k, al, A), c in a.items():
        for i in range(a.dim):
            d = c.derivative(i + 1)
            if not d:
                continue
            res = wedge_sign((i,), A)
            if res is None:
                continue
            sign, iA = res
            _accumulate(out, (k, al, iA), d, sign)
    return _finish(a.dim, a.cap, out)


def _radial(a: WeylElement) -> WeylElement:
    """Radial homotopy ``K``: on ``x^b dx^I`` of degree ``p`` it is ``i_E / (|b| + p)``."""
    n = a.dim
    out: Dict[Key, Dict] = {}
    for (k, al, A), c in a.items():
        p = len(A)
        if not p:
            continue
        for e, coeff in c.items():
            w = sum(e) + p
            for pos, j in enumerate(A):
                ej = e[:j] + (e[j] + 1,) + e[j + 1:]
                mono = Scalar._raw(n, {ej: coeff})
                factor = GaussianRational(-1 if pos % 2 else 1) / w
                _accumulate(out, (k, al, A[:pos] + A[pos + 1:]), mono, factor)
    return _finish(n, a.cap, out)


def poincare_potential(a: WeylElement) -> WeylElement:
    """Primitive of a closed form vanishing at the origin.

    Parameters
    ----------
    a : WeylElement
        A closed form of positive degree (nu-series of forms allowed).

    Returns
    -------
    WeylElement
        ``b`` with ``d b == a`` exactly.

    Raises
    ------
    ValueError
        If ``a`` is not a form of positive degree or is not closed.
    """
    if not is_form(a):
        raise ValueError("input has a symmetric part; expected a differential form")
    if any(len(A) == 0 for (_, _, A) in a.keys()):
        raise ValueError("input contains a 0-form component")
    if exterior_d(a):
        raise ValueError("input form is not closed")
    return _radial(a)


def interior(X: VectorField, a: WeylElement) -> WeylElement:
    """Interior product ``i_X`` on the form part."""
    return insert_anti(X, a)


def evaluate_two_form(a: WeylElement, X: VectorField, Y: VectorField) -> WeylElement:
    """``a(X, Y) = i_Y i_X a``; a nu-series of functions when ``a`` is a two-form."""
    return insert_anti(Y, insert_anti(X, a))


def form_to_sym(a: WeylElement) -> WeylElement:
    """Reinterpret a one-form ``theta_j dx^j`` as the symmetric element ``theta_j y^j``."""
    out: Dict[Key, Dict] = {}
    for (k, al, A), c in a.items():
        if len(A) != 1 or any(al):
            raise ValueError("expected a one-form")
        j = A[0]
        e = tuple(1 if i == j else 0 for i in range(a.dim))
        _accumulate(out, (k, e, ()), c, 1)
    return _finish(a.dim, a.cap, out)


def sym_to_form(a: WeylElement) -> WeylElement:
    """Inverse of :func:`form_to_sym` on symmetric degree one, antidegree zero."""
    out: Dict[Key, Dict] = {}
    for (k, al, A), c in a.items():
        if A or sum(al) != 1:
            raise ValueError("expected symmetric degree one without form part")
        _accumulate(out, (k, (0,) * a.dim, (al.index(1),)), c, 1)
    return _finish(a.dim, a.cap, out)


def one_form_components(a: WeylElement, nu: int = 0):
    """Components ``theta_j`` (0-based list of Scalars) of the ``nu^nu`` part of a one-form."""
    comps = [Scalar.zero(a.dim) for _ in range(a.dim)]
    for (k, al, A), c in a.items():
        if k == nu and len(A) == 1 and not any(al):
            comps[A[0]] = comps[A[0]] + c
    return comps
