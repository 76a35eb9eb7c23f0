"""Reference quadrature rules used by the assembly code.

Triangles are parametrised over the reference triangle
``{(p1, p2): 0 <= p2 <= p1 <= 1}`` through

    x = A + p1 (B - A) + p2 (C - B),

so ``(0,0) -> A``, ``(1,0) -> B``, ``(1,1) -> C``; the Jacobian is ``2|T|``
and the barycentric coordinates are ``(1 - p1, p1 - p2, p2)``.

For touching element pairs the Gagliardo integrand of continuous P1
functions is positively homogeneous of degree ``-2s`` in the relative
variables of the Sauter-Schwab splittings.  The radial variables then
integrate in closed form and only a smooth low-dimensional integral is
left, which Gauss-Legendre resolves spectrally.  The ``*_rule`` functions
below return the sample points of that remaining integral, with all
closed-form factors already folded into the weights.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "gauss_legendre",
    "triangle_rule",
    "coincident_rule",
    "edge_adjacent_rule",
    "vertex_adjacent_rule",
    "geometric_panels",
]


def _readonly(*arrays):
    for a in arrays:
        a.setflags(write=False)
    return arrays if len(arrays) > 1 else arrays[0]


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``n``-point Gauss-Legendre rule on [0, 1]."""
    if n < 1:
        raise ValueError("need at least one point")
    x, w = np.polynomial.legendre.leggauss(int(n))
    return _readonly(0.5 * (x + 1.0), 0.5 * w)


@lru_cache(maxsize=None)
def triangle_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss rule on the reference triangle (weights sum to 1/2).

    Points have shape ``(order**2, 2)`` in ``(p1, p2)`` coordinates; the rule
    is exact for polynomials of total degree ``2*order - 2``.
    """
    t, w = gauss_legendre(order)
    p1 = np.repeat(t, order)
    u = np.tile(t, order)
    pts = np.column_stack([p1, p1 * u])
    wts = np.repeat(w, order) * np.tile(w, order) * p1
    return _readonly(pts, wts)


def _grid(rules):
    nodes = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    weights = np.ones_like(nodes[0])
    for k, (_, w) in enumerate(rules):
        shape = [1] * len(rules)
        shape[k] = -1
        weights = weights * w.reshape(shape)
    return [a.ravel() for a in nodes], weights.ravel()


@lru_cache(maxsize=None)
def coincident_rule(order: int, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Rule for ``int_T int_T G(p - q)`` with ``G`` homogeneous of degree ``-2s``.

    Returns difference vectors ``Z`` (shape ``(6*order, 2)``, reference
    coordinates) and weights ``W`` such that the reference double integral
    equals ``sum(W * G(Z))``.  The six regions are the Sauter-Schwab
    splitting of the coincident case; the factor ``xi^3 eta1^2 eta2`` of the
    Jacobian combined with ``(xi eta1 eta2)^{-2s}`` integrates to
    ``1 / ((4-2s)(3-2s)(2-2s))``.
    """
    t, w = gauss_legendre(order)
    one = np.ones_like(t)
    dirs = [
        (t, one),
        (-t, -one),
        (one, t),
        (-one, -t),
        (-t, 1.0 - t),
        (t, -(1.0 - t)),
    ]
    factor = 1.0 / ((4.0 - 2.0 * s) * (3.0 - 2.0 * s) * (2.0 - 2.0 * s))
    Z = np.vstack([np.column_stack(d) for d in dirs])
    W = np.tile(w, 6) * factor
    return _readonly(Z, W)


@lru_cache(maxsize=None)
def edge_adjacent_rule(order: int, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Rule for triangles sharing the edge ``A -> B`` (same orientation in both).

    The integrand may depend on the reference points only through
    ``R = (p1 - q1, p2, q2)`` and must be homogeneous of degree ``-2s`` in
    ``R``.  Returns ``R`` (shape ``(5*order**2, 3)``) and weights.
    """
    (b, c), w = _grid([gauss_legendre(order)] * 2)
    one = np.ones_like(b)
    regions = [
        ((b, c, 1.0 - b), one),
        ((b * c, one, b * (1.0 - c)), b),
        ((-b, 1.0 - b, b * c), b),
        ((-b * c, b * (1.0 - c), one), b),
        ((-b * c, 1.0 - b * c, b), b),
    ]
    factor = 1.0 / ((4.0 - 2.0 * s) * (3.0 - 2.0 * s))
    R = np.vstack([np.column_stack(r) for r, _ in regions])
    W = np.concatenate([w * extra for _, extra in regions]) * factor
    return _readonly(R, W)


@lru_cache(maxsize=None)
def vertex_adjacent_rule(order: int, s: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rule for triangles sharing only the vertex ``A``.

    The integrand must be homogeneous of degree ``-2s`` jointly in the two
    reference points ``(p, q)``.  Returns points ``P``, ``Q`` on the
    ``max(p1, q1) = 1`` slice and weights carrying ``1/(4-2s)``.
    """
    t, w = gauss_legendre(order)
    (e1, e2, e3), W = _grid([(t, w)] * 3)
    P1 = np.column_stack([np.ones_like(e1), e1])
    Q1 = np.column_stack([e2, e2 * e3])
    W1 = W * e2 / (4.0 - 2.0 * s)
    P = np.vstack([P1, Q1])
    Q = np.vstack([Q1, P1])
    return _readonly(P, Q, np.concatenate([W1, W1]))


def geometric_panels(levels: int, ratio: float = 0.5) -> np.ndarray:
    """Breakpoints ``0, r^L, ..., r, 1`` of a geometric grading toward 0."""
    if levels < 1:
        raise ValueError("levels must be positive")
    inner = ratio ** np.arange(levels, 0, -1, dtype=float)
    return np.concatenate([[0.0], inner, [1.0]])
