"""Closed-form constants of the fractional Hardy problem.

Every constant is a ratio of Gamma functions and is evaluated in double
precision with :func:`math.gamma`.  The half-space Hardy constant
``h_ns`` and the volume-bound constant ``a_ns`` vanish at ``s = 1/2``;
that endpoint is accepted here and nowhere else in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "FracParams",
    "ParameterError",
    "c_ns",
    "kappa_ns",
    "h_ns",
    "a_ns",
    "cos_moment",
    "appendix_cns",
    "sphere_area",
]


class ParameterError(ValueError):
    """Raised for (N, s) outside the admissible range."""


@dataclass(frozen=True)
class FracParams:
    """Dimension ``N``, exponent ``s`` and an optional spectral shift ``lam``.

    ``s`` must lie in ``[1/2, 1)``. :meth:`require_open` additionally rejects
    ``s = 1/2``, which is what the assembly and spectral code needs.
    """

    N: int
    s: float
    lam: float | None = None

    def __post_init__(self) -> None:
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"dimension N must be a positive integer, got {self.N!r}")
        if not (0.5 <= self.s < 1.0):
            raise ParameterError(f"s must lie in [1/2, 1), got {self.s!r}")

    def require_open(self) -> "FracParams":
        """Return self if ``1/2 < s < 1``; raise otherwise."""
        if self.s <= 0.5:
            raise ParameterError(f"s must lie in (1/2, 1) here, got {self.s!r}")
        return self


def _params(p: FracParams | tuple[int, float]) -> FracParams:
    if isinstance(p, FracParams):
        return p
    N, s = p
    return FracParams(N, s)


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in R^N (``2`` for N = 1)."""
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


def c_ns(p: FracParams | tuple[int, float]) -> float:
    """Normalisation constant of the regional fractional Laplacian."""
    p = _params(p)
    N, s = p.N, p.s
    return 2.0 ** (2 * s) * math.pi ** (-N / 2) * s * math.gamma((N + 2 * s) / 2) / math.gamma(1 - s)


def _kappa_bracket(s: float) -> float:
    return 2.0 ** (1 - 2 * s) / math.sqrt(math.pi) * math.gamma(1 - s) * math.gamma((1 + 2 * s) / 2) - 1.0


def kappa_ns(p: FracParams | tuple[int, float]) -> float:
    """Loss-Sloane constant kappa_{N,2s}; exactly zero at s = 1/2."""
    p = _params(p)
    N, s = p.N, p.s
    if s == 0.5:
        return 0.0
    prefactor = math.pi ** ((N - 1) / 2) * math.gamma((1 + 2 * s) / 2) / math.gamma((N + 2 * s) / 2) / (2 * s)
    return prefactor * _kappa_bracket(s)


def h_ns(p: FracParams | tuple[int, float]) -> float:
    """Sharp fractional Hardy constant of the half-space, ``c_ns * kappa_ns``."""
    p = _params(p)
    return c_ns(p) * kappa_ns(p)


def cos_moment(p: FracParams | tuple[int, float]) -> float:
    """Normalised spherical mean of ``|cos(e, nu)|^{2s}``, independent of ``e``."""
    p = _params(p)
    N, s = p.N, p.s
    return math.gamma(N / 2) * math.gamma((1 + 2 * s) / 2) / (math.sqrt(math.pi) * math.gamma((N + 2 * s) / 2))


def a_ns(p: FracParams | tuple[int, float]) -> float:
    """Constant in the volume lower bound ``lambda* >= a(N,s) |Omega|^{-2s/N}``."""
    p = _params(p)
    N, s = p.N, p.s
    return (
        h_ns(p)
        * s
        * 2.0 ** (1 - 2 * s)
        / cos_moment(p)
        * (N / sphere_area(N)) ** (-2 * s / N)
    )


def appendix_cns(p: FracParams | tuple[int, float]) -> float:
    """``C(N,s) = int_{R^{N-1}} (|Z|^2 + 1)^{-(N+2s)/2} dZ`` in closed form.

    Radial reduction gives ``pi^{(N-1)/2} Gamma((1+2s)/2) / Gamma((N+2s)/2)``;
    for N = 1 the integral over R^0 is 1.
    """
    p = _params(p)
    N, s = p.N, p.s
    if N == 1:
        return 1.0
    return math.pi ** ((N - 1) / 2) * math.gamma((1 + 2 * s) / 2) / math.gamma((N + 2 * s) / 2)
