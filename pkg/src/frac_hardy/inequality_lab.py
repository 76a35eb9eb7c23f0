"""Direct checks of the Hardy-type inequalities, the boundary barrier and the kernel ``K``.

Nothing here solves an eigenproblem.  The functions evaluate the two sides
of each inequality (or the barrier and its derivatives) so that tests and
the command line can report margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from frac_hardy.assembly import AssembledProblem, QuadratureConfig, assemble_weighted_mass
from frac_hardy.geometry import (
    DirectionalQuadrature,
    Disk,
    Domain,
    Polygon,
    _interior,
    directional_profile,
    omega_x_volume,
    ray_trace,
)
from frac_hardy.mesh import Mesh
from frac_hardy.special_constants import (
    FracParams,
    ParameterError,
    a_ns,
    appendix_cns,
    cos_moment,
    h_ns,
    sphere_area,
)

__all__ = [
    "BarrierParams",
    "chi",
    "chi_prime",
    "chi_double_prime",
    "chi_double_prime_printed",
    "algebraic_inequality_margin",
    "KQuadError",
    "K_integral",
    "k_model",
    "GeomHardyForms",
    "geom_hardy_forms",
    "geom_hardy_residual",
    "convex_hardy_residual",
    "d_lower_estimate_margin",
    "split_inequality_margin",
]


# ---------------------------------------------------------------------------
# barrier
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BarrierParams:
    alpha: float
    s: float

    def __post_init__(self):
        if not 0.5 < self.alpha < 1.0:
            raise ParameterError("alpha must lie in (1/2, 1)")
        if not 0.5 < self.s < 1.0:
            raise ParameterError("s must lie in (1/2, 1)")

    @property
    def gamma_alpha_s(self) -> float:
        a, s = self.alpha, self.s
        return 8.0 * a * (1.0 - s) / ((2.0 * s - 1.0) * (3.0 - 2.0 * s))


def _positive(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ParameterError("the barrier is defined for t > 0")
    return t


def _out(t_in, val):
    return float(val) if np.ndim(t_in) == 0 else val


def chi(bp: BarrierParams, t):
    """``t^{(2s-1)/2} (1 - log t)^{-alpha}`` on (0, 1], ``t^{(2s-1)/2}`` beyond."""
    x = _positive(t)
    e = (2 * bp.s - 1) / 2
    L = 1.0 - np.log(np.minimum(x, 1.0))
    return _out(t, x**e * L ** (-bp.alpha))


def chi_prime(bp: BarrierParams, t):
    x = _positive(t)
    s, a = bp.s, bp.alpha
    L = 1.0 - np.log(np.minimum(x, 1.0))
    p = x ** (-(3 - 2 * s) / 2)
    inner = (2 * s - 1) / 2 * L ** (-a) + np.where(x <= 1.0, a * L ** (-a - 1), 0.0)
    return _out(t, p * inner)


def chi_double_prime(bp: BarrierParams, t):
    """Second derivative, including the mixed term ``-2 alpha (1-s) t^{-(5-2s)/2} (1-log t)^{-alpha-1}``.

    The mixed term is the one carried by ``gamma_alpha_s`` in the expansion of
    the operator applied to the barrier; :func:`chi_double_prime_printed`
    omits it.
    """
    x = _positive(t)
    s, a = bp.s, bp.alpha
    L = 1.0 - np.log(np.minimum(x, 1.0))
    p = x ** (-(5 - 2 * s) / 2)
    head = -(2 * s - 1) * (3 - 2 * s) / 4 * L ** (-a)
    tail = np.where(x <= 1.0, -2 * a * (1 - s) * L ** (-a - 1) + a * (a + 1) * L ** (-a - 2), 0.0)
    return _out(t, p * (head + tail))


def chi_double_prime_printed(bp: BarrierParams, t):
    x = _positive(t)
    s, a = bp.s, bp.alpha
    L = 1.0 - np.log(np.minimum(x, 1.0))
    p = x ** (-(5 - 2 * s) / 2)
    head = -(2 * s - 1) * (3 - 2 * s) / 4 * L ** (-a)
    tail = np.where(x <= 1.0, a * (a + 1) * L ** (-a - 2), 0.0)
    return _out(t, p * (head + tail))


# ---------------------------------------------------------------------------
# scalar inequality
# ---------------------------------------------------------------------------


def algebraic_inequality_margin(a, b, theta):
    """``(a+b)^theta - a^theta - theta b^theta`` for ``a >= b > 0`` and ``1 < theta <= 2``."""
    a_, b_, t_ = (np.asarray(v, dtype=float) for v in (a, b, theta))
    if np.any(~(b_ > 0)) or np.any(a_ < b_) or np.any(~(t_ > 1)) or np.any(t_ > 2):
        raise ParameterError("need a >= b > 0 and 1 < theta <= 2")
    # a^theta ((1+r)^theta - 1) - theta b^theta with r = b/a, cancellation-free
    r = b_ / a_
    val = a_**t_ * np.expm1(t_ * np.log1p(r)) - t_ * b_**t_
    return float(val) if val.ndim == 0 else val


# ---------------------------------------------------------------------------
# K(x)
# ---------------------------------------------------------------------------


class KQuadError(RuntimeError):
    """Adaptive quadrature for ``K`` did not converge."""


def _ray_integral(d: Domain, x: np.ndarray, nu: np.ndarray, dx: float, s: float, epsrel: float) -> float:
    total = 0.0
    for lo, hi in ray_trace(d, x, nu).intervals:
        if hi <= 0.0:
            continue
        lo = max(lo, 0.0)

        def g(r):
            # points of the closed ray section; skip the validating wrapper
            return (float(d._delta((x + r * nu)[None, :])[0]) - dx) ** 2

        if lo == 0.0:
            # (delta(y)-delta(x))^2 / r^2 is bounded; the weight r^{1-2s} is integrable.
            # Below r0 the difference quotient is frozen to avoid cancellation.
            r0 = 1e-4 * dx
            q0 = g(r0) / (r0 * r0)
            val, _ = integrate.quad(lambda r: g(r) / (r * r) if r > r0 else q0, 0.0, hi,
                                    weight="alg", wvar=(1 - 2 * s, 0.0), epsrel=epsrel, limit=200)
        else:
            val, _ = integrate.quad(lambda r: g(r) * r ** (-1 - 2 * s), lo, hi, epsrel=epsrel, limit=200)
        total += val
    return total


def K_integral(d: Domain, x, p: FracParams, epsrel: float = 1e-9) -> float:
    """``int_Omega (delta(y) - delta(x))^2 |y-x|^{-N-2s} dy`` in polar coordinates around ``x``.

    The radial integral is adaptive Gauss-Kronrod with the algebraic weight
    ``r^{1-2s}``; the angular integral is adaptive as well.
    """
    p.require_open()
    if d.dim != p.N:
        raise ParameterError("parameter dimension differs from domain dimension")
    X = _interior(d, x)[0]
    dx = float(d.delta(X[None, :])[0])
    s = p.s
    if d.dim == 1:
        return sum(_ray_integral(d, X, np.array([sg]), dx, s, epsrel) for sg in (1.0, -1.0))
    if d.dim != 2:
        raise ParameterError("K_integral supports N = 1 and N = 2")

    def f(th):
        return _ray_integral(d, X, np.array([math.cos(th), math.sin(th)]), dx, s, 1e-2 * epsrel)

    with np.errstate(all="ignore"):
        val, err = integrate.quad(f, 0.0, 2 * math.pi, epsrel=epsrel, limit=400,
                                  points=_angular_breaks(d, X) or None)
    if not np.isfinite(val) or err > 1e3 * epsrel * abs(val) + 1e-14:
        raise KQuadError(f"angular quadrature for K did not converge (estimate {val}, error {err})")
    return float(val)


def _angular_breaks(d: Domain, X: np.ndarray) -> list[float]:
    """Directions from ``X`` where the angular integrand has kinks (corners, disk centre)."""
    if isinstance(d, Polygon):
        targets = d.vertices
    elif isinstance(d, Disk):
        targets = np.asarray(d.center, dtype=float)[None, :]
    else:
        return []
    D = targets - X
    D = D[np.linalg.norm(D, axis=1) > 1e-12]
    th = np.mod(np.arctan2(D[:, 1], D[:, 0]), 2 * math.pi)
    return sorted({float(v) for v in th if 1e-12 < v < 2 * math.pi - 1e-12})


def k_model(p: FracParams, delta: float, r: float) -> float:
    """Flat-boundary model ``C(N,s) (delta^{2-2s} + r^{2-2s}) / (2-2s)`` of the near part of ``K``."""
    s = p.s
    return appendix_cns(p) * (delta ** (2 - 2 * s) + r ** (2 - 2 * s)) / (2 - 2 * s)


# ---------------------------------------------------------------------------
# geometric Hardy inequality
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GeomHardyForms:
    """Weighted mass matrices (interior nodes) for the two lower-order terms."""

    Wm: np.ndarray
    Wo: np.ndarray
    h: float
    a: float

    def residual(self, A: np.ndarray, u: np.ndarray) -> float:
        return float(u @ A @ u - self.h * (u @ self.Wm @ u) - self.a * (u @ self.Wo @ u))


def geom_hardy_forms(d: Domain, m: Mesh, p: FracParams, q: DirectionalQuadrature,
                     qc: QuadratureConfig | None = None) -> GeomHardyForms:
    """Assemble ``int phi_i phi_j m_{2s}^{-2s}`` and ``int phi_i phi_j |Omega_x|^{-2s/N}``."""
    p.require_open()
    s, N = p.s, p.N
    cm = cos_moment(p)

    def w_m(X):
        prof = directional_profile(d, _interior(d, X), q)
        return q.integrate(prof.d ** (-2 * s)) / cm

    def w_o(X):
        return np.atleast_1d(omega_x_volume(d, X, q)) ** (-2 * s / N)

    inner = m.interior_nodes
    Wm = assemble_weighted_mass(m, w_m, qc)[np.ix_(inner, inner)]
    Wo = assemble_weighted_mass(m, w_o, qc)[np.ix_(inner, inner)]
    return GeomHardyForms(Wm, Wo, h_ns(p), a_ns(p))


def _interior_vector(m: Mesh, prob: AssembledProblem, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape == (prob.size,):
        return u
    if u.shape == (m.n_nodes,):
        if np.any(u[m.boundary] != 0.0):
            raise ParameterError("u must vanish on boundary nodes")
        return u[m.interior_nodes]
    raise ParameterError("u must have one entry per interior node or per node")


def geom_hardy_residual(d: Domain, m: Mesh, prob: AssembledProblem, u, q: DirectionalQuadrature,
                        forms: GeomHardyForms | None = None) -> float:
    """``u^T A u - h int u^2 m_{2s}^{-2s} - a int u^2 |Omega_x|^{-2s/N}``; non-negative in the continuum."""
    forms = forms or geom_hardy_forms(d, m, prob.params, q)
    return forms.residual(prob.A, _interior_vector(m, prob, u))


def convex_hardy_residual(prob: AssembledProblem, u) -> float:
    """Convex case: ``u^T A u - h int u^2 delta^{-2s} - a |Omega|^{-2s/N} int u^2``."""
    p = prob.params
    u = np.asarray(u, dtype=float)
    a = a_ns(p) * prob.domain_volume ** (-2 * p.s / p.N)
    return float(u @ prob.A @ u - h_ns(p) * (u @ prob.B @ u) - a * (u @ prob.M @ u))


# ---------------------------------------------------------------------------
# pointwise directional inequalities
# ---------------------------------------------------------------------------


def d_lower_estimate_margin(d: Domain, x, p: FracParams, q: DirectionalQuadrature):
    """``mean(reach^{-2s}) - 2^{-2s} (N |Omega_x| / |S^{N-1}|)^{-2s/N}``."""
    p.require_open()
    X = _interior(d, x)
    s, N = p.s, p.N
    prof = directional_profile(d, X, q)
    lhs = q.integrate(prof.reach ** (-2 * s))
    vol = np.atleast_1d(omega_x_volume(d, X, q))
    rhs = 2.0 ** (-2 * s) * (N * vol / sphere_area(N)) ** (-2 * s / N)
    out = lhs - rhs
    return float(out[0]) if np.ndim(x) <= (0 if d.dim == 1 else 1) else out


def split_inequality_margin(d: Domain, x, p: FracParams, q: DirectionalQuadrature):
    """``M_{2s}^{-2s} - m_{2s}^{-2s} - 2s mean(reach^{-2s}) / cos_moment`` at each point."""
    p.require_open()
    X = _interior(d, x)
    s = p.s
    cm = cos_moment(p)
    prof = directional_profile(d, X, q)
    big = q.integrate((1.0 / prof.d + 1.0 / prof.reach) ** (2 * s)) / cm
    small = q.integrate(prof.d ** (-2 * s)) / cm
    extra = 2 * s * q.integrate(prof.reach ** (-2 * s)) / cm
    out = big - small - extra
    return float(out[0]) if np.ndim(x) <= (0 if d.dim == 1 else 1) else out


