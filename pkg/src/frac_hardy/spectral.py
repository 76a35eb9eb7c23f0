"""Generalized eigenproblems behind the Hardy quotient, the shifted quotient and lambda*.

Every value computed here is the minimum of a Rayleigh quotient over the P1
subspace, so it over-estimates the corresponding infimum over H^s_0.
Reports carry ``upper_bound = True`` for that reason.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla

from frac_hardy.assembly import AssembledProblem
from frac_hardy.special_constants import a_ns, h_ns

__all__ = [
    "SpectralError",
    "HardyReport",
    "smallest_generalized_eig",
    "backward_error",
    "mu_estimate",
    "j_lambda",
    "first_eigenvalue",
    "lambda_star_pencil",
    "lambda_star_bisect",
    "chebyshev_grid",
    "j_curve",
    "hardy_report",
    "N_CURVE",
]

N_CURVE = 33
_BRACKET_LIMIT = -1.0e6


class SpectralError(RuntimeError):
    """Eigensolver or bracketing failure."""


def backward_error(L, R, v, theta) -> float:
    """Normwise backward error of the pair ``(theta, v)`` for the pencil ``(L, R)``."""
    scale = (np.linalg.norm(L, 1) + abs(theta) * np.linalg.norm(R, 1)) * np.linalg.norm(v, 1)
    return float(np.linalg.norm(L @ v - theta * (R @ v), 1) / scale)


def smallest_generalized_eig(L: np.ndarray, R: np.ndarray, tol: float = 1e-10,
                             polish: bool = True, max_iter: int = 5) -> tuple[float, np.ndarray]:
    """Smallest eigenpair of ``L v = theta R v`` with ``R`` positive definite.

    Cholesky reduction and a dense symmetric solve, followed by inverse
    iteration when the normwise backward error exceeds ``tol``.  The vector is
    ``R``-normalised with a non-negative largest-magnitude component.
    """
    L = np.asarray(L, dtype=float)
    R = np.asarray(R, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1] or L.shape != R.shape:
        raise SpectralError("pencil matrices must be square with matching shapes")
    if L.shape[0] == 0:
        raise SpectralError("empty pencil")
    try:
        C = sla.cholesky(R, lower=True)
    except sla.LinAlgError as exc:
        raise SpectralError("right-hand matrix is not positive definite") from exc
    Y = sla.solve_triangular(C, L, lower=True)
    S = sla.solve_triangular(C, Y.T, lower=True)
    S = 0.5 * (S + S.T)
    w, y = sla.eigh(S, subset_by_index=[0, 0])
    theta = float(w[0])
    v = sla.solve_triangular(C.T, y[:, 0], lower=False)

    it = 0
    while polish and backward_error(L, R, v, theta) > tol:
        if it == max_iter:
            raise SpectralError("inverse iteration did not reach the residual tolerance")
        shift = theta - 1e-10 * max(1.0, abs(theta))
        try:
            v = sla.solve(L - shift * R, R @ v, assume_a="sym")
        except sla.LinAlgError:
            break
        v = v / math.sqrt(v @ R @ v)
        theta = float(v @ L @ v)
        it += 1
    v = v / math.sqrt(v @ R @ v)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return theta, v


def mu_estimate(prob: AssembledProblem) -> float:
    """Discrete Hardy constant: smallest eigenvalue of ``(A, B)``."""
    return smallest_generalized_eig(prob.A, prob.B)[0]


def j_lambda(prob: AssembledProblem, lam: float) -> float:
    """Shifted Hardy quotient: smallest eigenvalue of ``(A - lam M, B)``."""
    return smallest_generalized_eig(prob.A - lam * prob.M, prob.B)[0]


def first_eigenvalue(prob: AssembledProblem) -> float:
    """First eigenvalue of the regional operator: smallest eigenvalue of ``(A, M)``."""
    return smallest_generalized_eig(prob.A, prob.M)[0]


def lambda_star_pencil(prob: AssembledProblem) -> float:
    """Smallest eigenvalue of ``(A - h B, M)`` with ``h`` the half-space constant."""
    return smallest_generalized_eig(prob.A - h_ns(prob.params) * prob.B, prob.M)[0]


def default_tol(lambda1: float) -> float:
    return 1e-8 * max(1.0, abs(lambda1))


def lambda_star_bisect(prob: AssembledProblem, tol: float | None = None,
                       lambda1: float | None = None) -> float:
    """Root of ``J(lam) = h`` by bisection on the strictly decreasing discrete curve."""
    h = h_ns(prob.params)
    hi = first_eigenvalue(prob) if lambda1 is None else lambda1
    tol = default_tol(hi) if tol is None else tol
    if tol <= 0:
        raise SpectralError("tolerance must be positive")
    lo = 0.0
    if j_lambda(prob, lo) <= h:
        lo = -1.0
        while j_lambda(prob, lo) <= h:
            lo *= 2.0
            if lo < _BRACKET_LIMIT:
                raise SpectralError("no bracket for J = h above -1e6; check the Hardy constant")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if j_lambda(prob, mid) > h:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def chebyshev_grid(a: float, b: float, n: int = N_CURVE) -> np.ndarray:
    """Chebyshev-Lobatto points on ``[a, b]`` in increasing order (endpoints included)."""
    k = np.arange(n)
    x = -np.cos(np.pi * k / (n - 1))
    return 0.5 * (a + b) + 0.5 * (b - a) * x


def j_curve(prob: AssembledProblem, lambdas=None, lambda1: float | None = None) -> list[tuple[float, float]]:
    """``(lam, J(lam))`` pairs, by default on 33 Chebyshev points of ``[-2 lambda_1, lambda_1]``."""
    if lambdas is None:
        l1 = first_eigenvalue(prob) if lambda1 is None else lambda1
        lambdas = chebyshev_grid(-2.0 * l1, l1)
    return [(float(l), j_lambda(prob, float(l))) for l in lambdas]


@dataclass
class HardyReport:
    mu_discrete: float
    lambda1_discrete: float
    lambda_star_pencil: float
    lambda_star_bisect: float
    j_curve: list = field(default_factory=list)
    h_reference: float = 0.0
    a_bound: float | None = None
    N: int = 1
    s: float = 0.75
    upper_bound: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["j_curve"] = [list(p) for p in self.j_curve]
        return d


def hardy_report(prob: AssembledProblem, convex: bool, lambdas=None, tol: float | None = None) -> HardyReport:
    p = prob.params
    l1 = first_eigenvalue(prob)
    curve = j_curve(prob, lambdas, lambda1=l1)
    a_bound = a_ns(p) * prob.domain_volume ** (-2 * p.s / p.N) if convex else None
    return HardyReport(
        mu_discrete=mu_estimate(prob),
        lambda1_discrete=l1,
        lambda_star_pencil=lambda_star_pencil(prob),
        lambda_star_bisect=lambda_star_bisect(prob, tol, lambda1=l1),
        j_curve=curve,
        h_reference=h_ns(p),
        a_bound=a_bound,
        N=p.N,
        s=p.s,
    )
