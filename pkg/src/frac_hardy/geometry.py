"""Bounded domains, ray sections and directional weights.

A domain answers three kinds of queries: the boundary distance ``delta``,
the full section of a line through a point (``ray_trace``), and a
vectorised directional profile (first exit times in both directions and the
extreme reach) used by the directional means ``m2s``/``M2s`` and the
star-kernel volume ``|Omega_x|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from frac_hardy.special_constants import FracParams, cos_moment, sphere_area

__all__ = [
    "GeometryError",
    "NonSimplePolygonError",
    "RadiusError",
    "NonConvexError",
    "Domain",
    "Interval",
    "Polygon",
    "ConvexPolygon",
    "Disk",
    "RayTrace",
    "DirectionalQuadrature",
    "directional_quadrature",
    "delta",
    "ray_trace",
    "directional_profile",
    "omega_x_volume",
    "m2s",
    "M2s",
    "unit_square",
]

TANGENT_TOL = 1e-12
TANGENT_NUDGE = 1e-9
BOUNDARY_TOL = 1e-12


class GeometryError(ValueError):
    """Invalid domain description or a query outside the domain."""


class NonSimplePolygonError(GeometryError):
    """Polygon edges cross, or vertices repeat."""


class RadiusError(GeometryError):
    """Disk radius is not a positive finite number."""


class NonConvexError(GeometryError):
    """Vertices declared convex are not."""


@dataclass(frozen=True)
class RayTrace:
    """Section ``{t : x + t nu in Omega}`` as ordered disjoint open intervals."""

    intervals: tuple[tuple[float, float], ...]

    def _home(self) -> tuple[float, float]:
        for lo, hi in self.intervals:
            if lo < 0.0 < hi:
                return lo, hi
        raise GeometryError("ray origin is not inside the domain")

    @property
    def tau(self) -> float:
        """First exit time in the forward direction."""
        return self._home()[1]

    @property
    def tau_back(self) -> float:
        """First exit time in the backward direction ``-nu``."""
        return -self._home()[0]

    @property
    def d(self) -> float:
        return min(self.tau, self.tau_back)

    @property
    def chord(self) -> float:
        """``D_nu``: length of the chord through the origin."""
        return self.tau + self.tau_back

    @property
    def reach(self) -> float:
        """``sup{|t| : x + t nu in Omega}`` over every interval of the section."""
        return max(max(abs(lo), abs(hi)) for lo, hi in self.intervals)


class Domain:
    """Common interface; concrete shapes are immutable dataclasses."""

    dim: int

    # -- required by subclasses -------------------------------------------
    def _delta(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, X) -> np.ndarray:
        raise NotImplementedError

    def _trace(self, x: np.ndarray, nu: np.ndarray) -> list[tuple[float, float]]:
        raise NotImplementedError

    def _hits(self, X: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """First and last boundary hit times along ``V`` for every point in ``X``."""
        raise NotImplementedError

    @property
    def volume(self) -> float:
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    @property
    def is_convex(self) -> bool:
        raise NotImplementedError

    def scaled(self, r: float) -> "Domain":
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    def sample_boundary(self, n: int) -> np.ndarray:
        raise NotImplementedError

    # -- shared -------------------------------------------------------------
    def as_points(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.dim == 1 and X.ndim <= 1:
            X = X.reshape(-1, 1)
        X = np.atleast_2d(X)
        if X.shape[1] != self.dim:
            raise GeometryError(f"expected points of dimension {self.dim}, got shape {X.shape}")
        return X

    def delta(self, X) -> np.ndarray:
        X = self.as_points(X)
        inside = self.contains(X)
        dist = self._delta(X)
        bad = ~inside & (dist > BOUNDARY_TOL)
        if np.any(bad):
            raise GeometryError(f"point {X[np.argmax(bad)].tolist()} lies outside the closure of the domain")
        return np.where(inside, dist, 0.0)

    def sample_interior(self, n: int, rng: np.random.Generator, margin: float = 0.0) -> np.ndarray:
        """Uniform rejection samples with ``delta > margin``."""
        lo, hi = self.bounding_box()
        out = []
        count = 0
        while count < n:
            cand = lo + (hi - lo) * rng.random((max(4 * n, 64), self.dim))
            keep = cand[self.contains(cand)]
            if margin > 0 and len(keep):
                keep = keep[self._delta(keep) > margin]
            out.append(keep)
            count += len(keep)
        return np.vstack(out)[:n]

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Interval
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval(Domain):
    a: float = 0.0
    b: float = 1.0
    dim: int = field(default=1, init=False, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.a < self.b:
            raise GeometryError("interval requires finite a < b")

    def contains(self, X) -> np.ndarray:
        X = self.as_points(X)
        return (X[:, 0] > self.a) & (X[:, 0] < self.b)

    def _delta(self, X):
        return np.abs(np.minimum(X[:, 0] - self.a, self.b - X[:, 0]))

    def _trace(self, x, nu):
        direction = nu[0]
        if abs(abs(direction) - 1.0) > 1e-12:
            raise GeometryError("in one dimension nu must be +1 or -1")
        if direction > 0:
            return [(self.a - x[0], self.b - x[0])]
        return [(x[0] - self.b, x[0] - self.a)]

    def _hits(self, X, V):
        fwd = np.where(V[None, :, 0] > 0, self.b - X[:, :1], X[:, :1] - self.a)
        return fwd, fwd

    @property
    def volume(self):
        return self.b - self.a

    @property
    def diameter(self):
        return self.b - self.a

    @property
    def is_convex(self):
        return True

    def scaled(self, r):
        return Interval(r * self.a, r * self.b)

    def to_spec(self):
        return {"type": "interval", "a": self.a, "b": self.b}

    def sample_boundary(self, n):
        return np.array([[self.a], [self.b]])

    def bounding_box(self):
        return np.array([self.a]), np.array([self.b])


# ---------------------------------------------------------------------------
# Polygons
# ---------------------------------------------------------------------------


def _signed_area(V: np.ndarray) -> float:
    x, y = V[:, 0], V[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = _cross(q2 - q1, p1 - q1)
    d2 = _cross(q2 - q1, p2 - q1)
    d3 = _cross(p2 - p1, q1 - p1)
    d4 = _cross(p2 - p1, q2 - p1)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 * d2 < 0 and d3 * d4 < 0:
        return True
    # collinear overlap
    if abs(d1) < 1e-14 and abs(d2) < 1e-14:
        t = np.dot(p2 - p1, p2 - p1)
        s0 = np.dot(q1 - p1, p2 - p1) / t
        s1 = np.dot(q2 - p1, p2 - p1) / t
        return max(min(s0, s1), 0.0) < min(max(s0, s1), 1.0) - 1e-12
    return False


@dataclass(frozen=True, eq=False)
class Polygon(Domain):
    """Simple polygon; vertices are stored counter-clockwise."""

    vertices: np.ndarray
    dim: int = field(default=2, init=False, repr=False)

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or len(V) < 3:
            raise GeometryError("polygon needs at least 3 vertices in the plane")
        if not np.all(np.isfinite(V)):
            raise GeometryError("polygon vertices must be finite")
        if np.any(np.linalg.norm(np.roll(V, -1, axis=0) - V, axis=1) < 1e-14):
            raise NonSimplePolygonError("polygon has repeated vertices")
        n = len(V)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_intersect(V[i], V[(i + 1) % n], V[j], V[(j + 1) % n]):
                    raise NonSimplePolygonError("polygon is not simple (edges intersect)")
        area = _signed_area(V)
        if abs(area) < 1e-14:
            raise GeometryError("degenerate polygon with zero area")
        if area < 0:
            V = V[::-1].copy()
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)

    def __eq__(self, other):
        return type(self) is type(other) and np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash((type(self).__name__, self.vertices.tobytes()))

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        P = self.vertices
        return P, np.roll(P, -1, axis=0)

    @property
    def turn_cross(self) -> np.ndarray:
        P = self.vertices
        e_in = P - np.roll(P, 1, axis=0)
        e_out = np.roll(P, -1, axis=0) - P
        return _cross(e_in, e_out)

    @property
    def is_convex(self) -> bool:
        scale = self.diameter ** 2
        return bool(np.all(self.turn_cross >= -1e-12 * scale))

    @property
    def strictly_convex(self) -> bool:
        scale = self.diameter ** 2
        return bool(np.all(self.turn_cross > 1e-12 * scale))

    @property
    def volume(self):
        return _signed_area(self.vertices)

    @property
    def diameter(self):
        P = self.vertices
        return float(np.max(np.linalg.norm(P[:, None, :] - P[None, :, :], axis=-1)))

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def contains(self, X) -> np.ndarray:
        X = self.as_points(X)
        P, Q = self.edges
        x, y = X[:, 0:1], X[:, 1:2]
        py, qy = P[None, :, 1], Q[None, :, 1]
        straddle = (py > y) != (qy > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = P[None, :, 0] + (y - py) * (Q[None, :, 0] - P[None, :, 0]) / (qy - py)
        crossings = np.sum(straddle & (x < xint), axis=1)
        inside = (crossings % 2) == 1
        return inside & (self._delta(X) > 0.0)

    def _delta(self, X):
        P, Q = self.edges
        E = Q - P
        L2 = np.sum(E * E, axis=1)
        rel = X[:, None, :] - P[None, :, :]
        t = np.clip(np.sum(rel * E[None], axis=2) / L2[None], 0.0, 1.0)
        closest = P[None] + t[..., None] * E[None]
        return np.min(np.linalg.norm(X[:, None, :] - closest, axis=2), axis=1)

    def _line_hits(self, x, nu):
        """Crossing parameters of the line ``x + t nu`` with every edge."""
        P, Q = self.edges
        E = Q - P
        denom = _cross(nu[None, :], E)
        rel = P - x[None, :]
        scale = np.linalg.norm(E, axis=1)
        parallel = np.abs(denom) < TANGENT_TOL * scale
        if np.any(parallel & (np.abs(_cross(rel, nu[None, :])) < TANGENT_TOL * max(1.0, self.diameter))):
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            t = _cross(rel, E) / denom
            u = _cross(rel, nu[None, :]) / denom
        ok = ~parallel & (u >= -1e-14) & (u <= 1 + 1e-14)
        return np.sort(t[ok])

    def _trace(self, x, nu):
        hits = self._line_hits(x, nu)
        tries = 0
        while hits is None:
            tries += 1
            if tries > 8:
                raise GeometryError("ray stays tangent to an edge after repeated nudging")
            angle = TANGENT_NUDGE * tries
            c, s = math.cos(angle), math.sin(angle)
            nu = np.array([c * nu[0] - s * nu[1], s * nu[0] + c * nu[1]])
            hits = self._line_hits(x, nu)
        ts = np.unique(np.concatenate([hits, [0.0]]))
        mids = 0.5 * (ts[:-1] + ts[1:])
        inside = self.contains(x[None, :] + mids[:, None] * nu[None, :]) if len(mids) else np.zeros(0, bool)
        intervals: list[tuple[float, float]] = []
        for lo, hi, flag in zip(ts[:-1], ts[1:], inside):
            if not flag:
                continue
            # 0 is an artificial breakpoint, never a boundary hit
            if intervals and intervals[-1][1] == lo == 0.0:
                intervals[-1] = (intervals[-1][0], hi)
            else:
                intervals.append((lo, hi))
        return intervals

    def _hits(self, X, V):
        P, Q = self.edges
        E = Q - P
        denom = _cross(V[:, None, :], E[None, :, :])  # (K, E)
        rel = P[None, :, :] - X[:, None, :]  # (n, E, 2)
        num_t = _cross(rel[:, None, :, :], E[None, None, :, :])  # (n, 1, E)
        num_u = _cross(rel[:, None, :, :], V[None, :, None, :])  # (n, K, E)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = num_t / denom[None]
            u = num_u / denom[None]
        valid = (np.abs(denom[None]) > 0) & (u >= -1e-14) & (u <= 1 + 1e-14) & (t > 0)
        first = np.min(np.where(valid, t, np.inf), axis=2)
        last = np.max(np.where(valid, t, -np.inf), axis=2)
        return first, last

    def scaled(self, r):
        return type(self)(r * self.vertices)

    def to_spec(self):
        return {"type": "polygon", "vertices": self.vertices.tolist()}

    def sample_boundary(self, n):
        P, Q = self.edges
        lengths = np.linalg.norm(Q - P, axis=1)
        counts = np.maximum(1, np.round(n * lengths / lengths.sum()).astype(int))
        pts = [P[i] + np.linspace(0.0, 1.0, c, endpoint=False)[:, None] * (Q[i] - P[i]) for i, c in enumerate(counts)]
        return np.vstack(pts)


@dataclass(frozen=True, eq=False)
class ConvexPolygon(Polygon):
    """Convex polygon; first exits are computed against supporting half-planes."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_convex:
            raise NonConvexError("vertices do not describe a convex polygon")

    def to_spec(self):
        return {"type": "convex_polygon", "vertices": self.vertices.tolist()}

    def _hits(self, X, V):
        P, Q = self.edges
        E = Q - P
        normals = np.column_stack([E[:, 1], -E[:, 0]]) / np.linalg.norm(E, axis=1)[:, None]
        offsets = np.sum(normals * P, axis=1)
        slack = offsets[None, :] - X @ normals.T  # (n, E) >= 0 inside
        speed = V @ normals.T  # (K, E)
        with np.errstate(divide="ignore"):
            t = np.where(speed[None] > 0, slack[:, None, :] / speed[None], np.inf)
        first = np.min(t, axis=2)
        return first, first


def unit_square() -> ConvexPolygon:
    return ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


# ---------------------------------------------------------------------------
# Disk
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Disk(Domain):
    center: np.ndarray
    radius: float
    dim: int = field(default=2, init=False, repr=False)

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(-1)
        if c.shape != (2,) or not np.all(np.isfinite(c)):
            raise GeometryError("disk center must be a finite point in the plane")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise RadiusError("radius must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    def __eq__(self, other):
        return isinstance(other, Disk) and np.array_equal(self.center, other.center) and self.radius == other.radius

    def __hash__(self):
        return hash(("Disk", self.center.tobytes(), self.radius))

    def contains(self, X):
        X = self.as_points(X)
        return np.linalg.norm(X - self.center, axis=1) < self.radius

    def _delta(self, X):
        return np.abs(self.radius - np.linalg.norm(X - self.center, axis=1))

    def _roots(self, X, V):
        rel = X - self.center
        b = V @ rel.T  # (K, n)
        c = np.sum(rel * rel, axis=1) - self.radius**2
        disc = np.sqrt(np.maximum(b * b - c[None, :], 0.0))
        return (-b + disc).T, (-b - disc).T

    def _trace(self, x, nu):
        fwd, back = self._roots(x[None, :], nu[None, :])
        return [(float(back[0, 0]), float(fwd[0, 0]))]

    def _hits(self, X, V):
        fwd, _ = self._roots(X, V)
        return fwd, fwd

    @property
    def volume(self):
        return math.pi * self.radius**2

    @property
    def diameter(self):
        return 2 * self.radius

    @property
    def is_convex(self):
        return True

    def scaled(self, r):
        return Disk(r * self.center, r * self.radius)

    def to_spec(self):
        return {"type": "disk", "center": self.center.tolist(), "radius": self.radius}

    def sample_boundary(self, n):
        th = 2 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.column_stack([np.cos(th), np.sin(th)])

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


# ---------------------------------------------------------------------------
# Directional quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DirectionalQuadrature:
    """Nodes on the unit sphere with weights of the normalised measure."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(nodes) != len(weights):
            raise GeometryError("nodes and weights differ in length")
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise GeometryError("weights must be positive and sum to 1")
        if np.any(np.abs(np.linalg.norm(nodes, axis=1) - 1.0) > 1e-12):
            raise GeometryError("nodes must be unit vectors")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Weighted sum over the last axis."""
        return np.asarray(values) @ self.weights


def directional_quadrature(N: int, n: int = 400, kind: str | None = None, seed: int = 0,
                           offset: float = 0.0) -> DirectionalQuadrature:
    """Quadrature for ``d omega`` on ``S^{N-1}``.

    N = 1: the exact pair ``{+1, -1}``.  N = 2: ``n``-point trapezoid rule in
    the angle (rotated by ``offset`` grid steps).  N = 3: ``kind="monte_carlo"``
    (default, ``n`` seeded samples) or ``kind="product"`` (Gauss-Legendre in
    the polar cosine, split at the equator, times an ``n``-point trapezoid in
    the azimuth).
    """
    if N == 1:
        return DirectionalQuadrature(np.array([[1.0], [-1.0]]), np.array([0.5, 0.5]))
    if N == 2:
        th = 2 * np.pi * (np.arange(n) + offset) / n
        return DirectionalQuadrature(np.column_stack([np.cos(th), np.sin(th)]), np.full(n, 1.0 / n))
    if N == 3:
        kind = kind or "monte_carlo"
        if kind == "monte_carlo":
            g = np.random.default_rng(seed).standard_normal((n, 3))
            return DirectionalQuadrature(g / np.linalg.norm(g, axis=1, keepdims=True), np.full(n, 1.0 / n))
        if kind == "product":
            m = max(n // 4, 8)
            x, w = np.polynomial.legendre.leggauss(m)
            z = np.concatenate([0.5 * (x - 1), 0.5 * (x + 1)])
            wz = np.concatenate([0.5 * w, 0.5 * w]) / 2.0
            phi = 2 * np.pi * (np.arange(n) + offset) / n
            Z, PH = np.meshgrid(z, phi, indexing="ij")
            rho = np.sqrt(1 - Z**2)
            nodes = np.column_stack([(rho * np.cos(PH)).ravel(), (rho * np.sin(PH)).ravel(), Z.ravel()])
            weights = (wz[:, None] * np.full(n, 1.0 / n)[None, :]).ravel()
            return DirectionalQuadrature(nodes, weights / weights.sum())
        raise GeometryError(f"unknown quadrature kind {kind!r}")
    raise GeometryError("directional quadrature is provided for N in {1, 2, 3}")


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------


def delta(d: Domain, x) -> np.ndarray | float:
    """Euclidean distance to the boundary; scalar in, scalar out."""
    X = d.as_points(x)
    out = d.delta(X)
    if np.ndim(x) == 0 or (d.dim > 1 and np.ndim(x) == 1):
        return float(out[0])
    return out


def ray_trace(d: Domain, x, nu) -> RayTrace:
    x = np.asarray(x, dtype=float).reshape(-1)
    nu = np.asarray(nu, dtype=float).reshape(-1)
    if len(x) != d.dim or len(nu) != d.dim:
        raise GeometryError("point and direction must match the domain dimension")
    if abs(np.linalg.norm(nu) - 1.0) > 1e-9:
        raise GeometryError("direction must be a unit vector")
    if not d.contains(x[None, :])[0]:
        raise GeometryError("ray origin must lie inside the domain")
    return RayTrace(tuple((float(lo), float(hi)) for lo, hi in d._trace(x, nu)))


@dataclass(frozen=True)
class DirectionalProfile:
    """Per-point, per-direction line data; arrays have shape ``(n_points, n_dirs)``."""

    tau: np.ndarray
    tau_back: np.ndarray
    reach: np.ndarray

    @property
    def d(self):
        return np.minimum(self.tau, self.tau_back)

    @property
    def chord(self):
        return self.tau + self.tau_back


def directional_profile(d: Domain, X, q: DirectionalQuadrature) -> DirectionalProfile:
    X = d.as_points(X)
    if q.dim != d.dim:
        raise GeometryError("quadrature dimension differs from domain dimension")
    if not np.all(d.contains(X)):
        raise GeometryError("all points must lie inside the domain")
    f_first, f_last = d._hits(X, q.nodes)
    b_first, b_last = d._hits(X, -q.nodes)
    return DirectionalProfile(f_first, b_first, np.maximum(f_last, b_last))


def _interior(d: Domain, X) -> np.ndarray:
    X = d.as_points(X)
    if np.any(d.delta(X) <= BOUNDARY_TOL):
        raise GeometryError("directional weights need points strictly inside the domain")
    return X


def omega_x_volume(d: Domain, x, q: DirectionalQuadrature) -> np.ndarray | float:
    """Volume of the star-shaped kernel seen from ``x`` (first exit times)."""
    X = _interior(d, x)
    prof = directional_profile(d, X, q)
    N = d.dim
    vol = sphere_area(N) / N * q.integrate(prof.tau**N)
    return float(vol[0]) if np.ndim(x) <= (0 if d.dim == 1 else 1) else vol


def _mean_power(values: np.ndarray, q: DirectionalQuadrature, s: float) -> np.ndarray:
    return q.integrate(values ** (2 * s))


def m2s(d: Domain, x, p: FracParams, q: DirectionalQuadrature):
    """Directional harmonic-type mean of the two-sided distance ``d_nu``."""
    p.require_open()
    X = _interior(d, x)
    prof = directional_profile(d, X, q)
    s = p.s
    val = cos_moment(p) ** (1 / (2 * s)) * _mean_power(1.0 / prof.d, q, s) ** (-1 / (2 * s))
    return float(val[0]) if np.ndim(x) <= (0 if d.dim == 1 else 1) else val


def M2s(d: Domain, x, p: FracParams, q: DirectionalQuadrature):
    """Like :func:`m2s` with integrand ``(1/d_nu + 1/reach_nu)^{2s}``; never exceeds it."""
    p.require_open()
    X = _interior(d, x)
    prof = directional_profile(d, X, q)
    s = p.s
    val = cos_moment(p) ** (1 / (2 * s)) * _mean_power(1.0 / prof.d + 1.0 / prof.reach, q, s) ** (-1 / (2 * s))
    return float(val[0]) if np.ndim(x) <= (0 if d.dim == 1 else 1) else val
