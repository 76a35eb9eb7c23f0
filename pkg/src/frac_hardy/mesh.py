"""Simplicial meshes of intervals and planar domains."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from frac_hardy.geometry import Disk, Domain, GeometryError, Interval, Polygon

__all__ = ["Mesh", "MeshError", "mesh_interval", "mesh_domain_2d", "ear_clip"]


class MeshError(ValueError):
    """Mesh construction failed or the mesh violates an invariant."""


@dataclass(frozen=True, eq=False)
class Mesh:
    nodes: np.ndarray
    elements: np.ndarray
    boundary: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim == 1:
            nodes = nodes[:, None]
        elements = np.array(self.elements, dtype=np.int64)
        boundary = np.array(self.boundary, dtype=bool)
        dim = nodes.shape[1]
        if elements.shape[1] != dim + 1:
            raise MeshError("elements must be simplices of the node dimension")
        if len(boundary) != len(nodes):
            raise MeshError("boundary flags must match nodes")
        if dim == 1:
            left, right = nodes[elements[:, 0], 0], nodes[elements[:, 1], 0]
            flip = right < left
        else:
            flip = self._signed_areas(nodes, elements) < 0
        if np.any(flip):
            elements = elements.copy()
            elements[flip, -2:] = elements[flip, -2:][:, ::-1]
        for arr in (nodes, elements, boundary):
            arr.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "boundary", boundary)
        if np.any(self.volumes <= 0):
            raise MeshError("mesh contains degenerate elements")

    @staticmethod
    def _signed_areas(nodes, elements):
        a, b, c = (nodes[elements[:, k]] for k in range(3))
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def interior_nodes(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    @property
    def interior_index(self) -> np.ndarray:
        """Dense renumbering of interior nodes; boundary nodes map to -1."""
        idx = np.full(self.n_nodes, -1, dtype=np.int64)
        idx[self.interior_nodes] = np.arange(len(self.interior_nodes))
        return idx

    @property
    def volumes(self) -> np.ndarray:
        if self.dim == 1:
            return self.nodes[self.elements[:, 1], 0] - self.nodes[self.elements[:, 0], 0]
        return self._signed_areas(self.nodes, self.elements)

    @property
    def diameters(self) -> np.ndarray:
        P = self.nodes[self.elements]
        if self.dim == 1:
            return np.abs(P[:, 1, 0] - P[:, 0, 0])
        edges = [np.linalg.norm(P[:, i] - P[:, j], axis=1) for i, j in ((0, 1), (1, 2), (2, 0))]
        return np.max(edges, axis=0)

    @property
    def shape_ratio(self) -> float:
        """Largest ``diameter / inradius`` (2 for every 1D element)."""
        if self.dim == 1:
            return 2.0
        P = self.nodes[self.elements]
        perim = sum(np.linalg.norm(P[:, i] - P[:, j], axis=1) for i, j in ((0, 1), (1, 2), (2, 0)))
        inradius = 2 * self.volumes / perim
        return float(np.max(self.diameters / inradius))

    def barycentric_gradients(self) -> np.ndarray:
        """Gradients of the nodal basis on every element, shape ``(m, dim+1, dim)``."""
        P = self.nodes[self.elements]
        if self.dim == 1:
            h = (P[:, 1, 0] - P[:, 0, 0])[:, None]
            return np.stack([-1.0 / h, 1.0 / h], axis=1)
        J = np.stack([P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]], axis=2)  # columns
        Jinv_t = np.linalg.inv(J).transpose(0, 2, 1)
        ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        return np.einsum("kd,med->mke", ref, Jinv_t)

    def scaled(self, r: float) -> "Mesh":
        return Mesh(r * self.nodes, self.elements, self.boundary)

    def check(self, max_shape_ratio: float = 60.0) -> "Mesh":
        if self.shape_ratio > max_shape_ratio:
            raise MeshError(f"shape ratio {self.shape_ratio:.1f} exceeds {max_shape_ratio}")
        return self


def mesh_interval(n: int, a: float = 0.0, b: float = 1.0) -> Mesh:
    """Uniform mesh of ``(a, b)`` with ``n`` elements."""
    if int(n) != n or n < 4:
        raise MeshError("interval mesh needs n >= 4 elements")
    n = int(n)
    nodes = a + (b - a) * np.arange(n + 1) / n
    elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
    boundary = np.zeros(n + 1, dtype=bool)
    boundary[[0, -1]] = True
    return Mesh(nodes[:, None], elements, boundary)


# ---------------------------------------------------------------------------
# planar meshes
# ---------------------------------------------------------------------------


def _is_axis_rectangle(poly: Polygon) -> bool:
    V = poly.vertices
    if len(V) != 4:
        return False
    lo, hi = V.min(axis=0), V.max(axis=0)
    corners = {(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])}
    return {tuple(v) for v in V} == corners


def _rectangle_mesh(poly: Polygon, h: float) -> Mesh:
    lo, hi = poly.vertices.min(axis=0), poly.vertices.max(axis=0)
    nx = max(1, math.ceil((hi[0] - lo[0]) / h - 1e-9))
    ny = max(1, math.ceil((hi[1] - lo[1]) / h - 1e-9))
    xs = lo[0] + (hi[0] - lo[0]) * np.arange(nx + 1) / nx
    ys = lo[1] + (hi[1] - lo[1]) * np.arange(ny + 1) / ny
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    idx = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    v00 = idx[:-1, :-1].ravel()
    v10 = idx[:-1, 1:].ravel()
    v01 = idx[1:, :-1].ravel()
    v11 = idx[1:, 1:].ravel()
    elements = np.vstack([np.column_stack([v00, v10, v11]), np.column_stack([v00, v11, v01])])
    ii, jj = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="xy")
    boundary = ((ii == 0) | (ii == nx) | (jj == 0) | (jj == ny)).ravel()
    return Mesh(nodes, elements, boundary)


def _disk_mesh(disk: Disk, h: float) -> Mesh:
    rings = max(2, math.ceil(disk.radius / h - 1e-9))
    nodes = [disk.center[None, :]]
    ring_index = [np.array([0])]
    start = 1
    for k in range(1, rings + 1):
        count = 6 * k
        th = 2 * np.pi * np.arange(count) / count
        r = disk.radius * k / rings
        nodes.append(disk.center + r * np.column_stack([np.cos(th), np.sin(th)]))
        ring_index.append(start + np.arange(count))
        start += count
    nodes = np.vstack(nodes)
    tris = [(0, int(ring_index[1][i]), int(ring_index[1][(i + 1) % 6])) for i in range(6)]
    for k in range(1, rings):
        inner, outer = ring_index[k], ring_index[k + 1]
        na, nb = len(inner), len(outer)
        i = j = 0
        while i < na or j < nb:
            # advance along whichever ring has the smaller next angle
            next_a = (i + 1) / na
            next_b = (j + 1) / nb
            if j < nb and (i >= na or next_b <= next_a):
                tris.append((int(inner[i % na]), int(outer[j % nb]), int(outer[(j + 1) % nb])))
                j += 1
            else:
                tris.append((int(inner[i % na]), int(outer[j % nb]), int(inner[(i + 1) % na])))
                i += 1
    boundary = np.zeros(len(nodes), dtype=bool)
    boundary[ring_index[-1]] = True
    return Mesh(nodes, np.array(tris), boundary)


def ear_clip(vertices: np.ndarray) -> np.ndarray:
    """Triangulate a simple counter-clockwise polygon by ear clipping."""
    V = np.asarray(vertices, dtype=float)
    remaining = list(range(len(V)))
    tris = []
    guard = 0
    while len(remaining) > 3:
        guard += 1
        if guard > 10 * len(V) ** 2:
            raise MeshError("ear clipping failed; polygon may be degenerate")
        best = None
        for k in range(len(remaining)):
            i0, i1, i2 = remaining[k - 1], remaining[k], remaining[(k + 1) % len(remaining)]
            a, b, c = V[i0], V[i1], V[i2]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if cross <= 1e-14:
                continue
            others = [V[j] for j in remaining if j not in (i0, i1, i2)]
            if any(_in_triangle(p, a, b, c) for p in others):
                continue
            # prefer the best-shaped ear for mesh quality
            quality = cross / max(np.sum((b - a) ** 2), np.sum((c - b) ** 2), np.sum((a - c) ** 2))
            if best is None or quality > best[0] + 1e-12:
                best = (quality, k, (i0, i1, i2))
        if best is None:
            raise MeshError("no ear found; polygon may be degenerate")
        tris.append(best[2])
        remaining.pop(best[1])
    tris.append(tuple(remaining))
    return np.array(tris, dtype=np.int64)


def _in_triangle(p, a, b, c) -> bool:
    def side(u, v, w):
        return (v[0] - u[0]) * (w[1] - u[1]) - (v[1] - u[1]) * (w[0] - u[0])

    return side(a, b, p) >= -1e-14 and side(b, c, p) >= -1e-14 and side(c, a, p) >= -1e-14


def _refine(nodes: np.ndarray, tris: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    nodes = list(map(tuple, nodes))
    midpoint: dict[tuple[int, int], int] = {}

    def mid(i, j):
        key = (min(i, j), max(i, j))
        if key not in midpoint:
            a, b = nodes[i], nodes[j]
            nodes.append(((a[0] + b[0]) / 2, (a[1] + b[1]) / 2))
            midpoint[key] = len(nodes) - 1
        return midpoint[key]

    out = []
    for a, b, c in tris:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    return np.array(nodes), np.array(out, dtype=np.int64)


def _polygon_mesh(poly: Polygon, h: float) -> Mesh:
    nodes = poly.vertices.copy()
    tris = ear_clip(nodes)
    while True:
        P = nodes[tris]
        longest = max(np.max(np.linalg.norm(P[:, i] - P[:, j], axis=1)) for i, j in ((0, 1), (1, 2), (2, 0)))
        if longest <= h * (1 + 1e-9):
            break
        nodes, tris = _refine(nodes, tris)
    boundary = poly._delta(nodes) <= 1e-12 * max(1.0, poly.diameter)
    return Mesh(nodes, tris, boundary)


def mesh_domain_2d(d: Domain, h: float) -> Mesh:
    """Triangulate a polygon or disk with mesh size about ``h``.

    Axis-aligned rectangles and disks get structured meshes; any other
    polygon is ear-clipped and then refined uniformly until every edge is at
    most ``h`` long.
    """
    if isinstance(d, Interval) or d.dim != 2:
        raise MeshError("mesh_domain_2d needs a planar domain; use mesh_interval for intervals")
    if not (h > 0) or h > d.diameter / 4 + 1e-12:
        raise MeshError(f"mesh size h={h} must satisfy 0 < h <= diam/4 = {d.diameter / 4}")
    if isinstance(d, Disk):
        return _disk_mesh(d, h)
    if isinstance(d, Polygon):
        if _is_axis_rectangle(d):
            return _rectangle_mesh(d, h)
        try:
            return _polygon_mesh(d, h)
        except GeometryError as exc:
            raise MeshError(str(exc)) from exc
    raise MeshError(f"cannot mesh domain of type {type(d).__name__}")

