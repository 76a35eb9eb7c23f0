"""Assembly of the regional Gagliardo form, the Hardy-weighted mass and the mass matrix.

All forms are assembled over continuous piecewise-linear functions.  The
Gagliardo form couples every pair of elements, so matrices are dense.
Element pairs are classified by the number of shared vertices:

* coincident pairs and pairs sharing a facet or a vertex use the
  relative-coordinate rules of :mod:`frac_hardy.quadrature`, in which the
  radial singularity is integrated in closed form;
* disjoint pairs use tensor Gauss rules, with a higher order when the two
  elements are closer than an element diameter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from frac_hardy.geometry import Domain
from frac_hardy.mesh import Mesh
from frac_hardy.quadrature import (
    coincident_rule,
    edge_adjacent_rule,
    gauss_legendre,
    geometric_panels,
    triangle_rule,
    vertex_adjacent_rule,
)
from frac_hardy.special_constants import FracParams, c_ns

__all__ = [
    "QuadratureConfig",
    "AssembledProblem",
    "AssemblyError",
    "assemble_gagliardo",
    "assemble_hardy_mass",
    "assemble_mass",
    "assemble_weighted_mass",
    "assemble_problem",
    "seminorm_in_s",
    "write_matrix",
    "read_matrix",
    "ASM_TOL_FACTOR",
]

ASM_TOL_FACTOR = 1e-8
_CHUNK = 4096


class AssemblyError(ValueError):
    """Invalid assembly request."""


@dataclass(frozen=True)
class QuadratureConfig:
    singular_order: int = 4
    far_order: int = 3
    near_order: int = 5
    grading_levels: int = 12
    grading_ratio: float = 0.5
    panel_order: int = 4
    smooth_order: int = 5

    def __post_init__(self):
        if self.singular_order < 2:
            raise AssemblyError("singular transform order must be at least 2")
        if self.grading_levels < 4:
            raise AssemblyError("grading_levels must be at least 4")
        if min(self.far_order, self.near_order, self.panel_order, self.smooth_order) < 1:
            raise AssemblyError("quadrature orders must be positive")


@dataclass(frozen=True, eq=False)
class AssembledProblem:
    """Gagliardo stiffness ``A``, Hardy mass ``B`` and mass ``M`` on interior nodes."""

    A: np.ndarray
    B: np.ndarray
    M: np.ndarray
    params: FracParams
    domain_volume: float
    mesh: Mesh | None = field(default=None, repr=False)
    domain: Domain | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.A.shape[0]

    def scaled(self, r: float) -> "AssembledProblem":
        """Exact triple on the dilated domain ``r * Omega``."""
        N, s = self.params.N, self.params.s
        f = r ** (N - 2 * s)
        return AssembledProblem(
            f * self.A,
            f * self.B,
            r**N * self.M,
            self.params,
            r**N * self.domain_volume,
            None if self.mesh is None else self.mesh.scaled(r),
            None if self.domain is None else self.domain.scaled(r),
        )


def _symmetrize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def _scatter(n: int, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray, out: np.ndarray) -> None:
    flat = (rows * n + cols).ravel()
    out += np.bincount(flat, weights=vals.ravel(), minlength=n * n).reshape(n, n)


# ---------------------------------------------------------------------------
# pair classification
# ---------------------------------------------------------------------------


def _pairs(mesh: Mesh):
    """Unordered distinct element pairs with the number of shared vertices."""
    m = len(mesh.elements)
    inc = np.zeros((m, mesh.n_nodes), dtype=np.int32)
    np.put_along_axis(inc, mesh.elements, 1, axis=1)
    shared = inc @ inc.T
    i, j = np.triu_indices(m, k=1)
    return i, j, shared[i, j]


def _near_mask(mesh: Mesh, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    P = mesh.nodes[mesh.elements]
    centroid = P.mean(axis=1)
    radius = np.max(np.linalg.norm(P - centroid[:, None, :], axis=2), axis=1)
    diam = mesh.diameters
    gap = np.linalg.norm(centroid[i] - centroid[j], axis=1) - radius[i] - radius[j]
    return gap < np.maximum(diam[i], diam[j])


# ---------------------------------------------------------------------------
# 1D Gagliardo form
# ---------------------------------------------------------------------------


def _gagliardo_1d(mesh: Mesh, s: float, q: QuadratureConfig) -> np.ndarray:
    n = mesh.n_nodes
    x = mesh.nodes[:, 0]
    el = mesh.elements
    h = x[el[:, 1]] - x[el[:, 0]]
    A = np.zeros((n, n))

    # coincident: (u(x)-u(y))^2 = g^2 (x-y)^2 on one element
    self_int = 2.0 * h ** (3 - 2 * s) / ((2 - 2 * s) * (3 - 2 * s))
    g = np.stack([-1.0 / h, 1.0 / h], axis=1)
    loc = self_int[:, None, None] * g[:, :, None] * g[:, None, :]
    _scatter(n, el[:, :, None].repeat(2, 2), el[:, None, :].repeat(2, 1), loc, A)

    i, j, shared = _pairs(mesh)

    # neighbours sharing a node: x = v - h1 p, y = v + h2 q with p, q in [0, 1]
    adj = shared == 1
    ia, ja = i[adj], j[adj]
    left = np.where(x[el[ia, 0]] < x[el[ja, 0]], ia, ja)
    right = np.where(left == ia, ja, ia)
    h1, h2 = h[left], h[right]
    t, w = gauss_legendre(q.singular_order + 4)
    # region p >= q: (p, q) = xi (1, t); region q > p: xi (t, 1); xi^{2-2s} exact
    pts = [(np.ones_like(t), t), (t, np.ones_like(t))]
    loc = np.zeros((len(ia), 3, 3))
    for pp, qq in pts:
        d = np.stack([np.broadcast_to(pp, t.shape), qq - pp, -qq], axis=-1)  # (K, 3)
        dist = h1[:, None] * pp[None, :] + h2[:, None] * qq[None, :]
        kw = w[None, :] * dist ** (-1 - 2 * s)
        loc += np.einsum("pk,ka,kb->pab", kw, d, d)
    loc *= (h1 * h2 / (3 - 2 * s))[:, None, None] * 2.0
    nodes3 = np.stack([el[left, 0], el[left, 1], el[right, 1]], axis=1)
    _scatter(n, nodes3[:, :, None].repeat(3, 2), nodes3[:, None, :].repeat(3, 1), loc, A)

    # disjoint pairs
    dis = shared == 0
    idx, jdx = i[dis], j[dis]
    near = _near_mask(mesh, idx, jdx)
    for mask, order in ((near, q.near_order), (~near, q.far_order)):
        _disjoint_pairs(mesh, idx[mask], jdx[mask], s, order, A)
    return A


# ---------------------------------------------------------------------------
# shared disjoint-pair kernel (1D and 2D)
# ---------------------------------------------------------------------------


def _element_rule(mesh: Mesh, order: int):
    """Physical points, weights and basis values of a per-element rule."""
    P = mesh.nodes[mesh.elements]
    if mesh.dim == 1:
        t, w = gauss_legendre(order)
        h = P[:, 1, 0] - P[:, 0, 0]
        X = P[:, 0, 0][:, None] + h[:, None] * t[None, :]
        W = h[:, None] * w[None, :]
        phi = np.stack([1 - t, t], axis=1)
        return X[..., None], W, phi
    pts, w = triangle_rule(order)
    A_, B_, C_ = P[:, 0], P[:, 1], P[:, 2]
    X = A_[:, None, :] + pts[None, :, :1] * (B_ - A_)[:, None, :] + pts[None, :, 1:] * (C_ - B_)[:, None, :]
    W = (2 * mesh.volumes)[:, None] * w[None, :]
    phi = np.column_stack([1 - pts[:, 0], pts[:, 0] - pts[:, 1], pts[:, 1]])
    return X, W, phi


def _disjoint_pairs(mesh: Mesh, i: np.ndarray, j: np.ndarray, s: float, order: int, A: np.ndarray) -> None:
    if len(i) == 0:
        return
    n = mesh.n_nodes
    X, W, phi = _element_rule(mesh, order)
    el = mesh.elements
    k = el.shape[1]
    expo = -(mesh.dim + 2 * s) / 2.0
    for start in range(0, len(i), _CHUNK):
        a, b = i[start : start + _CHUNK], j[start : start + _CHUNK]
        diff = X[a][:, :, None, :] - X[b][:, None, :, :]
        kern = np.sum(diff * diff, axis=-1) ** expo
        kw = kern * W[a][:, :, None] * W[b][:, None, :] * 2.0  # both orderings
        row = kw.sum(axis=2)
        col = kw.sum(axis=1)
        b11 = np.einsum("pi,ia,ib->pab", row, phi, phi)
        b22 = np.einsum("pj,ja,jb->pab", col, phi, phi)
        b12 = -np.einsum("pij,ia,jb->pab", kw, phi, phi)
        na, nb = el[a], el[b]
        for r, c, v in ((na, na, b11), (nb, nb, b22), (na, nb, b12), (nb, na, b12.transpose(0, 2, 1))):
            _scatter(n, r[:, :, None].repeat(k, 2), c[:, None, :].repeat(k, 1), v, A)


# ---------------------------------------------------------------------------
# 2D Gagliardo form
# ---------------------------------------------------------------------------


def _gagliardo_2d(mesh: Mesh, s: float, q: QuadratureConfig) -> np.ndarray:
    n = mesh.n_nodes
    el = mesh.elements
    P = mesh.nodes[el]
    area = mesh.volumes
    grads = mesh.barycentric_gradients()
    A = np.zeros((n, n))
    expo = -(2 + 2 * s) / 2.0

    # coincident: integrand depends on z = x - y only
    Z, W = coincident_rule(q.singular_order + 4, s)
    J = np.stack([P[:, 1] - P[:, 0], P[:, 2] - P[:, 1]], axis=2)  # columns B-A, C-B
    z = np.einsum("mdk,qk->mqd", J, Z)
    dots = np.einsum("mad,mqd->mqa", grads, z)
    kw = W[None, :] * np.sum(z * z, axis=-1) ** expo * (2 * area)[:, None] ** 2
    loc = np.einsum("mq,mqa,mqb->mab", kw, dots, dots)
    _scatter(n, el[:, :, None].repeat(3, 2), el[:, None, :].repeat(3, 1), loc, A)

    i, j, shared = _pairs(mesh)
    _edge_pairs(mesh, i[shared == 2], j[shared == 2], s, q, A)
    _vertex_pairs(mesh, i[shared == 1], j[shared == 1], s, q, A)
    dis = shared == 0
    idx, jdx = i[dis], j[dis]
    near = _near_mask(mesh, idx, jdx)
    for mask, order in ((near, q.near_order), (~near, q.far_order)):
        _disjoint_pairs(mesh, idx[mask], jdx[mask], s, order, A)
    return A


def _edge_pairs(mesh, i, j, s, q, A):
    if len(i) == 0:
        return
    n = mesh.n_nodes
    el = mesh.elements
    X = mesh.nodes
    ei, ej = el[i], el[j]
    in_j = (ei[:, :, None] == ej[:, None, :]).any(axis=2)  # (p, 3) vertex of i shared?
    in_i = (ej[:, :, None] == ei[:, None, :]).any(axis=2)
    sh = np.sort(np.where(in_j, ei, np.iinfo(np.int64).max), axis=1)[:, :2]
    a, b = sh[:, 0], sh[:, 1]
    c1 = ei[~in_j]
    c2 = ej[~in_i]
    R, W = edge_adjacent_rule(q.singular_order, s)
    d1, p2, q2 = R[:, 0], R[:, 1], R[:, 2]
    BA = X[b] - X[a]
    C1B = X[c1] - X[b]
    C2B = X[c2] - X[b]
    diff = d1[None, :, None] * BA[:, None, :] + p2[None, :, None] * C1B[:, None, :] - q2[None, :, None] * C2B[:, None, :]
    kern = np.sum(diff * diff, axis=-1) ** (-(2 + 2 * s) / 2.0)
    area = mesh.volumes
    kw = kern * W[None, :] * (4 * area[i] * area[j] * 2.0)[:, None]
    dvec = np.stack([-d1, d1 - p2 + q2, p2, -q2], axis=1)  # nodes a, b, c1, c2
    loc = np.einsum("pk,ka,kb->pab", kw, dvec, dvec)
    nodes4 = np.stack([a, b, c1, c2], axis=1)
    _scatter(n, nodes4[:, :, None].repeat(4, 2), nodes4[:, None, :].repeat(4, 1), loc, A)


def _vertex_pairs(mesh, i, j, s, q, A):
    if len(i) == 0:
        return
    n = mesh.n_nodes
    el = mesh.elements
    X = mesh.nodes
    area = mesh.volumes
    Pq, Qq, W = vertex_adjacent_rule(q.singular_order, s)
    for start in range(0, len(i), _CHUNK):
        ii, jj = i[start : start + _CHUNK], j[start : start + _CHUNK]
        ei, ej = el[ii], el[jj]
        in_j = (ei[:, :, None] == ej[:, None, :]).any(axis=2)
        in_i = (ej[:, :, None] == ei[:, None, :]).any(axis=2)
        v = ei[in_j]
        # remaining vertices of each triangle, in cyclic order after the shared one
        k1 = np.argmax(in_j, axis=1)
        k2 = np.argmax(in_i, axis=1)
        rows = np.arange(len(ii))
        b1, c1 = ei[rows, (k1 + 1) % 3], ei[rows, (k1 + 2) % 3]
        b2, c2 = ej[rows, (k2 + 1) % 3], ej[rows, (k2 + 2) % 3]
        x = Pq[None, :, :1] * (X[b1] - X[v])[:, None, :] + Pq[None, :, 1:] * (X[c1] - X[b1])[:, None, :]
        y = Qq[None, :, :1] * (X[b2] - X[v])[:, None, :] + Qq[None, :, 1:] * (X[c2] - X[b2])[:, None, :]
        diff = x - y
        kern = np.sum(diff * diff, axis=-1) ** (-(2 + 2 * s) / 2.0)
        kw = kern * W[None, :] * (4 * area[ii] * area[jj] * 2.0)[:, None]
        P1, P2, Q1, Q2 = Pq[:, 0], Pq[:, 1], Qq[:, 0], Qq[:, 1]
        dvec = np.stack([Q1 - P1, P1 - P2, P2, Q2 - Q1, -Q2], axis=1)
        loc = np.einsum("pk,ka,kb->pab", kw, dvec, dvec)
        nodes5 = np.stack([v, b1, c1, b2, c2], axis=1)
        _scatter(n, nodes5[:, :, None].repeat(5, 2), nodes5[:, None, :].repeat(5, 1), loc, A)


def assemble_gagliardo(mesh: Mesh, p: FracParams, q: QuadratureConfig | None = None) -> np.ndarray:
    """Dense matrix of ``(c_{N,s}/2) iint (u(x)-u(y))(v(x)-v(y)) |x-y|^{-N-2s}`` over all nodes."""
    p.require_open()
    q = q or QuadratureConfig()
    if p.N != mesh.dim:
        raise AssemblyError("parameter dimension differs from mesh dimension")
    if mesh.dim == 1:
        raw = _gagliardo_1d(mesh, p.s, q)
    elif mesh.dim == 2:
        raw = _gagliardo_2d(mesh, p.s, q)
    else:
        raise AssemblyError("assembly is implemented for N = 1 and N = 2")
    return _symmetrize(0.5 * c_ns(p) * raw)


# ---------------------------------------------------------------------------
# Hardy-weighted mass
# ---------------------------------------------------------------------------


def _checked_delta(domain: Domain, pts: np.ndarray) -> np.ndarray:
    dl = np.atleast_1d(domain.delta(pts))
    if np.any(dl <= 0.0):
        raise AssemblyError("a Hardy-weight quadrature node lies on the boundary")
    return dl


def _graded_rule_1d(q: QuadratureConfig):
    """Rule on [0, 1] graded toward 0."""
    br = geometric_panels(q.grading_levels, q.grading_ratio)
    t, w = gauss_legendre(q.panel_order)
    lo, hi = br[:-1], br[1:]
    pts = (lo[:, None] + (hi - lo)[:, None] * t[None, :]).ravel()
    wts = ((hi - lo)[:, None] * w[None, :]).ravel()
    return pts, wts


def _weighted_1d(mesh: Mesh, weight, q: QuadratureConfig) -> np.ndarray:
    n = mesh.n_nodes
    el = mesh.elements
    x = mesh.nodes[:, 0]
    h = x[el[:, 1]] - x[el[:, 0]]
    B = np.zeros((n, n))
    tg, wg = _graded_rule_1d(q)
    ts, ws = gauss_legendre(q.smooth_order)
    bnd = mesh.boundary[el]
    for e in range(len(el)):
        if bnd[e].all():
            continue
        if bnd[e, 0]:
            t, w = tg, wg
            pts = x[el[e, 0]] + h[e] * tg
        elif bnd[e, 1]:
            t, w = 1.0 - tg, wg
            pts = x[el[e, 1]] - h[e] * tg
        else:
            t, w = ts, ws
            pts = x[el[e, 0]] + h[e] * ts
        kw = w * h[e] * weight(pts[:, None])
        phi = np.stack([1 - t, t], axis=1)
        B[np.ix_(el[e], el[e])] += np.einsum("k,ka,kb->ab", kw, phi, phi)
    return B


def _weighted_2d(mesh: Mesh, weight, q: QuadratureConfig) -> np.ndarray:
    n = mesh.n_nodes
    el = mesh.elements
    X = mesh.nodes
    area = mesh.volumes
    B = np.zeros((n, n))
    bnd = mesh.boundary[el]
    nb = bnd.sum(axis=1)

    tg, wg = _graded_rule_1d(q)
    u, wu = gauss_legendre(q.panel_order)
    T = np.repeat(tg, len(u))
    U = np.tile(u, len(tg))
    WT = np.repeat(wg, len(u)) * np.tile(wu, len(tg))

    def add(verts, bary, weights):
        # verts: (p, 3) node indices in the order used by bary (K, 3)
        pts = np.einsum("ka,pad->pkd", bary, X[verts])
        kw = weights * weight(pts.reshape(-1, 2)).reshape(pts.shape[:2])
        loc = np.einsum("pk,ka,kb->pab", kw, bary, bary)
        _scatter(n, verts[:, :, None].repeat(3, 2), verts[:, None, :].repeat(3, 1), loc, B)

    # no boundary vertex: plain rule
    sel = np.flatnonzero(nb == 0)
    if len(sel):
        pts, w = triangle_rule(q.smooth_order)
        bary = np.column_stack([1 - pts[:, 0], pts[:, 0] - pts[:, 1], pts[:, 1]])
        add(el[sel], bary, (2 * area[sel])[:, None] * w[None, :])

    # one boundary vertex V: x = V + t((1-u)(P1-V) + u(P2-V)), Jacobian 2|T| t
    sel = np.flatnonzero(nb == 1)
    if len(sel):
        k = np.argmax(bnd[sel], axis=1)
        rows = np.arange(len(sel))
        verts = np.stack([el[sel][rows, k], el[sel][rows, (k + 1) % 3], el[sel][rows, (k + 2) % 3]], axis=1)
        bary = np.column_stack([1 - T, T * (1 - U), T * U])
        add(verts, bary, (2 * area[sel])[:, None] * (WT * T)[None, :])

    # two boundary vertices P0, P1: x = (1-t)((1-u)P0 + u P1) + t P2, Jacobian 2|T|(1-t)
    sel = np.flatnonzero(nb == 2)
    if len(sel):
        k = np.argmin(bnd[sel], axis=1)  # the interior vertex
        rows = np.arange(len(sel))
        verts = np.stack([el[sel][rows, (k + 1) % 3], el[sel][rows, (k + 2) % 3], el[sel][rows, k]], axis=1)
        bary = np.column_stack([(1 - T) * (1 - U), (1 - T) * U, T])
        add(verts, bary, (2 * area[sel])[:, None] * (WT * (1 - T))[None, :])
    return B


def assemble_hardy_mass(mesh: Mesh, domain: Domain, p: FracParams, grading_levels: int = 12,
                        q: QuadratureConfig | None = None) -> np.ndarray:
    """Matrix of ``int phi_i phi_j delta^{-2s}`` on interior nodes.

    Elements touching the boundary are split geometrically (ratio 1/2)
    toward the boundary vertex or facet before Gauss quadrature; the basis
    functions of interior nodes vanish there, which keeps entries finite.
    """
    p.require_open()
    q = q or QuadratureConfig()
    if grading_levels != q.grading_levels:
        q = QuadratureConfig(**{**q.__dict__, "grading_levels": grading_levels})
    s = p.s
    full = assemble_weighted_mass(mesh, lambda X: _checked_delta(domain, X) ** (-2 * s), q)
    inner = mesh.interior_nodes
    return full[np.ix_(inner, inner)]


def assemble_weighted_mass(mesh: Mesh, weight, q: QuadratureConfig | None = None) -> np.ndarray:
    """Matrix of ``int phi_i phi_j w`` over all nodes for a weight singular only on the boundary.

    ``weight`` maps an ``(n, dim)`` array of interior points to ``n`` values.
    Elements whose vertices all lie on the boundary are skipped, so entries
    are exact only between nodes with at least one interior endpoint.
    """
    q = q or QuadratureConfig()
    if mesh.dim == 1:
        full = _weighted_1d(mesh, weight, q)
    elif mesh.dim == 2:
        full = _weighted_2d(mesh, weight, q)
    else:
        raise AssemblyError("assembly is implemented for N = 1 and N = 2")
    return _symmetrize(full)


def assemble_mass(mesh: Mesh) -> np.ndarray:
    """Exact P1 mass matrix over all nodes."""
    n = mesh.n_nodes
    el = mesh.elements
    vol = mesh.volumes
    k = el.shape[1]
    # 1D: h/6 [[2,1],[1,2]]; 2D: |T|/12 (2 on the diagonal, 1 off it)
    ref = (np.ones((k, k)) + np.eye(k)) / (6.0 if k == 2 else 12.0)
    loc = vol[:, None, None] * ref[None]
    M = np.zeros((n, n))
    _scatter(n, el[:, :, None].repeat(k, 2), el[:, None, :].repeat(k, 1), loc, M)
    return _symmetrize(M)


def assemble_problem(mesh: Mesh, domain: Domain, p: FracParams, q: QuadratureConfig | None = None) -> AssembledProblem:
    """Assemble ``(A, B, M)`` restricted to interior nodes."""
    q = q or QuadratureConfig()
    inner = mesh.interior_nodes
    A = assemble_gagliardo(mesh, p, q)[np.ix_(inner, inner)]
    B = assemble_hardy_mass(mesh, domain, p, q.grading_levels, q)
    M = assemble_mass(mesh)[np.ix_(inner, inner)]
    return AssembledProblem(A, B, M, p, float(mesh.volumes.sum()), mesh, domain)


def seminorm_in_s(mesh: Mesh, u, s_grid, q: QuadratureConfig | None = None) -> list[float]:
    """``[u]_s`` for every ``s`` in ``s_grid`` by reassembling the Gagliardo matrix."""
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.n_nodes,):
        raise AssemblyError("u must hold one coefficient per mesh node")
    out = []
    for s in s_grid:
        A = assemble_gagliardo(mesh, FracParams(mesh.dim, float(s)).require_open(), q)
        out.append(float(u @ A @ u))
    return out


# ---------------------------------------------------------------------------
# matrix dump
# ---------------------------------------------------------------------------


def write_matrix(path, A: np.ndarray, p: FracParams, kind: str) -> None:
    """Triplet file ``i j value`` of the upper triangle with a one-line header."""
    if kind not in ("A", "B", "M"):
        raise AssemblyError("kind must be A, B or M")
    n = A.shape[0]
    i, j = np.triu_indices(n)
    keep = A[i, j] != 0.0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# frac-hardy matrix N={n} s={p.s!r} kind={kind}\n")
        for a, b, v in zip(i[keep], j[keep], A[i, j][keep]):
            fh.write(f"{a} {b} {v:.17g}\n")


def read_matrix(path) -> tuple[np.ndarray, dict]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        meta = dict(tok.split("=", 1) for tok in header[3:])
        n = int(meta["N"])
        A = np.zeros((n, n))
        for line in fh:
            a, b, v = line.split()
            A[int(a), int(b)] = A[int(b), int(a)] = float(v)
    return A, meta

