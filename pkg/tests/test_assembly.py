import math

import numpy as np
import pytest
from scipy import integrate

from frac_hardy.assembly import (
    ASM_TOL_FACTOR,
    AssemblyError,
    QuadratureConfig,
    assemble_gagliardo,
    assemble_hardy_mass,
    assemble_mass,
    assemble_problem,
    read_matrix,
    seminorm_in_s,
    write_matrix,
)
from frac_hardy.geometry import Disk, Interval, Polygon, unit_square
from frac_hardy.mesh import mesh_domain_2d, mesh_interval
from frac_hardy.quadrature import gauss_legendre
from frac_hardy.special_constants import FracParams, c_ns

L_SHAPE = np.array([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]], dtype=float)


def hat(i, n):
    h = 1.0 / n
    return lambda x: max(0.0, 1.0 - abs(x - i * h) / h)


def gagliardo_1d_brute(f, g, s):
    """(1/2) iint (f(x)-f(y))(g(x)-g(y)) |x-y|^{-1-2s} on (0,1)^2 via r = y - x > 0."""

    def inner(r):
        r = max(r, 1e-7)  # bounded integrand, Clenshaw-Curtis touches r = 0
        kinks = np.concatenate([np.arange(1, 8) / 8, np.arange(1, 8) / 8 - r])
        kinks = kinks[(kinks > 0) & (kinks < 1 - r)]
        val, _ = integrate.quad(lambda x: (f(x) - f(x + r)) * (g(x) - g(x + r)), 0.0, 1.0 - r,
                                points=kinks, limit=200, epsabs=1e-15)
        return val / (r * r)

    # F(r)/r^2 has kinks at multiples of 1/8: algebraic weight on the first cell only
    k = 1 / 8
    head, _ = integrate.quad(inner, 0.0, k, weight="alg", wvar=(1 - 2 * s, 0.0), limit=200, epsabs=1e-14)
    tail, _ = integrate.quad(lambda r: inner(r) * r ** (1 - 2 * s), k, 1.0,
                             points=np.arange(2, 8) * k, limit=200, epsabs=1e-14)
    val = head + tail
    return val  # the factor 2 of the symmetric domain cancels the 1/2


@pytest.mark.parametrize("s", [0.6, 0.75, 0.9])
def test_1d_entries_against_nested_adaptive_quadrature(s):
    n = 8
    p = FracParams(1, s)
    A = assemble_gagliardo(mesh_interval(n), p) / c_ns(p)
    for i, j in [(3, 3), (1, 1), (3, 4), (2, 5)]:
        ref = gagliardo_1d_brute(hat(i, n), hat(j, n), s)
        assert A[i, j] == pytest.approx(ref, rel=1e-3)


def test_1d_entries_converge_with_disjoint_order():
    # default orders leave ~1e-4 from the one-element-gap pairs; raising them closes it
    n, s = 8, 0.75
    p = FracParams(1, s)
    q = QuadratureConfig(singular_order=8, far_order=8, near_order=12)
    A = assemble_gagliardo(mesh_interval(n), p, q) / c_ns(p)
    for i, j in [(3, 3), (1, 1), (3, 4), (3, 5)]:
        ref = gagliardo_1d_brute(hat(i, n), hat(j, n), s)
        assert A[i, j] == pytest.approx(ref, rel=1e-7)


def test_constants_in_kernel():
    for m, p in ((mesh_interval(16), FracParams(1, 0.7)), (mesh_domain_2d(Disk(np.zeros(2), 1.0), 0.3), FracParams(2, 0.7))):
        A = assemble_gagliardo(m, p)
        one = np.ones(m.n_nodes)
        assert abs(one @ A @ one) <= ASM_TOL_FACTOR * np.abs(A).max()
        assert np.allclose(A, A.T)


def _linear_energy_reference(s):
    # iint_{Q x Q} (x1-y1)^2 |x-y|^{-2-2s} in polar coordinates for z = x - y
    def g(r, th):
        z1, z2 = r * np.cos(th), r * np.sin(th)
        return 4 * (1 - z1) * (1 - z2) * np.cos(th) ** 2 * r ** (1 - 2 * s)

    a = integrate.dblquad(g, 0, np.pi / 4, 0, lambda th: 1 / np.cos(th), epsabs=1e-12)[0]
    b = integrate.dblquad(g, np.pi / 4, np.pi / 2, 0, lambda th: 1 / np.sin(th), epsabs=1e-12)[0]
    return a + b


@pytest.mark.parametrize("s", [0.6, 0.75, 0.9])
def test_2d_energy_of_linear_function(s):
    m = mesh_domain_2d(unit_square(), 0.25)
    p = FracParams(2, s)
    A = assemble_gagliardo(m, p)
    u = m.nodes[:, 0]
    got = u @ A @ u / (0.5 * c_ns(p))
    assert got == pytest.approx(_linear_energy_reference(s), rel=2e-5)


def test_singular_order_convergence():
    m = mesh_domain_2d(unit_square(), 0.25)
    p = FracParams(2, 0.75)
    A4 = assemble_gagliardo(m, p)
    A8 = assemble_gagliardo(m, p, QuadratureConfig(singular_order=8, far_order=6, near_order=10))
    assert np.abs(A4 - A8).max() < 1e-4 * np.abs(A8).max()


def test_2d_edge_and_vertex_pairs_on_l_shape():
    # the energy of a linear function depends only on the domain: compare two meshes
    P = Polygon(L_SHAPE)
    p = FracParams(2, 0.7)
    vals = []
    for h in (0.5, 0.25):
        m = mesh_domain_2d(P, h)
        u = m.nodes[:, 0] + 2 * m.nodes[:, 1]
        vals.append(u @ assemble_gagliardo(m, p) @ u)
    assert vals[0] == pytest.approx(vals[1], rel=1e-4)


@pytest.mark.parametrize("r", [0.5, 3.0])
def test_dilation_scaling(r):
    m = mesh_domain_2d(unit_square(), 0.25)
    p = FracParams(2, 0.65)
    A = assemble_gagliardo(m, p)
    Ar = assemble_gagliardo(m.scaled(r), p)
    assert np.allclose(Ar, r ** (2 - 2 * p.s) * A, rtol=1e-12, atol=1e-14 * np.abs(Ar).max())


def test_full_triple_dilation():
    sq = unit_square()
    m = mesh_domain_2d(sq, 0.25)
    p = FracParams(2, 0.8)
    P = assemble_problem(m, sq, p)
    Q = assemble_problem(m.scaled(2.0), sq.scaled(2.0), p)
    f = 2.0 ** (2 - 2 * p.s)
    assert np.allclose(Q.A, f * P.A, rtol=1e-11)
    assert np.allclose(Q.B, f * P.B, rtol=1e-11)
    assert np.allclose(Q.M, 4 * P.M, rtol=1e-13)
    S = P.scaled(2.0)
    assert np.allclose(S.A, Q.A, rtol=1e-11) and S.domain_volume == pytest.approx(4.0)


def test_hardy_mass_boundary_entry_1d():
    s = 0.75
    n = 8
    B = assemble_hardy_mass(mesh_interval(n), Interval(0, 1), FracParams(1, s))
    for (i, j) in [(1, 1), (1, 2)]:
        f, g = hat(i, n), hat(j, n)
        ref, _ = integrate.quad(lambda x: min(x, 1 - x) ** (-2 * s) * f(x) * g(x), 0, 3 / n,
                                points=[1 / n, 2 / n], limit=200, epsabs=1e-14)
        assert B[i - 1, j - 1] == pytest.approx(ref, rel=1e-4)


def test_hardy_mass_interior_element_matches_pointwise_gauss():
    s = 0.7
    n = 8
    B = assemble_hardy_mass(mesh_interval(n), Interval(0, 1), FracParams(1, s))
    # node 3 touches elements [2h,3h] and [3h,4h], neither on the boundary
    t, w = gauss_legendre(5)
    h = 1 / n
    val = 0.0
    for a in (2 * h, 3 * h):
        x = a + h * t
        phi = 1 - np.abs(x - 3 * h) / h
        val += h * np.sum(w * phi**2 * np.minimum(x, 1 - x) ** (-2 * s))
    assert B[2, 2] == pytest.approx(val, rel=1e-10)


@pytest.mark.parametrize("dom,h", [(unit_square(), 1 / 8), (Disk(np.zeros(2), 1.0), 0.25), (Polygon(L_SHAPE), 0.5)])
def test_hardy_mass_grading_self_convergence(dom, h):
    m = mesh_domain_2d(dom, h)
    p = FracParams(2, 0.75)
    B12 = assemble_hardy_mass(m, dom, p, 12)
    B24 = assemble_hardy_mass(m, dom, p, 24)
    mask = B24 != 0
    assert np.max(np.abs(B12 - B24)[mask] / np.abs(B24)[mask]) < 1e-6
    np.linalg.cholesky(B12)


def test_hardy_mass_grading_levels_validated():
    with pytest.raises(AssemblyError):
        assemble_hardy_mass(mesh_interval(8), Interval(0, 1), FracParams(1, 0.7), 3)


def test_mass_matrix():
    n = 10
    M = assemble_mass(mesh_interval(n))
    h = 1 / n
    assert M[3, 3] == pytest.approx(2 * h / 3)
    assert M[3, 4] == pytest.approx(h / 6)
    one = np.ones(n + 1)
    assert one @ M @ one == pytest.approx(1.0, abs=1e-12)
    m = mesh_domain_2d(Disk(np.zeros(2), 1.0), 0.3)
    M = assemble_mass(m)
    one = np.ones(m.n_nodes)
    assert one @ M @ one == pytest.approx(m.volumes.sum(), abs=1e-12)
    T = mesh_domain_2d(unit_square(), 0.25)
    e = T.elements[0]
    loc = assemble_mass(type(T)(T.nodes, T.elements[:1], T.boundary))[np.ix_(e, e)]
    assert np.allclose(loc, T.volumes[0] / 12 * (np.ones((3, 3)) + np.eye(3)))


def test_positive_definite_on_interior(square_problem):
    for mat in (square_problem.A, square_problem.B, square_problem.M):
        np.linalg.cholesky(mat)


def test_quadrature_config_errors():
    with pytest.raises(AssemblyError):
        QuadratureConfig(singular_order=1)
    with pytest.raises(AssemblyError):
        assemble_gagliardo(mesh_interval(8), FracParams(2, 0.7))


def test_seminorm_in_s():
    m = mesh_interval(16)
    assert seminorm_in_s(m, np.ones(m.n_nodes), [0.6, 0.8]) == pytest.approx([0.0, 0.0], abs=1e-10)
    u = np.array([hat(8, 16)(x) for x in m.nodes[:, 0]])
    base = seminorm_in_s(m, u, [0.7])[0]
    gaps = [abs(seminorm_in_s(m, u, [0.7 + e])[0] - base) for e in (0.04, 0.02, 0.01, 0.005)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    grid = seminorm_in_s(m, u, np.linspace(0.55, 0.95, 9))
    assert np.all(np.isfinite(grid)) and min(grid) > 0


def test_assembly_is_deterministic():
    m = mesh_domain_2d(unit_square(), 0.25)
    p = FracParams(2, 0.7)
    assert assemble_gagliardo(m, p).tobytes() == assemble_gagliardo(m, p).tobytes()


def test_matrix_dump_round_trip(tmp_path, interval_problem):
    path = tmp_path / "A.txt"
    write_matrix(path, interval_problem.A, interval_problem.params, "A")
    header = path.read_text().splitlines()[0]
    assert header == f"# frac-hardy matrix N={interval_problem.size} s=0.75 kind=A"
    A, meta = read_matrix(path)
    assert np.array_equal(A, interval_problem.A)
    assert meta["kind"] == "A"
    with pytest.raises(AssemblyError):
        write_matrix(path, A, interval_problem.params, "Q")


def test_normalized_energy_stays_bounded_near_one():
    # c_{N,s} carries a factor (1 - s), so the energy of a smooth function stays bounded
    m = mesh_domain_2d(unit_square(), 0.25)
    u = m.nodes[:, 0]
    vals = [u @ assemble_gagliardo(m, FracParams(2, s)) @ u for s in (0.9, 0.95, 0.99)]
    assert max(vals) / min(vals) < 1.5
    assert math.isfinite(sum(vals))
