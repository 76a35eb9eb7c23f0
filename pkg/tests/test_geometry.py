import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frac_hardy.geometry import (
    ConvexPolygon,
    DirectionalQuadrature,
    Disk,
    GeometryError,
    Interval,
    M2s,
    NonConvexError,
    NonSimplePolygonError,
    Polygon,
    RadiusError,
    delta,
    directional_profile,
    directional_quadrature,
    m2s,
    omega_x_volume,
    ray_trace,
    unit_square,
)
from frac_hardy.special_constants import FracParams, cos_moment

L_SHAPE = np.array([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]], dtype=float)


def _brute_delta(V, x):
    # distance to the closest point of each edge
    best = np.inf
    for a, b in zip(V, np.roll(V, -1, axis=0)):
        t = np.clip(np.dot(x - a, b - a) / np.dot(b - a, b - a), 0, 1)
        best = min(best, np.linalg.norm(x - (a + t * (b - a))))
    return best


def test_delta_scalar_and_array(square):
    assert delta(square, (0.5, 0.5)) == pytest.approx(0.5)
    assert isinstance(delta(square, (0.2, 0.3)), float)
    assert np.allclose(delta(square, [[0.1, 0.5], [0.5, 0.9]]), [0.1, 0.1])
    assert delta(Interval(0, 2), 0.5) == pytest.approx(0.5)
    assert delta(square, (1.0, 0.3)) == 0.0
    with pytest.raises(GeometryError):
        delta(square, (1.5, 0.5))


def test_delta_polygon_against_brute_force():
    P = Polygon(L_SHAPE)
    rng = np.random.default_rng(5)
    X = P.sample_interior(200, rng)
    got = delta(P, X)
    ref = [_brute_delta(P.vertices, x) for x in X]
    assert np.allclose(got, ref, atol=1e-14)


def test_disk_delta(disk):
    assert delta(disk, (0.3, 0.4)) == pytest.approx(0.5)


def test_square_ray_from_center(square):
    rt = ray_trace(square, (0.5, 0.5), (1.0, 0.0))
    assert rt.tau == pytest.approx(0.5)
    assert rt.tau_back == pytest.approx(0.5)
    assert rt.chord == pytest.approx(1.0)
    assert rt.d == pytest.approx(0.5)


def test_ray_through_reflex_corner_splits():
    P = Polygon(L_SHAPE)
    rt = ray_trace(P, (0.5, 0.25), (1.0, 0.0))
    assert rt.tau == pytest.approx(1.5)
    rt = ray_trace(P, (0.5, 1.5), (1.0, 0.0))
    assert rt.tau == pytest.approx(0.5)
    # from the lower arm across the notch into the upper arm
    rt = ray_trace(P, (1.8, 0.5), (-0.6, 0.8))
    assert len(rt.intervals) == 2
    assert rt.reach > rt.tau


def test_disk_ray_times(disk):
    rt = ray_trace(disk, (0.5, 0.0), (1.0, 0.0))
    assert rt.tau == pytest.approx(0.5)
    assert rt.tau_back == pytest.approx(1.5)
    assert rt.chord == pytest.approx(2.0)


def test_interval_trace():
    rt = ray_trace(Interval(0, 1), 0.25, 1.0)
    assert rt.tau == pytest.approx(0.75)
    assert rt.tau_back == pytest.approx(0.25)


def test_directional_quadrature_shapes():
    q = directional_quadrature(2, 64)
    assert q.weights.sum() == pytest.approx(1.0)
    assert np.allclose(np.linalg.norm(q.nodes, axis=1), 1.0)
    q3 = directional_quadrature(3, 100, kind="product")
    assert q3.weights.sum() == pytest.approx(1.0)
    mc = directional_quadrature(3, 1000, seed=4)
    assert np.array_equal(mc.nodes, directional_quadrature(3, 1000, seed=4).nodes)
    with pytest.raises(GeometryError):
        DirectionalQuadrature(np.array([[1.0, 0.0]]), np.array([0.5]))


@pytest.mark.parametrize("N,kw", [(1, {}), (2, {"n": 65536}), (3, {"n": 400, "kind": "product"})])
def test_cos_moment_identity(N, kw):
    q = directional_quadrature(N, **kw)
    e = np.zeros(N)
    e[-1] = 1.0
    for s in np.linspace(0.5, 0.99, 10):
        val = q.integrate(np.abs(q.nodes @ e) ** (2 * s))
        assert val == pytest.approx(cos_moment((N, s)), rel=1e-8)


def test_omega_x_volume_convex(square, disk):
    q = directional_quadrature(2, 2000)
    assert omega_x_volume(square, (0.3, 0.6), q) == pytest.approx(1.0, rel=1e-3)
    assert omega_x_volume(disk, (0.2, -0.1), q) == pytest.approx(math.pi, rel=1e-10)


def test_omega_x_volume_nonconvex_is_smaller():
    P = Polygon(L_SHAPE)
    q = directional_quadrature(2, 4000)
    v = omega_x_volume(P, (1.7, 0.3), q)
    assert v < P.volume - 0.2
    assert omega_x_volume(P, (0.5, 0.5), q) == pytest.approx(P.volume, rel=2e-3)


def test_m2s_closed_forms(disk):
    p = FracParams(2, 0.7)
    q = directional_quadrature(2, 4096)
    cm = cos_moment(p) ** (1 / (2 * p.s))
    assert m2s(disk, (0.0, 0.0), p, q) == pytest.approx(cm, rel=1e-12)
    assert M2s(disk, (0.0, 0.0), p, q) == pytest.approx(cm / 2, rel=1e-12)
    p1 = FracParams(1, 0.7)
    q1 = directional_quadrature(1)
    assert m2s(Interval(0, 1), 0.5, p1, q1) == pytest.approx(0.5)
    assert M2s(Interval(0, 1), 0.5, p1, q1) == pytest.approx(0.25)


def test_m2s_requires_open_s(disk):
    with pytest.raises(Exception):
        m2s(disk, (0, 0), FracParams(2, 0.5), directional_quadrature(2, 16))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(0.51, 0.99))
def test_m2s_below_delta_on_square(x, y, s):
    sq = unit_square()
    q = directional_quadrature(2, 4096)
    p = FracParams(2, s)
    dl = delta(sq, (x, y))
    assert m2s(sq, (x, y), p, q) <= dl * (1 + 1e-9)
    assert M2s(sq, (x, y), p, q) <= m2s(sq, (x, y), p, q)


def test_profile_dilation(square):
    q = directional_quadrature(2, 64)
    a = directional_profile(square, [[0.2, 0.7]], q)
    b = directional_profile(square.scaled(3.0), [[0.6, 2.1]], q)
    assert np.allclose(3 * a.tau, b.tau)
    assert np.allclose(3 * a.reach, b.reach)


def test_constructor_errors():
    with pytest.raises(RadiusError, match="radius must be positive"):
        Disk(np.zeros(2), -1.0)
    with pytest.raises(NonSimplePolygonError):
        Polygon(np.array([[0, 0], [1, 1], [1, 0], [0, 1]], dtype=float))
    with pytest.raises(NonConvexError):
        ConvexPolygon(L_SHAPE)
    with pytest.raises(GeometryError):
        Interval(1.0, 0.0)


def test_orientation_normalised():
    P = Polygon(L_SHAPE[::-1])
    assert P.volume == pytest.approx(3.0)
    assert P == Polygon(L_SHAPE)


def test_spec_round_trip(square, disk):
    for d in (square, disk, Interval(0, 2), Polygon(L_SHAPE)):
        spec = d.to_spec()
        assert type(d)(**{k: v for k, v in spec.items() if k != "type"}) == d
