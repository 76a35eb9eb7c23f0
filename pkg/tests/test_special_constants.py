import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frac_hardy.special_constants import (
    FracParams,
    ParameterError,
    a_ns,
    appendix_cns,
    c_ns,
    cos_moment,
    h_ns,
    kappa_ns,
    sphere_area,
)

mp.mp.dps = 40


def _mp_c(N, s):
    s = mp.mpf(s)
    return 2 ** (2 * s) * mp.pi ** (-mp.mpf(N) / 2) * s * mp.gamma((N + 2 * s) / 2) / mp.gamma(1 - s)


def _mp_kappa(N, s):
    s = mp.mpf(s)
    pre = mp.pi ** (mp.mpf(N - 1) / 2) * mp.gamma((1 + 2 * s) / 2) / mp.gamma((N + 2 * s) / 2) / (2 * s)
    return pre * (2 ** (1 - 2 * s) / mp.sqrt(mp.pi) * mp.gamma(1 - s) * mp.gamma((1 + 2 * s) / 2) - 1)


def _mp_cos_moment_quad(N, s):
    # |S^{N-2}| int_0^pi |cos t|^{2s} sin^{N-2} t dt / |S^{N-1}|
    s = mp.mpf(s)
    if N == 1:
        return mp.mpf(1)
    area = lambda n: 2 * mp.pi ** (mp.mpf(n) / 2) / mp.gamma(mp.mpf(n) / 2)
    f = lambda t: abs(mp.cos(t)) ** (2 * s) * mp.sin(t) ** (N - 2)
    return area(N - 1) * mp.quad(f, [0, mp.pi / 2, mp.pi]) / area(N)


S_GRID = [0.55, 0.6, 0.7, 0.75, 0.8, 0.9, 0.95]


@pytest.mark.parametrize("N", [1, 2, 3, 4])
@pytest.mark.parametrize("s", S_GRID)
def test_c_and_kappa_against_high_precision(N, s):
    assert c_ns((N, s)) == pytest.approx(float(_mp_c(N, s)), rel=1e-13)
    assert kappa_ns((N, s)) == pytest.approx(float(_mp_kappa(N, s)), rel=1e-12)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("s", S_GRID)
def test_cos_moment_against_angular_quadrature(N, s):
    assert cos_moment((N, s)) == pytest.approx(float(_mp_cos_moment_quad(N, s)), rel=1e-13)


@pytest.mark.parametrize("s", S_GRID)
def test_h_does_not_depend_on_dimension(s):
    vals = [h_ns((N, s)) for N in range(1, 6)]
    assert np.ptp(vals) < 1e-14 * max(vals)


def test_half_space_constant_values():
    assert h_ns((2, 0.75)) == pytest.approx(0.0620412648125592, rel=1e-13)
    assert h_ns((2, 0.5)) == 0.0
    assert kappa_ns((3, 0.5)) == 0.0
    assert a_ns((2, 0.75)) == pytest.approx(0.13953662828274568, rel=1e-13)


def test_h_approaches_quarter_slowly():
    # the gap is about 4% at s = 0.99 and 0.4% at s = 0.999
    assert 0.0 < 0.25 - h_ns((2, 0.999)) < 0.25 * 5e-3
    assert 0.25 * 0.04 < 0.25 - h_ns((2, 0.99)) < 0.25 * 0.041


def test_a_ns_formula_by_hand():
    N, s = 2, 0.6
    expect = h_ns((N, s)) * s * 2 ** (1 - 2 * s) / cos_moment((N, s)) * (N / (2 * math.pi)) ** (-2 * s / N)
    assert a_ns((N, s)) == pytest.approx(expect, rel=1e-15)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_appendix_constant_against_radial_integral(N):
    s = mp.mpf("0.7")
    area = 2 * mp.pi ** (mp.mpf(N - 1) / 2) / mp.gamma(mp.mpf(N - 1) / 2)
    val = area * mp.quad(lambda r: r ** (N - 2) * (r * r + 1) ** (-(N + 2 * s) / 2), [0, 1, mp.inf])
    assert appendix_cns((N, 0.7)) == pytest.approx(float(val), rel=1e-12)
    assert appendix_cns((1, 0.7)) == 1.0


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("bad", [(0, 0.7), (2, 0.4), (2, 1.0), (1.5, 0.7)])
def test_parameter_validation(bad):
    with pytest.raises(ParameterError):
        FracParams(*bad)


def test_require_open_rejects_half():
    with pytest.raises(ParameterError):
        FracParams(2, 0.5).require_open()
    assert FracParams(2, 0.6).require_open().s == 0.6


@settings(max_examples=200, deadline=None)
@given(st.floats(0.5005, 0.999), st.floats(0.5005, 0.999))
def test_h_increasing_in_s_and_below_quarter(s1, s2):
    lo, hi = sorted((s1, s2))
    assert 0.0 < h_ns((2, lo)) <= h_ns((2, hi)) < 0.25
