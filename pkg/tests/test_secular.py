import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptwell.errors import ParameterError
from ptwell.secular import (SERIES_RADIUS, Marker, ModelParams, ScaledValue, _b_over_u2_series,
                            bracket_B, d_secular, mpoint_limit_xi_squared, scaled_residual,
                            secular_complex, secular_complex_scaled, secular_real,
                            xi_squared_of_k)

# 40-digit mpmath evaluations of the closed forms
B_HALF_QUARTER = 0.1488812545337174794317059
F_REAL_1_5 = 0.4059303354336252551959406
F_COMPLEX = complex(-1.318622312781825092753951, -0.4399252489973735007469056)
F_SMALL = complex(0.03174244549058527637388107, 0.06351680694376691800731491)
F_BIG_SCALED = complex(-0.2081890305485142873375387, 0.454938830795835399514644)

positions = st.floats(0.02, 0.98)
couplings = st.floats(0.0, 20.0)


def test_bracket_golden():
    assert bracket_B(0.5, 0.25) == pytest.approx(B_HALF_QUARTER, rel=1e-14)


def test_real_golden():
    assert secular_real(1.5, ModelParams(1 / 3, 1.0)) == pytest.approx(F_REAL_1_5, rel=1e-14)


def test_complex_golden():
    v = secular_complex(0.7 + 2.3j, ModelParams(0.4, 3.0)).value
    assert abs(v - F_COMPLEX) < 1e-13 * abs(F_COMPLEX)


def test_series_branch_golden():
    u = 0.01 + 0.02j
    assert abs(u) < SERIES_RADIUS
    v = secular_complex(u, ModelParams(0.3, 2.0)).value
    assert abs(v - F_SMALL) < 1e-13 * abs(F_SMALL)


def test_large_argument_stays_finite():
    sv = secular_complex(40 + 1j, ModelParams(0.3, 2.0))
    scaled = sv.mantissa * math.exp(sv.log_scale - 80.0)
    assert abs(scaled - F_BIG_SCALED) < 1e-12
    fv, s = secular_complex_scaled(800 + 3j, 0.3, 2.0)
    assert math.isfinite(abs(fv)) and s == pytest.approx(1600.0)


@pytest.mark.parametrize("a", [0.1, 0.37, 0.5, 0.9])
def test_series_matches_direct_bracket_in_annulus(a):
    for r in (0.9, 0.97, 1.0, 1.03, 1.1):
        for phase in (0.0, 0.3, 1.1, math.pi / 2, 2.9):
            u = r * SERIES_RADIUS * cmath.exp(1j * phase)
            direct = cmath.sinh(4 * u * a - 2 * u) + cmath.sinh(2 * u) - 2 * cmath.sinh(2 * u * a)
            series = u * u * _b_over_u2_series(u, a)
            assert abs(series - direct) <= 1e-13 * abs(direct)


def test_origin_behaviour():
    p = ModelParams(0.3, 2.0)
    u = 1e-6 + 0j
    slope = 2 + 2 * p.xi**2 * p.a * (1 - p.a) ** 2
    assert secular_complex(u, p).value / u == pytest.approx(slope, rel=1e-9)
    assert secular_complex(0j, p).value == 0


def test_scaled_value_roundtrip():
    sv = ScaledValue.from_scaled(3.0 + 4.0j, 10.0)
    assert 0.5 <= abs(sv.mantissa) < 1.0
    assert abs(sv.value - (3 + 4j) * math.exp(10)) < 1e-9 * math.exp(10)
    assert (-sv).value == -sv.value
    assert sv.conjugate().value == sv.value.conjugate()
    assert ScaledValue.from_scaled(0j, 2.0).value == 0


@settings(max_examples=200, deadline=None)
@given(positions, couplings, st.floats(-4, 4), st.floats(-30, 30))
def test_oddness_and_conjugation(a, xi, x, y):
    u = complex(x, y)
    f0, s0 = secular_complex_scaled(u, a, xi)
    f1, s1 = secular_complex_scaled(-u, a, xi)
    f2, s2 = secular_complex_scaled(u.conjugate(), a, xi)
    scale = 1 + xi * xi / max(abs(u) ** 2, 1e-300)
    assert s0 == s1 == s2
    assert abs(f1 + f0) <= 1e-12 * scale
    assert abs(f2 - f0.conjugate()) <= 1e-12 * scale


@settings(max_examples=200, deadline=None)
@given(positions, couplings, st.floats(0.01, 60))
def test_reduction_to_real_axis(a, xi, k):
    p = ModelParams(a, xi)
    fv = secular_complex(1j * k, p).value
    assert abs(fv - 1j * secular_real(k, p)) <= 1e-12 * (1 + xi * xi / k**2)


@settings(max_examples=100, deadline=None)
@given(positions, st.floats(0.1, 10), st.floats(0.2, 20))
def test_real_derivatives_against_differences(a, xi, k):
    p = ModelParams(a, xi)
    h = 1e-5
    fk = (secular_real(k + h, p) - secular_real(k - h, p)) / (2 * h)
    fx = (secular_real(k, p.with_xi(xi + h)) - secular_real(k, p.with_xi(xi - h))) / (2 * h)
    fkk = (d_secular(k + h, p, "k") - d_secular(k - h, p, "k")) / (2 * h)
    fkx = (d_secular(k, p.with_xi(xi + h), "k") - d_secular(k, p.with_xi(xi - h), "k")) / (2 * h)
    scale = 1 + xi * xi
    assert abs(d_secular(k, p, "k") - fk) < 1e-6 * scale
    assert abs(d_secular(k, p, "xi") - fx) < 1e-6 * scale
    assert abs(d_secular(k, p, "kk") - fkk) < 1e-6 * scale
    assert abs(d_secular(k, p, "kxi") - fkx) < 1e-6 * scale


@settings(max_examples=100, deadline=None)
@given(positions, st.floats(0.1, 10), st.floats(-3, 3), st.floats(0.1, 15))
def test_complex_derivative_against_differences(a, xi, x, y):
    p = ModelParams(a, xi)
    u, h = complex(x, y), 1e-6
    num = (secular_complex(u + h, p).value - secular_complex(u - h, p).value) / (2 * h)
    ana = d_secular(u, p, "u")
    assert abs(ana - num) <= 1e-6 * max(abs(ana), abs(secular_complex(u, p).value), 1.0)


def test_xi_squared_markers():
    assert xi_squared_of_k(math.pi / 2, 0.37) == 0.0
    assert xi_squared_of_k(math.pi, 0.5) is Marker.ANY_XI
    assert xi_squared_of_k(math.pi / (2 * 0.37), 0.37) == math.inf
    # on (pi/2, pi) with a=1/2 sin 2k < 0 and sin k > 0: admissible
    assert xi_squared_of_k(2.0, 0.5) > 0
    assert xi_squared_of_k(1.0, 0.5) is Marker.OUTSIDE
    with pytest.raises(ParameterError):
        xi_squared_of_k(0.0, 0.5)


@settings(max_examples=100, deadline=None)
@given(positions, st.floats(0.05, 40))
def test_xi_squared_is_a_root(a, k):
    v = xi_squared_of_k(k, a)
    if isinstance(v, Marker) or not math.isfinite(v) or v > 1e6:
        return
    p = ModelParams(a, math.sqrt(v))
    assert abs(secular_real(k, p)) < 1e-9 * (1 + v / k**2)


def test_mpoint_limit():
    assert mpoint_limit_xi_squared(math.pi, 0.5) == pytest.approx(2 * math.pi**2, rel=1e-15)


@pytest.mark.parametrize("a,xi", [(0.0, 1.0), (1.0, 1.0), (0.5, -1.0), (0.5, math.inf),
                                  (math.nan, 1.0)])
def test_bad_params(a, xi):
    with pytest.raises(ParameterError):
        ModelParams(a, xi)


def test_no_roots_off_the_imaginary_axis_on_the_real_line():
    # for real u the function is strictly positive: no negative energies
    for a in (0.1, 0.5, 0.8):
        for u in (0.05, 0.5, 3.0, 30.0):
            assert scaled_residual(u, ModelParams(a, 7.0)) > 0
            assert secular_complex(u, ModelParams(a, 7.0)).value.real > 0
