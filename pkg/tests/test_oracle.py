import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptwell.continuation import real_roots
from ptwell.errors import EigenfunctionError, ParameterError
from ptwell.oracle import (det4, eigenfunction, grid_oracle, matching_det, matching_matrix,
                           scaled_det_magnitude)
from ptwell.secular import ModelParams, secular_complex

E_PAIR_HALF_6 = complex(16.06981338826711, -5.834484171375381)  # -u^2 from the secular solver


@settings(max_examples=150, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.0, 12.0), st.floats(-6, 6), st.floats(-20, 20))
def test_determinant_is_u2_times_secular(a, xi, x, y):
    u = complex(x, y)
    if abs(u) < 1e-3:
        return
    p = ModelParams(a, xi)
    det = matching_det(u, p)
    f = secular_complex(u, p)
    lhs = det.mantissa * math.exp(det.log_scale - f.log_scale)
    assert abs(lhs - u * u * f.mantissa) <= 1e-12 * (abs(u) ** 2 + xi * xi) * (1 + abs(u))


def test_det4_matches_numpy():
    rng = np.random.default_rng(4)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert det4(m) == pytest.approx(np.linalg.det(m), rel=1e-12)


def test_large_u_is_finite():
    d = matching_det(300 + 2j, ModelParams(0.3, 3.0))
    assert math.isfinite(abs(d.mantissa)) and d.log_scale > 500


@pytest.mark.parametrize("a,xi", [(0.4, 3.0), (0.5, 6.0), (1 / 11, 7.0), (0.83, 1.2)])
def test_det_vanishes_at_secular_roots(a, xi):
    p = ModelParams(a, xi)
    for k in real_roots(p, 12.0):
        assert scaled_det_magnitude(1j * k, p) < 1e-12


def test_zero_u_rejected():
    with pytest.raises(ParameterError):
        matching_matrix(0j, ModelParams(0.5, 1.0))


@pytest.mark.parametrize("a,xi", [(0.4, 3.0), (0.3, 1.0)])
def test_eigenfunction_is_pt_symmetric(a, xi):
    p = ModelParams(a, xi)
    for k in real_roots(p, 8.0):
        ef = eigenfunction(1j * k, p)
        assert np.max(ef.matching_residuals()) < 1e-12
        xs = np.linspace(-1, 1, 401)
        psi = ef(xs)
        assert abs(psi[0]) < 1e-12 and abs(psi[-1]) < 1e-12
        # PT: psi(-x) is a constant phase times conj psi(x)
        ref = psi[np.argmax(np.abs(psi))]
        phase = ref / np.conj(psi[::-1][np.argmax(np.abs(psi))])
        assert np.allclose(psi[::-1], phase * np.conj(psi), atol=1e-10)


def test_nodes_on_isolated_vertical_line():
    # a = 1/3, k = 3pi/2: sin k(1-a) = 0 as well, the free level ignores both deltas
    p = ModelParams(1 / 3, 5.0)
    ef = eigenfunction(1.5j * math.pi, p)
    xs = np.linspace(-1, 1, 2001)
    peak = np.max(np.abs(ef(xs)))
    assert abs(ef(-1 / 3)) / peak < 1e-10
    assert abs(ef(1 / 3)) / peak < 1e-10


def test_crossing_line_eigenvector_is_explicit():
    # a = 1/2, k = pi: (A, B, C, D) is proportional to (1, xi/pi, -1, -1)
    xi = 5.0
    ef = eigenfunction(1j * math.pi, ModelParams(0.5, xi))
    v = np.array([ef.A, ef.B, ef.C, ef.D])
    v = v / v[0]
    assert np.allclose(v, [1, xi / math.pi, -1, -1], atol=1e-12)
    xs = np.linspace(-1, 1, 2001)
    peak = np.max(np.abs(ef(xs)))
    assert abs(ef(0.5)) / peak == pytest.approx(math.pi / xi, rel=1e-9)


def test_eigenfunction_rejects_non_root():
    with pytest.raises(EigenfunctionError):
        eigenfunction(2.0j, ModelParams(0.4, 3.0))


def test_grid_unperturbed_second_order():
    p = ModelParams(0.5, 0.0)
    errs = []
    for n in (249, 499, 999):
        ev = grid_oracle(p, n, 3, method="dense" if n < 800 else "sparse")
        errs.append(abs(ev[2].real - (1.5 * math.pi) ** 2))
    rates = [math.log2(e0 / e1) for e0, e1 in zip(errs, errs[1:])]
    assert all(r == pytest.approx(2.0, abs=0.1) for r in rates)


def test_grid_sees_the_complex_pair():
    p = ModelParams(0.5, 6.0)
    got = []
    for n in (499, 999, 1999):
        ev = grid_oracle(p, n, 4, method="sparse")
        pair = [e for e in ev if abs(e.imag) > 1.0]
        assert len(pair) == 2
        assert pair[0].imag == pytest.approx(-pair[1].imag, rel=1e-8)
        got.append(min(pair, key=lambda e: e.imag))
    errs = [abs(g - E_PAIR_HALF_6) for g in got]
    assert errs[-1] < 0.02 * abs(E_PAIR_HALF_6)
    assert errs[0] > errs[1] > errs[2]


def test_grid_guards():
    with pytest.raises(ParameterError):
        grid_oracle(ModelParams(0.5, 1.0), 50)
    with pytest.raises(ParameterError):
        grid_oracle(ModelParams(0.5, 1.0), 300, method="qr")
    ev = threading.Event()
    ev.set()
    with pytest.raises(InterruptedError):
        grid_oracle(ModelParams(0.5, 1.0), 300, cancel=ev)
