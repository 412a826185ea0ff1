"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from ptwell.continuation import (complex_continuation, count_roots_rect, detect_ep, real_roots,
                                 track_branch)
from ptwell.curves import atlas_min, critical_sequence, crossing_points, is_monotone, numeric_limit_xi
from ptwell.oracle import eigenfunction, scaled_det_magnitude
from ptwell.partition import RationalPosition
from ptwell.secular import ModelParams, secular_complex_scaled, secular_real
from ptwell.verify import conservation_counts, derivative_error, fold_points, strip_count

SQRT2PI = math.pi * math.sqrt(2)


@pytest.fixture
def report(capsys):
    def _report(label, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {label}: {'PASS' if ok else 'FAIL'} | {detail}")
        return ok
    return _report


def test_criterion_1_unperturbed_spectrum(report):
    t0 = time.perf_counter()
    roots = real_roots(ModelParams(0.37, 0.0), 10 * math.pi / 2 + 0.1)
    dt = time.perf_counter() - t0
    err = max(abs(k - n * math.pi / 2) for n, k in enumerate(roots, start=1))
    ok = len(roots) == 10 and err < 1e-10 and dt < 1.0
    assert report("1 unperturbed spectrum", ok, f"{len(roots)} roots, max err {err:.2e}, {dt:.3f}s")


def test_criterion_2_crossing_formula(report):
    t0 = time.perf_counter()
    worst, n = 0.0, 0
    for P, Q in ((1, 2), (2, 3), (1, 4)):
        for c in crossing_points(RationalPosition(P, Q), 3):
            lim = numeric_limit_xi(P / Q, c.k_cross)
            worst = max(worst, abs(lim - c.xi_cross) / c.xi_cross)
            n += 1
    dt = time.perf_counter() - t0
    ok = n > 0 and worst < 1e-8 and dt < 5.0
    assert report("2 crossing formula", ok, f"{n} crossings, worst rel dev {worst:.2e}, {dt:.3f}s")


def test_criterion_3_global_minimum(report):
    t0 = time.perf_counter()
    res = atlas_min(0.30, 0.36, 5e-4, 6)
    dt = time.perf_counter() - t0
    ok = abs(res.xi_star - 2.4931) <= 0.005 and abs(res.a_star - 0.3335) <= 0.002 and dt < 60
    assert report("3 global minimum", ok,
                  f"xi_min={res.xi_star:.7f} at a={res.a_star:.6f}, {dt:.2f}s")


def test_criterion_4_overstepping(report):
    t0 = time.perf_counter()
    seq = critical_sequence(1 / 11, 12)
    mono, drop = is_monotone(seq)
    dt = time.perf_counter() - t0
    ok = mono is False and dt < 30
    assert report("4 overstepping", ok,
                  f"monotone={mono}, first drop after n={drop}, {len(seq)} pairs, {dt:.2f}s")


def test_criterion_5_exceptional_point_at_crossing_value(report):
    """EP of the pair around k=pi at xi_c = pi*sqrt(2), complex beyond it."""
    t0 = time.perf_counter()
    a = 0.5
    sched = np.linspace(0.0, 8.0, 801)
    low = track_branch(a, math.pi / 2, sched, branch_id=0)
    vert = track_branch(a, math.pi, sched, branch_id=1)
    ep = detect_ep(a, (low, vert), (0.0, 8.0))
    loc_ok = ep is not None and abs(ep.xi_c - SQRT2PI) <= 1e-6
    # Im E of the two partners over (xi_c, 8]
    xs = [x for x in sched if ep is not None and x > ep.xi_c]
    im_ok = bool(xs)
    slope = float("nan")
    if ep is not None and ep.kind == "fold":
        b1, b2 = complex_continuation(a, ep, [ep.xi_c] + xs)
        im1, im2 = b1.E.imag[1:], b2.E.imag[1:]
        im_ok = bool(np.all(im1 != 0) and np.allclose(im1, -im2, atol=1e-12))
        d = np.logspace(-4, -2, 9)
        c1, _ = complex_continuation(a, ep, np.concatenate(([ep.xi_c], ep.xi_c + d)))
        slope = np.polyfit(np.log(d), np.log(np.abs(np.asarray(c1.u[1:]).real)), 1)[0]
    else:
        for br in (low, vert):
            for x, e in zip(br.xi, br.E):
                if x in xs and e.imag == 0:
                    im_ok = False
    exp_ok = abs(slope - 0.5) <= 0.05
    robust_ok = bool(np.all(vert.k == math.pi))
    dt = time.perf_counter() - t0
    ok = loc_ok and im_ok and exp_ok and robust_ok and dt < 10
    kind = ep.kind if ep is not None else "none"
    xi_c = ep.xi_c if ep is not None else float("nan")
    assert report("5 EP at pi*sqrt(2) for a=1/2", ok,
                  f"meeting at xi={xi_c:.9f} is a {kind}; Im E nonzero beyond: {im_ok}; "
                  f"exponent {slope:.3f}; k=pi real: {robust_ok}; {dt:.2f}s")


def test_criterion_5_companion_true_exceptional_point(report):
    """The fold actually reached by the levels starting at pi/2 and 3pi/2."""
    t0 = time.perf_counter()
    a = 0.5
    sched = np.linspace(0.0, 8.0, 801)
    b1 = track_branch(a, math.pi / 2, sched, branch_id=0)
    b2 = track_branch(a, 1.5 * math.pi, sched, branch_id=1)
    vert = track_branch(a, math.pi, sched, branch_id=2)
    ep = detect_ep(a, (b1, b2), (0.0, 8.0))
    xs = [x for x in sched if x > ep.xi_c]
    c1, c2 = complex_continuation(a, ep, [ep.xi_c] + xs)
    im1, im2 = c1.E.imag[1:], c2.E.imag[1:]
    d = np.logspace(-4, -2, 9)
    s1, _ = complex_continuation(a, ep, np.concatenate(([ep.xi_c], ep.xi_c + d)))
    slope = np.polyfit(np.log(d), np.log(np.abs(np.asarray(s1.u[1:]).real)), 1)[0]
    dt = time.perf_counter() - t0
    ok = (ep.kind == "fold" and abs(ep.xi_c - 5.0597649424778) < 1e-9
          and b1.crossings and abs(b1.crossings[0][0] - SQRT2PI) < 1e-9
          and np.all(im1 != 0) and np.allclose(im1, -im2, atol=1e-12)
          and abs(slope - 0.5) <= 0.05 and np.all(vert.k == math.pi) and dt < 10)
    assert report("5c true EP for a=1/2", ok,
                  f"fold at xi_c={ep.xi_c:.12f}, k_c={ep.k_c:.9f}; crossing at "
                  f"{b1.crossings[0][0]:.9f}; exponent {slope:.3f}; {dt:.2f}s")


def test_criterion_6_oracle_equivalence(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240611)
    worst_det, mismatches, n_roots = 0.0, [], 0
    for a, xi in zip(rng.uniform(0.05, 0.95, 25), rng.uniform(0.0, 10.0, 25)):
        p = ModelParams(float(a), float(xi))
        roots = real_roots(p, 12.0)
        n_roots += len(roots)
        worst_det = max([worst_det] + [scaled_det_magnitude(1j * k, p) for k in roots])
        counted, expected, _ = strip_count(p, 12.0)
        if counted != expected:
            mismatches.append((round(a, 4), round(xi, 4), counted, expected))
    dt = time.perf_counter() - t0
    ok = worst_det < 1e-9 and not mismatches and dt < 60
    assert report("6 oracle equivalence", ok,
                  f"{n_roots} roots, max scaled det {worst_det:.2e}, "
                  f"count mismatches {mismatches}, {dt:.2f}s")


def test_criterion_7_invariant_suite(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    n = 1000
    a_s = rng.uniform(0.02, 0.98, n)
    xi_s = rng.uniform(0.0, 15.0, n)
    us = rng.uniform(-4, 4, n) + 1j * rng.uniform(-25, 25, n)
    odd = conj = red = deriv = 0.0
    for a, xi, u in zip(a_s, xi_s, us):
        a, xi, u = float(a), float(xi), complex(u)
        sc = 1 + xi * xi / abs(u) ** 2
        f0, _ = secular_complex_scaled(u, a, xi)
        odd = max(odd, abs(secular_complex_scaled(-u, a, xi)[0] + f0) / sc)
        conj = max(conj, abs(secular_complex_scaled(u.conjugate(), a, xi)[0] - f0.conjugate()) / sc)
        k = abs(u.imag) + 0.01
        fk, s = secular_complex_scaled(1j * k, a, xi)
        red = max(red, abs(fk * math.exp(s) - 1j * secular_real(k, ModelParams(a, xi)))
                  / (1 + xi * xi / k**2))
        deriv = max(deriv, derivative_error(u, ModelParams(a, max(xi, 0.01))))
    cons_bad, n_ep = [], 0
    for a in rng.uniform(0.05, 0.95, 20):
        for ep in fold_points(float(a), 12.0):
            n_ep += 1
            before, after = conservation_counts(float(a), ep)
            if before != after:
                cons_bad.append((float(a), ep.xi_c, before, after))
    dt = time.perf_counter() - t0
    ok = (odd <= 1e-13 and conj <= 1e-13 and red <= 1e-12 and deriv <= 1e-6
          and n_ep > 0 and not cons_bad and dt < 30)
    assert report("7 invariant suite", ok,
                  f"odd {odd:.1e}, conj {conj:.1e}, reduction {red:.1e}, deriv {deriv:.1e}, "
                  f"{n_ep} EPs conserved (bad: {cons_bad}), {dt:.2f}s")


def test_criterion_8_mpoint_nodes_as_stated(report):
    p = ModelParams(0.5, 5.0)
    ef = eigenfunction(1j * math.pi, p)
    xs = np.linspace(-1, 1, 4001)
    peak = np.max(np.abs(ef(xs)))
    ratio = max(abs(ef(-0.5)), abs(ef(0.5))) / peak
    assert report("8 M-point nodes at k=pi", ratio < 1e-10,
                  f"|psi(+-a)|/max|psi| = {ratio:.6f} (exact value pi/xi = {math.pi / 5:.6f})")


def test_criterion_8_companion_isolated_vertical_line(report):
    """Nodes at the interaction points on the M line with l(Q-P) even (a=1/2, k=2pi)."""
    p = ModelParams(0.5, 5.0)
    ef = eigenfunction(2j * math.pi, p)
    xs = np.linspace(-1, 1, 4001)
    peak = np.max(np.abs(ef(xs)))
    ratio = max(abs(ef(-0.5)), abs(ef(0.5))) / peak
    assert report("8c nodes at k=2pi", ratio < 1e-10, f"|psi(+-a)|/max|psi| = {ratio:.2e}")
