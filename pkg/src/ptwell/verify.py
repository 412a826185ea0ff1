"""Cross-checks of the secular solver for one parameter set."""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from .continuation import (ExceptionalPoint, _double_root_newton, _ep_at, complex_continuation,
                           count_roots_rect, real_roots)
from .curves import merging_pairs
from .errors import EigenfunctionError, PtwellError
from .oracle import eigenfunction, scaled_det_magnitude
from .secular import (ModelParams, _dsecular_du_scaled, _dsecular_dxi_scaled, d_secular,
                      secular_complex_scaled, secular_real)

__all__ = ["DEFAULT_TOLERANCES", "fold_points", "complex_roots", "strip_count", "run_verify"]

DEFAULT_TOLERANCES = {
    "reduction_identity": 1e-12,
    "oddness": 1e-12,
    "conjugation": 1e-12,
    "derivatives": 1e-6,
    "oracle_zero_set": 1e-9,
    "eigenfunction_residual": 1e-9,
    "root_count": 0.0,
    "conjugate_pairs": 1e-10,
    "root_count_conservation": 0.0,
}


def fold_points(a: float, k_max: float) -> list[ExceptionalPoint]:
    """Exceptional points of all merging pairs with upper level below ``k_max``."""
    out = []
    for e in merging_pairs(a, k_max):
        if not math.isfinite(e.xi_crit) or e.k_merge is None:
            continue
        sol = _double_root_newton(a, e.k_merge, e.xi_crit)
        k_c, xi_c = sol if sol is not None else (e.k_merge, e.xi_crit)
        ep = _ep_at(a, k_c, xi_c, (e.n, e.n), "fold")
        if abs(ep.f_xi) < 1e-8 * max(1.0, xi_c):
            continue  # maximum sits on an M line: a crossing, no complex pair
        out.append(ep)
    return out


def complex_roots(p: ModelParams, k_max: float):
    """Roots with ``Re u > 0`` off the imaginary axis, one per complex pair."""
    out = []
    for ep in fold_points(p.a, k_max):
        if ep.xi_c >= p.xi:
            continue
        b1, _ = complex_continuation(p.a, ep, np.linspace(ep.xi_c, p.xi, 64))
        out.append((ep, b1.u[-1]))
    return out


def _gap_level(roots, k):
    """Midpoint of the gap between sorted roots that contains ``k``."""
    below = [r for r in roots if r < k]
    above = [r for r in roots if r > k]
    lo = below[-1] if below else 0.0
    hi = above[0] if above else k + 1.0
    return 0.5 * (lo + hi)


def strip_count(p: ModelParams, k_max: float, half_width: float = 3.0):
    """Argument-principle count over ``|Re u| < w``, ``k_lo < Im u < k_top`` against the solvers.

    Returns ``(counted, expected, rect)``; every real root inside and both
    upper-half-plane images ``u, -conj(u)`` of every complex pair are expected.
    """
    roots_wide = real_roots(p, 1.5 * k_max + 2.0)
    k_top = _gap_level(roots_wide, k_max)
    k_lo = min(0.05, 0.5 * roots_wide[0]) if roots_wide else 0.05
    rc = count_roots_rect(p, (complex(-half_width, k_lo), complex(half_width, k_top)))
    ll, ur = rc.lower_left, rc.upper_right
    expected = sum(1 for r in roots_wide if ll.imag < r < ur.imag)
    for _, u in complex_roots(p, ur.imag + 1.0):
        for z in (u, -u.conjugate()):
            if ll.real < z.real < ur.real and ll.imag < z.imag < ur.imag:
                expected += 1
    return rc.count, expected, (ll, ur)


def _term_scale(u, xi):
    return 1.0 + xi * xi / max(abs(u) ** 2, 1e-300)


def _check(name, value, tol, detail=None):
    ok = bool(value <= tol) if math.isfinite(value) else False
    out = {"name": name, "passed": ok, "value": float(value), "tolerance": float(tol)}
    if detail:
        out["detail"] = detail
    return out


def _identity_checks(p, k_max, tol, rng):
    a, xi = p.a, p.xi
    ks = np.linspace(0.05, k_max, 400)
    red = 0.0
    for k in ks:
        fv, s = secular_complex_scaled(1j * k, a, xi)
        red = max(red, abs(fv * math.exp(s) - 1j * secular_real(k, p)) / _term_scale(1j * k, xi))
    us = rng.uniform(-3, 3, 200) + 1j * rng.uniform(-k_max, k_max, 200)
    odd = conj = 0.0
    for u in us:
        f0, _ = secular_complex_scaled(u, a, xi)
        f1, _ = secular_complex_scaled(-u, a, xi)
        f2, _ = secular_complex_scaled(u.conjugate(), a, xi)
        sc = _term_scale(u, xi)
        odd = max(odd, abs(f1 + f0) / sc)
        conj = max(conj, abs(f2 - f0.conjugate()) / sc)
    return [
        _check("reduction_identity", red, tol["reduction_identity"]),
        _check("oddness", odd, tol["oddness"]),
        _check("conjugation", conj, tol["conjugation"]),
    ]


def derivative_error(u, p: ModelParams, h: float = 1e-6) -> float:
    """Worst relative gap between analytic and central-difference derivatives at ``u``."""
    a, xi = p.a, p.xi
    u = complex(u)
    fu = complex(d_secular(u, p, "u"))
    fp, sp = secular_complex_scaled(u + h, a, xi)
    fm, sm = secular_complex_scaled(u - h, a, xi)
    num_u = (fp * math.exp(sp) - fm * math.exp(sm)) / (2 * h)
    dxi, s = _dsecular_dxi_scaled(u, a, xi)
    fx = complex(dxi * math.exp(s))
    hx = h * max(1.0, xi)
    fxp, sxp = secular_complex_scaled(u, a, xi + hx)
    fxm, sxm = secular_complex_scaled(u, a, xi - hx)
    num_x = (fxp * math.exp(sxp) - fxm * math.exp(sxm)) / (2 * hx)
    ref = abs(secular_complex_scaled(u, a, xi)[0] * math.exp(2 * abs(u.real)))
    e1 = abs(fu - num_u) / max(abs(fu), ref, 1.0)
    e2 = abs(fx - num_x) / max(abs(fx), ref, 1.0)
    return max(e1, e2)


def run_verify(p: ModelParams, k_max: float = 12.0, tolerances: dict | None = None,
               seed: int = 0) -> dict:
    """Run the invariant suite; the report lists every check and an overall verdict."""
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        unknown = set(tolerances) - set(tol)
        if unknown:
            raise PtwellError(f"unknown tolerance names {sorted(unknown)}")
        tol.update(tolerances)
    rng = np.random.default_rng(seed)
    checks = _identity_checks(p, k_max, tol, rng)

    us = rng.uniform(0.1, 3, 50) * rng.choice([-1, 1], 50) + 1j * rng.uniform(0.1, k_max, 50)
    xi_safe = p.xi if p.xi > 1e-3 else 1.0
    d_err = max(derivative_error(u, p.with_xi(xi_safe)) for u in us)
    checks.append(_check("derivatives", d_err, tol["derivatives"]))

    roots = real_roots(p, k_max)
    det_err = max((scaled_det_magnitude(1j * k, p) for k in roots), default=0.0)
    checks.append(_check("oracle_zero_set", det_err, tol["oracle_zero_set"],
                         {"roots": [float(k) for k in roots]}))

    res, skipped = 0.0, []
    for k in roots:
        try:
            ef = eigenfunction(1j * k, p)
        except EigenfunctionError:
            skipped.append(float(k))
            continue
        res = max(res, float(np.max(ef.matching_residuals())))
    checks.append(_check("eigenfunction_residual", res, tol["eigenfunction_residual"],
                         {"degenerate_roots": skipped} if skipped else None))

    counted, expected, (ll, ur) = strip_count(p, k_max)
    checks.append(_check("root_count", abs(counted - expected), tol["root_count"],
                         {"counted": counted, "expected": expected,
                          "rect": [[ll.real, ll.imag], [ur.real, ur.imag]]}))

    pair_err = 0.0
    pairs = complex_roots(p, k_max)
    for _, u in pairs:
        for z in (u, u.conjugate()):
            fv, _ = secular_complex_scaled(z, p.a, p.xi)
            dv, _ = _dsecular_du_scaled(z, p.a, p.xi)
            pair_err = max(pair_err, abs(fv) / max(abs(dv), 1.0))
        e1, e2 = -u * u, -(u.conjugate()) ** 2
        pair_err = max(pair_err, abs(e1.imag + e2.imag) / max(abs(e1), 1.0))
    checks.append(_check("conjugate_pairs", pair_err, tol["conjugate_pairs"],
                         {"pairs": [[u.real, u.imag] for _, u in pairs]}))

    worst, eps_info = 0.0, []
    for ep in fold_points(p.a, k_max):
        if ep.xi_c > max(p.xi, 0.0):
            continue
        before, after = conservation_counts(p.a, ep)
        worst = max(worst, abs(before - after))
        eps_info.append({"xi_c": ep.xi_c, "k_c": ep.k_c, "before": before, "after": after})
    checks.append(_check("root_count_conservation", worst, tol["root_count_conservation"],
                         {"exceptional_points": eps_info}))

    return {
        "params": {"a": p.a, "xi": p.xi, "k_max": k_max, "seed": seed},
        "tolerances": tol,
        "checks": checks,
        "violations": [c["name"] for c in checks if not c["passed"]],
        "passed": all(c["passed"] for c in checks),
    }


def conservation_counts(a: float, ep: ExceptionalPoint, rel: float = 1e-3):
    """Root counts in a box around ``i k_c`` just below and just above the fold."""
    lo = ModelParams(a, ep.xi_c * (1 - rel))
    roots = real_roots(lo, ep.k_c + 3.0)
    near = sorted(roots, key=lambda r: abs(r - ep.k_c))
    gap = abs(near[2] - ep.k_c) if len(near) > 2 else 1.0
    r = min(0.3, 0.5 * gap)
    rect = (complex(-r, ep.k_c - r), complex(r, ep.k_c + r))
    before = count_roots_rect(lo, rect).count
    after = count_roots_rect(lo.with_xi(ep.xi_c * (1 + rel)), rect).count
    return before, after


def with_replaced_ids(ep: ExceptionalPoint, ids) -> ExceptionalPoint:
    return dataclasses.replace(ep, branch_ids=tuple(ids))
