"""Real root finding, branch continuation in xi, exceptional points and root counting.

Real branches ``k(xi)`` are continued with a secant/tangent predictor and a
Newton corrector on the real secular function.  Since ``xi(k)`` is single
valued, two real branches can meet only at a fold of ``xi(k)`` (a genuine
exceptional point, after which the pair is complex) or where a branch passes
a vertical line ``k = lQ pi/2`` of a rational position (an unavoided
crossing, after which both stay real).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import BoundaryRootError, ContinuationError, ParameterError, ResourceGuardError
from .partition import rational_approx, snap_position
from .secular import (ModelParams, _dsecular_du_scaled, _g_derivs, d_secular,
                      secular_complex_scaled, secular_real)

__all__ = [
    "Branch",
    "ExceptionalPoint",
    "RootCount",
    "real_roots",
    "track_branch",
    "detect_ep",
    "complex_continuation",
    "count_roots_rect",
    "mpoint_crossing_xi",
    "newton_complex",
    "MAX_ROOT_K",
]

MAX_ROOT_K = 1.0e5
_GRID_PER_PI = 48
_EP_RESIDUAL = 1e-10
_BRANCH_RESIDUAL = 1e-10
# corrector may move this far (in k) from the predictor; keeps it on its own branch
_PREDICTOR_SLACK = 1e-4


@dataclass
class ExceptionalPoint:
    """Double real root ``f = df/dk = 0``.

    ``kind`` is ``"fold"`` for a genuine exceptional point (``df/dxi != 0``,
    the pair turns complex beyond ``xi_c``) and ``"crossing"`` where a branch
    meets a vertical M line and both levels stay real.
    """

    xi_c: float
    k_c: float
    branch_ids: tuple = (0, 1)
    kind: str = "fold"
    f_xi: float = 0.0
    f_kk: float = 0.0
    residual: float = 0.0


@dataclass
class Branch:
    id: int
    start_k: float
    xi: list = field(default_factory=list)
    u: list = field(default_factory=list)
    status: list = field(default_factory=list)
    ep: ExceptionalPoint | None = None
    halted: bool = False
    crossings: list = field(default_factory=list)

    def append(self, xi, u, status):
        self.xi.append(float(xi))
        self.u.append(complex(u))
        self.status.append(status)

    @property
    def E(self) -> np.ndarray:
        return -np.asarray(self.u, dtype=complex) ** 2

    @property
    def k(self) -> np.ndarray:
        return np.asarray(self.u, dtype=complex).imag

    @property
    def points(self):
        return [(x, u, -u * u) for x, u in zip(self.xi, self.u)]

    def __len__(self):
        return len(self.xi)


@dataclass(frozen=True)
class RootCount:
    lower_left: complex
    upper_right: complex
    count: int
    winding: float
    dilations: int = 0


def _f_vec(k, a, xi):
    g, _, _ = _g_derivs(k, a)
    return np.sin(2 * k) + xi * xi * g


def _fk_vec(k, a, xi):
    _, dg, _ = _g_derivs(k, a)
    return 2 * np.cos(2 * k) + xi * xi * dg


def _mpoints(a, k_max):
    r = rational_approx(a)
    if r is None:
        return []
    step = r.Q * math.pi / 2
    return [l * step for l in range(1, int(math.floor(k_max / step + 1e-12)) + 1)]


def real_roots(p: ModelParams, k_max: float, *, grid_per_pi: int = _GRID_PER_PI) -> list[float]:
    """All real roots of the secular function in ``(0, k_max]``, ascending.

    Sign changes are bracketed on a uniform grid resolving the fastest
    oscillation (frequency 2).  Cells without a sign change but with an
    extremum of ``f`` are split at the extremum so that close root pairs near
    a fold are still found.  M points are inserted exactly.
    """
    if not k_max > 0:
        raise ParameterError(f"k_max must be positive, got {k_max!r}")
    if k_max > MAX_ROOT_K:
        raise ResourceGuardError(f"k_max={k_max} exceeds cap {MAX_ROOT_K}")
    a, xi = snap_position(p.a), p.xi
    n = max(16, int(math.ceil(k_max / math.pi * grid_per_pi)))
    k = np.linspace(k_max / n * 1e-3, k_max, n + 1)
    fv = _f_vec(k, a, xi)
    dv = _fk_vec(k, a, xi)

    def f(x):
        return secular_real(x, p)

    def fk(x):
        return d_secular(x, p, "k")

    roots = []
    for i in range(n):
        k0, k1, f0, f1 = k[i], k[i + 1], fv[i], fv[i + 1]
        if f0 == 0.0:
            roots.append(float(k0))
            continue
        if f0 * f1 < 0:
            roots.append(brentq(f, k0, k1, xtol=1e-15, rtol=1e-15))
        elif f1 != 0.0 and dv[i] * dv[i + 1] < 0:
            ke = brentq(fk, k0, k1, xtol=1e-15, rtol=1e-15)
            fe = f(ke)
            if fe * f0 < 0:
                roots.append(brentq(f, k0, ke, xtol=1e-15, rtol=1e-15))
                roots.append(brentq(f, ke, k1, xtol=1e-15, rtol=1e-15))
            elif fe == 0.0:
                roots.append(ke)
    if fv[-1] == 0.0:
        roots.append(float(k[-1]))
    mps = _mpoints(a, k_max)
    if mps:
        roots = [r for r in roots if min(abs(r - m) for m in mps) > 1e-9 * max(1.0, r)]
        roots.extend(mps)
    roots.sort()
    out = []
    for r in roots:
        if not out or r - out[-1] > 1e-13 * max(1.0, r):
            out.append(float(r))
    return out


def _newton_real(k, p, tol=1e-14, max_iter=12):
    """Newton on f(., xi); returns (k, converged, contraction)."""
    steps = []
    for _ in range(max_iter):
        fk = d_secular(k, p, "k")
        if fk == 0.0 or not math.isfinite(fk):
            return k, False, math.inf
        dk = secular_real(k, p) / fk
        k -= dk
        steps.append(abs(dk))
        if abs(dk) <= tol * max(1.0, abs(k)):
            ratio = steps[1] / steps[0] if len(steps) > 1 and steps[0] > 0 else 0.0
            return k, True, ratio
        if len(steps) > 1 and steps[-1] > steps[-2] and steps[-1] > 1e-8:
            break
    return k, False, math.inf


def mpoint_crossing_xi(k_m: float, a: float) -> float | None:
    """Coupling at which a curve meets the vertical line ``k = k_m`` (``df/dk = 0`` there)."""
    _, dg, _ = _g_derivs(k_m, a)
    val = -2 * math.cos(2 * k_m) / dg
    return math.sqrt(val) if val > 0 and math.isfinite(val) else None


def _is_mpoint(k, a, tol=1e-9):
    return any(abs(k - m) <= tol * max(1.0, k) for m in _mpoints(a, k + 1.0))


def _cross_mline(k_m, xc, xi_new, p, a):
    """Point on the non-vertical line through the crossing ``(k_m, xc)`` at ``xi_new``."""
    if xi_new <= xc:
        return k_m
    pc = p.with_xi(xc)
    r = -2 * d_secular(k_m, pc, "kxi") / d_secular(k_m, pc, "kk")
    k_pred = k_m + r * (xi_new - xc)
    k_new, ok, _ = _newton_real(k_pred, p.with_xi(xi_new))
    if ok and (k_new - k_m) * (k_pred - k_m) > 0:
        return k_new
    return None


def track_branch(a: float, k0: float, xi_schedule, *, branch_id: int = 0,
                 h_min: float = 1e-12, max_substeps: int = 200_000) -> Branch:
    """Continue the real root ``k0`` (a root at ``xi_schedule[0]``) over the schedule.

    Passing an M line is handled in closed form and recorded in
    ``branch.crossings``.  When the corrector stalls (three steps in a row
    with contraction above 0.5, or the step underflows ``h_min``) near a
    fold, tracking stops with ``branch.halted = True``; the last point is
    then close to the exceptional point.
    """
    sched = [float(x) for x in xi_schedule]
    if not sched:
        raise ParameterError("empty schedule")
    if any(x1 <= x0 for x0, x1 in zip(sched, sched[1:])):
        raise ParameterError("schedule must be strictly increasing")
    a = snap_position(a)
    br = Branch(branch_id, float(k0))
    p = ModelParams(a, sched[0])
    if _is_mpoint(k0, a):
        for x in sched:
            br.append(x, 1j * k0, "real")
        return br
    k, ok, _ = _newton_real(float(k0), p)
    if (not ok or abs(secular_real(k, p)) > 1e-8 * max(1.0, k)
            or abs(k - k0) > 1e-6 * max(1.0, k0)):
        raise ContinuationError(f"k0={k0} is not a root at xi={sched[0]}")
    br.append(sched[0], 1j * k, "real")
    mps = _mpoints(a, 4.0 * k + 10.0)
    hist = [(sched[0], k)]
    xi_cur = sched[0]
    h = (sched[1] - sched[0]) if len(sched) > 1 else 0.0
    h_grow = h
    slow = 0
    substeps = 0

    def halt():
        br.halted = True
        if xi_cur > br.xi[-1]:
            br.append(xi_cur, 1j * k, "real")
        return br

    for target in sched[1:]:
        while xi_cur < target:
            substeps += 1
            if substeps > max_substeps:
                raise ContinuationError("substep budget exhausted", xi_cur, 1j * k)
            if h < h_min * max(1.0, xi_cur):
                # the corrector cannot get further: the last point sits next to a fold
                return halt()
            dxi = min(h, target - xi_cur)
            xi_new = xi_cur + dxi
            if len(hist) >= 2:
                (x0, k_0), (x1, k_1) = hist[-2], hist[-1]
                slope = (k_1 - k_0) / (x1 - x0)
            else:
                pc = p.with_xi(xi_cur)
                fk = d_secular(k, pc, "k")
                slope = -d_secular(k, pc, "xi") / fk if fk != 0 else 0.0
            k_pred = k + slope * dxi
            k_m = next((m for m in mps if (k - m) * (k_pred - m) <= 0), None)
            if k_m is not None:
                xc = mpoint_crossing_xi(k_m, a)
                if xc is None or not xi_cur < xc <= target:
                    h *= 0.5
                    continue
                xi_new = min(max(xi_new, xc), target)
                k_new = _cross_mline(k_m, xc, xi_new, p, a)
                if k_new is None:
                    h *= 0.5
                    continue
                br.crossings.append((xc, k_m))
                xi_cur, k = xi_new, k_new
                hist = [(xc, k_m), (xi_cur, k)] if xi_cur > xc else [(xi_cur, k)]
                slow = 0
                continue
            k_new, ok, ratio = _newton_real(k_pred, p.with_xi(xi_new))
            dev = abs(k_new - k_pred)
            allowed = 0.25 * abs(k_pred - k) + _PREDICTOR_SLACK
            if ok and dev <= allowed:
                slow = slow + 1 if ratio > 0.5 else 0
                xi_cur, k = xi_new, k_new
                hist = [hist[-1], (xi_cur, k)]
                if slow >= 3:
                    return halt()
                if dev <= 0.05 * allowed:
                    h = min(h * 1.5, h_grow)
                continue
            h *= 0.5
        br.append(target, 1j * k, "real")
    return br


def _double_root_newton(a, k, xi, max_iter=60):
    for _ in range(max_iter):
        p = ModelParams(a, abs(xi))
        f = secular_real(k, p)
        fk = d_secular(k, p, "k")
        fkk = d_secular(k, p, "kk")
        fx = d_secular(k, p, "xi")
        fkx = d_secular(k, p, "kxi")
        det = fk * fkx - fx * fkk
        if det == 0 or not math.isfinite(det):
            return None
        dk = (f * fkx - fx * fk) / det
        dx = (fk * fk - f * fkk) / det
        scale = max(1.0, abs(dk) / 0.2, abs(dx) / 0.5)
        k -= dk / scale
        xi = abs(xi - dx / scale)
        if abs(dk) < 1e-15 * max(1.0, k) and abs(dx) < 1e-15 * max(1.0, xi):
            break
    return k, xi


def _ep_at(a, k, xi, ids, kind):
    p = ModelParams(a, xi)
    res = max(abs(secular_real(k, p)), abs(d_secular(k, p, "k")))
    return ExceptionalPoint(float(xi), float(k), tuple(ids), kind,
                            float(d_secular(k, p, "xi")), float(d_secular(k, p, "kk")), float(res))


def detect_ep(a: float, branch_pair, xi_bracket) -> ExceptionalPoint | None:
    """Locate the double root where two real branches meet, or ``None``.

    Seeds from the closest approach of the pair.  If one branch is a vertical
    M line the meeting point is the crossing ``df/dk(k_M, xi) = 0``;
    otherwise ``f = df/dk = 0`` is solved by Newton in ``(k, xi)``.
    """
    a = snap_position(a)
    b1, b2 = branch_pair
    lo, hi = float(xi_bracket[0]), float(xi_bracket[1])
    ids = (b1.id, b2.id)
    m1 = dict(zip(b1.xi, b1.k))
    m2 = dict(zip(b2.xi, b2.k))
    common = sorted(set(m1) & set(m2))
    if common:
        x_seed = min(common, key=lambda x: (abs(m1[x] - m2[x]), -x))
        k_seed = 0.5 * (m1[x_seed] + m2[x_seed])
    else:
        x_seed = max(b1.xi[-1], b2.xi[-1])
        k_seed = 0.5 * (b1.k[-1] + b2.k[-1])
    for b in (b1, b2):
        ks = np.asarray(b.k)
        if len(ks) > 1 and np.ptp(ks) == 0.0 and _is_mpoint(float(ks[0]), a):
            k_m = float(ks[0])
            xc = mpoint_crossing_xi(k_m, a)
            if xc is None or not lo <= xc <= hi:
                return None
            return _ep_at(a, k_m, xc, ids, "crossing")
    sol = _double_root_newton(a, k_seed, x_seed)
    if sol is None:
        return None
    k_c, xi_c = sol
    if not lo <= xi_c <= hi:
        return None
    ep = _ep_at(a, k_c, xi_c, ids, "fold")
    if ep.residual > _EP_RESIDUAL * max(1.0, xi_c**2):
        return None
    if abs(ep.f_xi) < 1e-8 * max(1.0, xi_c):
        ep.kind = "crossing"
    return ep


def newton_complex(u, p: ModelParams, tol=1e-14, max_iter=60):
    """Complex Newton on the scaled secular function; returns ``(u, residual)``."""
    u = complex(u)
    for _ in range(max_iter):
        fv, _ = secular_complex_scaled(u, p.a, p.xi)
        dv, _ = _dsecular_du_scaled(u, p.a, p.xi)
        if dv == 0:
            break
        du = fv / dv
        if abs(du) > 0.5:
            du *= 0.5 / abs(du)
        u -= du
        if abs(du) <= tol * max(1.0, abs(u)):
            break
    return u, abs(secular_complex_scaled(u, p.a, p.xi)[0])


def complex_continuation(a: float, ep: ExceptionalPoint, xi_schedule):
    """Follow the conjugate pair born at a fold over ``xi_schedule`` (starting at ``xi_c``).

    Seeds use the square-root unfolding ``dk = +/- sqrt(-2 f_xi dxi / f_kk)``
    and complex Newton polishes each point.  The second branch stores the
    complex conjugate of the first, so its energies are the conjugates.
    """
    if ep.kind != "fold":
        raise ContinuationError(
            f"xi={ep.xi_c:.12g} is a crossing with an M line; both levels stay real",
            ep.xi_c, 1j * ep.k_c)
    sched = [float(x) for x in xi_schedule]
    if not sched or sched[0] < ep.xi_c - 1e-12:
        raise ParameterError("schedule must start at xi_c")
    id1, id2 = (ep.branch_ids + (1, 2))[:2] if len(ep.branch_ids) >= 2 else (1, 2)
    b1, b2 = Branch(id1, ep.k_c, ep=ep), Branch(id2, ep.k_c, ep=ep)
    coef = -2.0 * ep.f_xi / ep.f_kk
    prev = []
    for x in sched:
        dxi = x - ep.xi_c
        if dxi <= 0:
            b1.append(x, 1j * ep.k_c, "real")
            b2.append(x, 1j * ep.k_c, "real")
            continue
        s = math.sqrt(dxi)
        if len(prev) >= 2:
            (s0, u0), (s1, u1) = prev[-2], prev[-1]
            seed = u1 + (u1 - u0) / (s1 - s0) * (s - s1)
        else:
            dk = cmath.sqrt(coef * dxi)
            # choose the root with Re u > 0: u = i(k_c + dk)
            seed = 1j * (ep.k_c + dk)
            if seed.real < 0:
                seed = 1j * (ep.k_c - dk)
        u, res = newton_complex(seed, ModelParams(a, x))
        if res > _BRANCH_RESIDUAL or not math.isfinite(res):
            raise ContinuationError(f"complex Newton failed at xi={x}",
                                    b1.xi[-1] if b1.xi else None, b1.u[-1] if b1.u else None)
        if u.real < 0:
            u = -u.conjugate()
        status = "complex" if abs(u.real) > 1e-12 * max(1.0, abs(u)) else "real"
        b1.append(x, u, status)
        b2.append(x, u.conjugate(), status)
        prev.append((s, u))
    return b1, b2


def _g_scaled(u, a, xi):
    fv, _ = secular_complex_scaled(u, a, xi)
    return u * u * fv, abs(fv)


def _winding(a, xi, ll, ur, min_mag):
    corners = [ll, complex(ur.real, ll.imag), ur, complex(ll.real, ur.imag), ll]
    total = 0.0
    smallest = math.inf
    for c0, c1 in zip(corners, corners[1:]):
        length = abs(c1 - c0)
        n = max(16, int(math.ceil(32 * length)))
        ts = np.linspace(0.0, 1.0, n + 1)
        pts = [c0 + (c1 - c0) * t for t in ts]
        vals = [_g_scaled(z, a, xi) for z in pts]
        for (z0, (g0, m0)), (z1, (g1, m1)) in zip(zip(pts, vals), zip(pts[1:], vals[1:])):
            stack = [(z0, g0, z1, g1, 0)]
            smallest = min(smallest, m0, m1)
            while stack:
                za, ga, zb, gb, depth = stack.pop()
                if ga == 0 or gb == 0:
                    return None, 0.0
                dphi = cmath.phase(gb / ga)
                if abs(dphi) >= math.pi / 2 and depth < 40:
                    zm = 0.5 * (za + zb)
                    gm, mm = _g_scaled(zm, a, xi)
                    smallest = min(smallest, mm)
                    stack.append((zm, gm, zb, gb, depth + 1))
                    stack.append((za, ga, zm, gm, depth + 1))
                    continue
                total += dphi
    if smallest < min_mag:
        return None, smallest
    return total / (2 * math.pi), smallest


def count_roots_rect(p: ModelParams, rect, *, dilation: float = 1.1, max_dilations: int = 3,
                     min_mag: float = 1e-8) -> RootCount:
    """Number of roots of ``F`` inside a rectangle of the u plane.

    The winding of ``G(u) = u^2 F(u)`` (the matching determinant) is tracked
    along the boundary with phase increments below pi/2; ``G`` has a zero of
    order 3 at ``u = 0`` which is removed when the origin is enclosed.  If
    ``|F|`` (scaled) drops below ``min_mag`` on the contour the rectangle is
    dilated about its centre by ``dilation`` and retried.
    """
    ll, ur = complex(rect[0]), complex(rect[1])
    if not (ur.real > ll.real and ur.imag > ll.imag):
        raise ParameterError("rect must be (lower_left, upper_right)")
    for attempt in range(max_dilations + 1):
        w, _ = _winding(p.a, p.xi, ll, ur, min_mag)
        if w is not None:
            count = int(round(w))
            if abs(w - count) > 1e-3:
                raise ContinuationError(f"non-integer winding {w}")
            if ll.real < 0 < ur.real and ll.imag < 0 < ur.imag:
                count -= 3
            return RootCount(ll, ur, count, w, attempt)
        c = 0.5 * (ll + ur)
        ll, ur = c + (ll - c) * dilation, c + (ur - c) * dilation
    raise BoundaryRootError(f"root on contour after {max_dilations} dilations")
