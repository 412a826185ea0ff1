"""Spectral curves xi(k), critical couplings, crossings and the a-atlas."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ConsistencyError, ParameterError, PtwellError, UnboundedCurveError
from .partition import (BoundaryType, LineKind, RationalPosition, SubInterval, classify,
                        partition, snap_position)
from .secular import mpoint_limit_xi_squared, xi_squared_array

__all__ = [
    "SpectralCurve",
    "Crossing",
    "CriticalEntry",
    "CriticalSequence",
    "AtlasRow",
    "AtlasResult",
    "golden_section_max",
    "trace_curve",
    "critical_coupling",
    "crossing_points",
    "numeric_limit_xi",
    "critical_sequence",
    "merging_pairs",
    "is_monotone",
    "atlas_min",
    "excitation_index",
    "thread_count",
]

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
# search horizon when collecting merging pairs
MAX_SEQUENCE_K = 2.0e4


@dataclass
class SpectralCurve:
    interval: SubInterval
    kind: LineKind
    a: float
    k: np.ndarray
    xi: np.ndarray
    xi_max: float = math.inf
    k_at_max: float | None = None

    @property
    def samples(self):
        return list(zip(self.k.tolist(), self.xi.tolist()))


@dataclass(frozen=True)
class Crossing:
    l: int
    P: int
    Q: int
    k_cross: float
    xi_cross: float


@dataclass(frozen=True)
class CriticalEntry:
    n: int
    xi_crit: float
    k_merge: float
    k_low: float
    k_high: float
    xi_cross: float | None = None


@dataclass
class CriticalSequence:
    a: float
    entries: list = field(default_factory=list)
    rational: RationalPosition | None = None

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class AtlasRow:
    a: float
    xi_min: float | None
    n_min: int | None
    error: str | None = None


@dataclass
class AtlasResult:
    a_lo: float
    a_hi: float
    step: float
    n_max: int
    rows: list
    a_star: float
    xi_star: float
    n_star: int
    grid_a: float
    grid_xi: float


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("PTWELL_THREADS", "1")))
    except ValueError:
        return 1


def excitation_index(k_level: float) -> int:
    """Excitation number of the unperturbed level ``k = (n+1) pi/2`` (ground state n=0)."""
    return int(round(2.0 * k_level / math.pi)) - 1


def golden_section_max(fun, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200):
    """Maximise a unimodal ``fun`` on ``[lo, hi]``; returns ``(x, fun(x))``."""
    x1 = hi - INVPHI * (hi - lo)
    x2 = lo + INVPHI * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INVPHI * (hi - lo)
            f2 = fun(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INVPHI * (hi - lo)
            f1 = fun(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def _log_xi2(k, a):
    return math.log(float(xi_squared_array(k, a)))


def _dlog_xi2(k, a):
    b = 1.0 - a
    return (2 * math.cos(2 * k) / math.sin(2 * k) - 2 * a * math.cos(2 * k * a) / math.sin(2 * k * a)
            + 2.0 / k - 2 * b * math.cos(k * b) / math.sin(k * b))


def _endpoint_xi(k, btype, a):
    if btype is BoundaryType.FIRST:
        return 0.0
    if btype is BoundaryType.SECOND:
        return math.inf
    return math.sqrt(mpoint_limit_xi_squared(k, a))


def trace_curve(sub: SubInterval, a: float, n_samples: int = 256) -> SpectralCurve:
    """Sample ``xi(k)`` at Chebyshev points of ``sub`` and attach endpoint limits."""
    if n_samples < 16:
        raise ParameterError("n_samples must be >= 16")
    a = snap_position(a)
    j = np.arange(n_samples)
    t = np.cos((2 * j + 1) * np.pi / (2 * n_samples))[::-1]
    k = 0.5 * (sub.lo + sub.hi) + 0.5 * (sub.hi - sub.lo) * t
    xi2 = xi_squared_array(k, a)
    if not np.all(np.isfinite(xi2)) or np.any(xi2 < 0):
        raise ConsistencyError(
            f"negative or non-finite xi^2 inside ({sub.lo}, {sub.hi}) for a={a}")
    ks = np.concatenate(([sub.lo], k, [sub.hi]))
    xis = np.concatenate(([_endpoint_xi(sub.lo, sub.lo_type, a)], np.sqrt(xi2),
                          [_endpoint_xi(sub.hi, sub.hi_type, a)]))
    curve = SpectralCurve(sub, classify(sub), a, ks, xis)
    if curve.kind is LineKind.FRAGILE:
        curve.xi_max, curve.k_at_max = critical_coupling(curve)
    return curve


def critical_coupling(curve: SpectralCurve) -> tuple[float, float]:
    """Maximum of ``xi(k)`` over the closed interval of a bounded curve.

    Golden-section search on ``log xi^2`` around the best sample, then a
    root of its derivative to polish ``k`` below 1e-12.  An M endpoint may
    carry the supremum.
    """
    if curve.kind is not LineKind.FRAGILE:
        raise UnboundedCurveError(f"{curve.kind.value} curve has no finite maximum")
    a = curve.a
    ks, xis = curve.k, curve.xi
    inner = xis[1:-1]
    i = int(np.argmax(inner)) + 1
    best_inner = float(xis[i])
    end_best = max(float(xis[0]), float(xis[-1]))
    if end_best >= best_inner:
        # only an M endpoint can beat the interior; it wins when xi still rises into it
        if xis[-1] >= xis[0] and _dlog_xi2(float(ks[-2]), a) > 0:
            return float(xis[-1]), float(ks[-1])
        if xis[0] > xis[-1] and _dlog_xi2(float(ks[1]), a) < 0:
            return float(xis[0]), float(ks[0])
    lo, hi = float(ks[i - 1]), float(ks[i + 1])
    k_gs, _ = golden_section_max(lambda x: _log_xi2(x, a), lo, hi, tol=1e-9 * max(1.0, hi))
    k_star = k_gs
    w = 1e-6 * max(1.0, k_gs)
    left, right = max(lo, k_gs - w), min(hi, k_gs + w)
    try:
        dl, dr = _dlog_xi2(left, a), _dlog_xi2(right, a)
        if dl > 0 > dr:
            k_star = brentq(_dlog_xi2, left, right, args=(a,), xtol=1e-15, rtol=1e-15)
    except (ValueError, ZeroDivisionError):
        pass
    xi_star = math.sqrt(float(xi_squared_array(k_star, a)))
    return max(xi_star, best_inner), (k_star if xi_star >= best_inner else float(ks[i]))


def crossing_points(r: RationalPosition, l_max: int) -> list[Crossing]:
    """Unavoided crossings at ``k = lQ pi/2`` for every ``l <= l_max`` with ``l(Q-P)`` odd."""
    if l_max < 1:
        raise ParameterError("l_max must be >= 1")
    P, Q = r.P, r.Q
    out = []
    for l in range(1, l_max + 1):
        if (l * (Q - P)) % 2 == 1:
            out.append(Crossing(l, P, Q, l * Q * math.pi / 2,
                                l * math.pi * Q**1.5 / (2 * math.sqrt(P))))
    return out


def numeric_limit_xi(a: float, k0: float, h: float = 1e-3) -> float:
    """Two-sided Richardson limit of ``xi(k)`` at ``k0`` evaluated from the curve formula."""
    def sym(step):
        return 0.5 * (math.sqrt(float(xi_squared_array(k0 - step, a)))
                      + math.sqrt(float(xi_squared_array(k0 + step, a))))
    return (4.0 * sym(h / 2) - sym(h)) / 3.0


def _pair_entries(part, n_samples, n_want):
    a = part.a
    entries = []
    subs = part.intervals
    i = 0
    while i < len(subs) and len(entries) < n_want:
        sub = subs[i]
        if classify(sub) is not LineKind.FRAGILE:
            i += 1
            continue
        if sub.lo_type is BoundaryType.FIRST and sub.hi_type is BoundaryType.FIRST:
            c = trace_curve(sub, a, n_samples)
            entries.append(CriticalEntry(excitation_index(sub.hi), c.xi_max, c.k_at_max,
                                         sub.lo, sub.hi))
            i += 1
            continue
        if (sub.hi_type is BoundaryType.MPOINT and i + 1 < len(subs)
                and subs[i + 1].lo_type is BoundaryType.MPOINT and subs[i + 1].lo == sub.hi):
            c, nxt = trace_curve(sub, a, n_samples), trace_curve(subs[i + 1], a, n_samples)
            best = c if c.xi_max >= nxt.xi_max else nxt
            entries.append(CriticalEntry(
                excitation_index(nxt.interval.hi), best.xi_max, best.k_at_max,
                sub.lo, nxt.interval.hi, xi_cross=float(c.xi[-1])))
            i += 2
            continue
        i += 1  # partner lies beyond k_max
    return entries


def merging_pairs(a: float, k_max: float, n_samples: int = 256) -> list:
    """Every merging pair whose upper level lies within ``k_max``."""
    return _pair_entries(partition(a, k_max), n_samples, math.inf)


def critical_sequence(a: float, n_max: int, n_samples: int = 256) -> CriticalSequence:
    """Critical couplings of the first ``n_max`` merging level pairs, lowest energy first.

    Each entry is labelled by the excitation ``n`` of the upper level of the
    pair (ground state n=0).  Two fragile lines joined at an M point form one
    line through the crossing; its maximum over both pieces is the critical
    coupling of the outer pair and the crossing value is kept alongside.
    """
    if n_max < 1:
        raise ParameterError("n_max must be >= 1")
    k_max = (n_max + 1) * math.pi
    while True:
        part = partition(a, k_max)
        entries = _pair_entries(part, n_samples, n_max)
        if len(entries) >= n_max or k_max >= MAX_SEQUENCE_K:
            return CriticalSequence(a, entries, part.rational)
        k_max = min(2 * k_max, MAX_SEQUENCE_K)


def is_monotone(seq: CriticalSequence) -> tuple[bool, int | None]:
    """Whether critical couplings are nondecreasing in n; else the n before the first drop."""
    if not seq.entries:
        raise ParameterError("empty critical sequence")
    ents = sorted(seq.entries, key=lambda e: e.n)
    for e0, e1 in zip(ents, ents[1:]):
        if e1.xi_crit < e0.xi_crit:
            return False, e0.n
    return True, None


def _min_crit(a, n_max):
    seq = critical_sequence(a, n_max)
    if not seq.entries:
        raise PtwellError(f"no fragile pair with n <= {n_max} at a={a}")
    e = min(seq.entries, key=lambda e: e.xi_crit)
    return e.xi_crit, e.n


def _atlas_row(a, n_max):
    try:
        xi, n = _min_crit(a, n_max)
        return AtlasRow(a, xi, n)
    except PtwellError as exc:
        return AtlasRow(a, None, None, f"{type(exc).__name__}: {exc}")


def atlas_min(a_lo: float, a_hi: float, step: float, n_max: int,
              threads: int | None = None, refine: bool = True) -> AtlasResult:
    """Grid scan of ``min_n xi_crit,n(a)`` followed by golden-section refinement in a."""
    if not (0 < a_lo <= a_hi < 1):
        raise ParameterError(f"need 0 < a_lo <= a_hi < 1, got {a_lo}, {a_hi}")
    if not step > 0:
        raise ParameterError("step must be positive")
    n_pts = int(math.floor((a_hi - a_lo) / step + 1e-9)) + 1
    grid = [round(a_lo + i * step, 12) for i in range(n_pts)]
    workers = threads or thread_count()
    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda a: _atlas_row(a, n_max), grid))
    else:
        rows = [_atlas_row(a, n_max) for a in grid]
    good = [(r.xi_min, i) for i, r in enumerate(rows) if r.xi_min is not None]
    if not good:
        raise PtwellError("every atlas grid point failed")
    gxi, gi = min(good)
    grow = rows[gi]
    a_star, xi_star, n_star = grow.a, gxi, grow.n_min
    if refine and len(grid) > 1:
        lo = grid[max(gi - 1, 0)]
        hi = grid[min(gi + 1, len(grid) - 1)]

        def neg(a):
            try:
                return -_min_crit(a, n_max)[0]
            except PtwellError:
                return -math.inf
        a_ref, f_ref = golden_section_max(neg, lo, hi, tol=1e-8)
        if -f_ref <= xi_star:
            a_star, (xi_star, n_star) = a_ref, _min_crit(a_ref, n_max)
    return AtlasResult(a_lo, a_hi, step, n_max, rows, a_star, xi_star, n_star, grow.a, gxi)
