"""Sign structure of the spectral curve: subintervals of the admissible set.

Real eigenvalues at coupling ``xi > 0`` live on

    J = (J_a^+ & I^-) | (J_a^- & I^+) | M

where ``I^{+/-}`` is where ``+/- sin 2k > 0``, ``J_a^{+/-}`` where
``+/- sin 2ka > 0`` and ``M`` the common zeros of both sines (only present
for rational ``a = P/Q``, at ``k = lQ pi/2``).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParameterError, ResourceGuardError

__all__ = [
    "BoundaryType",
    "LineKind",
    "RationalPosition",
    "SubInterval",
    "MPoint",
    "Partition",
    "rational_approx",
    "snap_position",
    "partition",
    "classify",
    "sign_sets",
    "DEFAULT_MAX_Q",
    "DEFAULT_RATIONAL_TOL",
    "MAX_GRID_ZEROS",
]

DEFAULT_MAX_Q = 1000
DEFAULT_RATIONAL_TOL = 1e-9
MAX_GRID_ZEROS = 2_000_000


class BoundaryType(enum.Enum):
    FIRST = "first"  # sin 2k = 0, xi -> 0
    SECOND = "second"  # sin 2ka = 0, xi -> infinity
    MPOINT = "mpoint"  # both vanish


class LineKind(enum.Enum):
    FRAGILE = "fragile"
    ROBUST_MIXED = "robust-mixed"
    ROBUST_VERTICAL = "robust-vertical"


@dataclass(frozen=True)
class RationalPosition:
    P: int
    Q: int

    def __post_init__(self):
        if not (0 < self.P < self.Q) or math.gcd(self.P, self.Q) != 1:
            raise ParameterError(f"need coprime 0 < P < Q, got {self.P}/{self.Q}")

    @property
    def value(self) -> float:
        return self.P / self.Q


@dataclass(frozen=True)
class SubInterval:
    lo: float
    hi: float
    lo_type: BoundaryType
    hi_type: BoundaryType
    index: int = 0

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)


@dataclass(frozen=True)
class MPoint:
    k: float
    l: int


@dataclass(frozen=True)
class Partition:
    a: float
    k_max: float
    intervals: list = field(default_factory=list)
    mpoints: list = field(default_factory=list)
    rational: RationalPosition | None = None

    def __iter__(self):
        # allows ``intervals, mpoints = partition(a, k_max)``
        yield self.intervals
        yield self.mpoints


def rational_approx(a: float, max_Q: int = DEFAULT_MAX_Q,
                    tol: float = DEFAULT_RATIONAL_TOL) -> RationalPosition | None:
    """Best rational ``P/Q`` with ``Q <= max_Q`` if it lies within ``tol`` of ``a``."""
    if not 0 < a < 1:
        raise ParameterError(f"position a must satisfy 0 < a < 1, got {a!r}")
    if max_Q < 2:
        raise ParameterError("max_Q must be >= 2")
    frac = Fraction(a).limit_denominator(max_Q)
    if frac.numerator <= 0 or frac.numerator >= frac.denominator:
        return None
    if abs(a - frac.numerator / frac.denominator) >= tol:
        return None
    return RationalPosition(frac.numerator, frac.denominator)


def snap_position(a: float) -> float:
    """``P/Q`` when ``a`` is detected as rational, otherwise ``a`` unchanged."""
    r = rational_approx(a)
    return a if r is None else r.value


def _zero_events(a, k_max, rational, max_zeros):
    eps = 1e-12 * max(1.0, k_max)
    n1 = int(math.floor((k_max + eps) / (math.pi / 2)))
    step2 = math.pi / (2 * a)
    n2 = int(math.floor((k_max + eps) / step2))
    if n1 + n2 > max_zeros:
        raise ResourceGuardError(
            f"k_max={k_max} needs {n1 + n2} grid zeros (cap {max_zeros})")
    events = {}
    for n in range(1, n1 + 1):
        events[("n", n)] = (n * math.pi / 2, BoundaryType.FIRST)
    if rational is None:
        for m in range(1, n2 + 1):
            events[("m", m)] = (m * step2, BoundaryType.SECOND)
    else:
        P, Q = rational.P, rational.Q
        m = 1
        while True:
            # zero of sin(2k P/Q) at k = m Q pi / (2P); coincides with n pi/2 iff P | m
            k = m * Q * math.pi / (2 * P)
            if k > k_max + eps:
                break
            if m % P == 0:
                n = m * Q // P
                events[("n", n)] = (n * math.pi / 2, BoundaryType.MPOINT)
            else:
                events[("m", m)] = (k, BoundaryType.SECOND)
            m += 1
    return sorted(events.values(), key=lambda e: e[0])


def partition(a: float, k_max: float, *, max_Q: int = DEFAULT_MAX_Q,
              tol: float = DEFAULT_RATIONAL_TOL,
              max_zeros: int = MAX_GRID_ZEROS) -> Partition:
    """Split ``J & (0, k_max]`` into open subintervals plus the M points.

    Only subintervals whose upper end lies within ``k_max`` are returned, so
    enlarging ``k_max`` never changes the intervals already present.
    """
    if not 0 < a < 1:
        raise ParameterError(f"position a must satisfy 0 < a < 1, got {a!r}")
    if not k_max > 0 or not math.isfinite(k_max):
        raise ParameterError(f"k_max must be positive and finite, got {k_max!r}")
    rational = rational_approx(a, max_Q, tol)
    if rational is not None:
        a = rational.value
    events = _zero_events(a, k_max, rational, max_zeros)

    intervals, mpoints = [], []
    prev_k, prev_t = 0.0, None
    for k, t in events:
        if prev_t is not None:
            mid = 0.5 * (prev_k + k)
            if math.sin(2 * mid) * math.sin(2 * mid * a) < 0:
                intervals.append(SubInterval(prev_k, k, prev_t, t, len(intervals)))
        if t is BoundaryType.MPOINT:
            mpoints.append(MPoint(k, int(round(2 * k / (rational.Q * math.pi)))))
        prev_k, prev_t = k, t
    return Partition(a, k_max, intervals, mpoints, rational)


def classify(item) -> LineKind:
    """Line kind of a subinterval, or ROBUST_VERTICAL for an M point.

    A subinterval is fragile when neither end is of the second type; an M
    endpoint carries the finite crossing limit, so such a line stays bounded.
    """
    if isinstance(item, MPoint):
        return LineKind.ROBUST_VERTICAL
    if BoundaryType.SECOND in (item.lo_type, item.hi_type):
        return LineKind.ROBUST_MIXED
    return LineKind.FRAGILE


def _runs(k_max, step):
    out, lo, sign = [], 0.0, 1
    n = 1
    while lo < k_max:
        hi = min(n * step, k_max)
        out.append((sign, lo, hi))
        lo, sign, n = hi, -sign, n + 1
    return out


def sign_sets(a: float, k_max: float) -> dict:
    """Open intervals of ``I^+, I^-, J_a^+, J_a^-`` within ``(0, k_max]``."""
    res = {"I+": [], "I-": [], "J+": [], "J-": []}
    for sign, lo, hi in _runs(k_max, math.pi / 2):
        res["I+" if sign > 0 else "I-"].append((lo, hi))
    for sign, lo, hi in _runs(k_max, math.pi / (2 * a)):
        res["J+" if sign > 0 else "J-"].append((lo, hi))
    return res
