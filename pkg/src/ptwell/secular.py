"""Secular functions of the two-delta PT-symmetric square well.

The Hamiltonian is ``-d^2/dx^2 - i xi delta(x+a) + i xi delta(x-a)`` on (-1, 1)
with Dirichlet ends.  Writing ``E = -u**2`` the eigenvalue condition is
``F(u) = 0`` with

    F(u) = sinh(2u) + xi^2/(4u^2) * B(u),
    B(u) = sinh(4ua - 2u) + sinh(2u) - 2 sinh(2ua).

On the imaginary axis ``u = ik`` this reduces to ``F(ik) = i f(k)``,

    f(k) = sin(2k) + xi^2/k^2 * sin(2ka) * sin(k(1-a))^2,

and solving ``f = 0`` for the coupling gives the spectral curve

    xi^2(k) = -sin(2k)/sin(2ka) * k^2/sin(k(1-a))^2.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "ModelParams",
    "ScaledValue",
    "Marker",
    "SERIES_RADIUS",
    "bracket_B",
    "secular_complex",
    "secular_complex_scaled",
    "secular_real",
    "xi_squared_of_k",
    "xi_squared_array",
    "mpoint_limit_xi_squared",
    "d_secular",
    "scaled_residual",
]

# |u| below which B(u) is summed as a Taylor series
SERIES_RADIUS = 0.5
_SERIES_TERMS = 13  # odd powers u^3 .. u^27
_SINE_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Position ``a`` of the interactions and their coupling ``xi``."""

    a: float
    xi: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.a < 1.0) or not math.isfinite(self.a):
            raise ParameterError(f"position a must satisfy 0 < a < 1, got {self.a!r}")
        if not (self.xi >= 0.0) or not math.isfinite(self.xi):
            raise ParameterError(f"coupling xi must be finite and >= 0, got {self.xi!r}")

    def with_xi(self, xi: float) -> "ModelParams":
        return ModelParams(self.a, xi)


@dataclass(frozen=True)
class ScaledValue:
    """A complex number stored as ``mantissa * exp(log_scale)``.

    ``|mantissa|`` lies in [1/2, 2) unless the value is exactly zero, in which
    case the mantissa is 0 and ``log_scale`` keeps the reference scale.
    """

    mantissa: complex
    log_scale: float

    @classmethod
    def from_scaled(cls, v: complex, log_scale: float) -> "ScaledValue":
        if v == 0:
            return cls(0j, log_scale)
        _, e = math.frexp(abs(v))
        return cls(complex(v) / 2.0**e, log_scale + e * math.log(2.0))

    @property
    def value(self) -> complex:
        if self.mantissa == 0:
            return 0j
        return self.mantissa * math.exp(self.log_scale)

    def relative_abs(self, log_ref: float) -> float:
        """Return ``|value| * exp(-log_ref)`` without overflow."""
        if self.mantissa == 0:
            return 0.0
        return abs(self.mantissa) * math.exp(self.log_scale - log_ref)

    def __abs__(self) -> float:
        return self.relative_abs(0.0)

    def __neg__(self) -> "ScaledValue":
        return ScaledValue(-self.mantissa, self.log_scale)

    def conjugate(self) -> "ScaledValue":
        return ScaledValue(self.mantissa.conjugate(), self.log_scale)


class Marker(enum.Enum):
    """Non-numeric outcomes of :func:`xi_squared_of_k`."""

    ANY_XI = "any-xi"
    OUTSIDE = "outside-domain"


def _series_coefficients(a: float) -> list[float]:
    # B(u) = sum_j c_j u^(2j+1), j >= 1; the linear coefficient vanishes identically
    coeffs = [8.0 * a * (1.0 - a) ** 2]
    for j in range(2, _SERIES_TERMS + 1):
        n = 2 * j + 1
        c = ((4.0 * a - 2.0) ** n + 2.0**n - 2.0 * (2.0 * a) ** n) / math.factorial(n)
        coeffs.append(c)
    return coeffs


def _b_over_u2_series(u: complex, a: float) -> complex:
    # B(u)/u^2 = sum_j c_j u^(2j-1)
    u2 = u * u
    acc = 0j
    for c in reversed(_series_coefficients(a)):
        acc = acc * u2 + c
    return acc * u


def _db_over_u2_series(u: complex, a: float) -> complex:
    u2 = u * u
    acc = 0j
    coeffs = _series_coefficients(a)
    for j in range(len(coeffs), 0, -1):
        acc = acc * u2 + (2 * j - 1) * coeffs[j - 1]
    return acc


def _sinh_s(z: complex, s: float) -> complex:
    return 0.5 * (cmath.exp(z - s) - cmath.exp(-z - s))


def _cosh_s(z: complex, s: float) -> complex:
    return 0.5 * (cmath.exp(z - s) + cmath.exp(-z - s))


def bracket_B(u: complex, a: float) -> complex:
    """Return ``sinh(4ua-2u) + sinh(2u) - 2 sinh(2ua)``.

    Inside ``|u| < SERIES_RADIUS`` the odd Taylor series is used; the direct
    form loses about three digits there to cancellation.
    """
    u = complex(u)
    if abs(u) < SERIES_RADIUS:
        return _b_over_u2_series(u, a) * u * u
    return cmath.sinh(4 * u * a - 2 * u) + cmath.sinh(2 * u) - 2 * cmath.sinh(2 * u * a)


def _bracket_B_scaled(u: complex, a: float, s: float) -> complex:
    return _sinh_s(4 * u * a - 2 * u, s) + _sinh_s(2 * u, s) - 2 * _sinh_s(2 * u * a, s)


def _dbracket_B_scaled(u: complex, a: float, s: float) -> complex:
    return ((4 * a - 2) * _cosh_s(4 * u * a - 2 * u, s) + 2 * _cosh_s(2 * u, s)
            - 4 * a * _cosh_s(2 * u * a, s))


def secular_complex_scaled(u: complex, a: float, xi: float) -> tuple[complex, float]:
    """Return ``(F(u) * exp(-s), s)`` with ``s = 2|Re u|``.

    ``exp(2|Re u|)`` bounds the growth of every sinh term, so the first
    component is O(1 + xi^2/|u|) and never overflows.
    """
    u = complex(u)
    s = 2.0 * abs(u.real)
    xi2 = xi * xi
    if abs(u) < SERIES_RADIUS:
        val = _sinh_s(2 * u, s) + 0.25 * xi2 * _b_over_u2_series(u, a) * math.exp(-s)
    else:
        val = _sinh_s(2 * u, s) + xi2 / (4 * u * u) * _bracket_B_scaled(u, a, s)
    return val, s


def _dsecular_du_scaled(u: complex, a: float, xi: float) -> tuple[complex, float]:
    u = complex(u)
    s = 2.0 * abs(u.real)
    xi2 = xi * xi
    if abs(u) < SERIES_RADIUS:
        d = 2 * _cosh_s(2 * u, s) + 0.25 * xi2 * _db_over_u2_series(u, a) * math.exp(-s)
    else:
        b = _bracket_B_scaled(u, a, s)
        db = _dbracket_B_scaled(u, a, s)
        d = 2 * _cosh_s(2 * u, s) + 0.25 * xi2 * (db / (u * u) - 2 * b / u**3)
    return d, s


def _dsecular_dxi_scaled(u: complex, a: float, xi: float) -> tuple[complex, float]:
    u = complex(u)
    s = 2.0 * abs(u.real)
    if abs(u) < SERIES_RADIUS:
        d = 0.5 * xi * _b_over_u2_series(u, a) * math.exp(-s)
    else:
        d = 0.5 * xi * _bracket_B_scaled(u, a, s) / (u * u)
    return d, s


def secular_complex(u: complex, p: ModelParams) -> ScaledValue:
    """Evaluate ``F(u)`` in overflow-safe scaled form."""
    v, s = secular_complex_scaled(u, p.a, p.xi)
    return ScaledValue.from_scaled(v, s)


def scaled_residual(u: complex, p: ModelParams) -> float:
    """``|F(u)| exp(-2|Re u|)``, the magnitude used for root acceptance."""
    return abs(secular_complex_scaled(u, p.a, p.xi)[0])


def secular_real(k: float, p: ModelParams) -> float:
    """Evaluate ``f(k) = sin 2k + xi^2/k^2 sin 2ka sin^2 k(1-a)``."""
    a = p.a
    return math.sin(2 * k) + p.xi**2 / (k * k) * math.sin(2 * k * a) * math.sin(k * (1 - a)) ** 2


# f(k) = sin 2k + xi^2 h(k)/k^2, with
# h(k) = sin(2ak) sin^2((1-a)k) = sin(2ak)/2 - sin(2k)/4 - sin(2(2a-1)k)/4.
def _h(k, a):
    return np.sin(2 * k * a) * np.sin(k * (1 - a)) ** 2


def _dh(k, a):
    c = 2 * a - 1
    return a * np.cos(2 * a * k) - 0.5 * np.cos(2 * k) - 0.5 * c * np.cos(2 * c * k)


def _d2h(k, a):
    c = 2 * a - 1
    return -2 * a * a * np.sin(2 * a * k) + np.sin(2 * k) + c * c * np.sin(2 * c * k)


def _g_derivs(k, a):
    h, dh, d2h = _h(k, a), _dh(k, a), _d2h(k, a)
    g = h / k**2
    dg = dh / k**2 - 2 * h / k**3
    d2g = d2h / k**2 - 4 * dh / k**3 + 6 * h / k**4
    return g, dg, d2g


def d_secular(x, p: ModelParams, which: str):
    """Analytic partial derivative of the secular function.

    Real ``x`` is read as ``k`` and differentiates ``f(k)``; complex ``x`` is
    read as ``u`` and differentiates ``F(u)`` (returned unscaled).  ``which``
    is one of ``"k"``, ``"xi"``, ``"u"``, ``"kk"`` (second derivative in k)
    or ``"kxi"`` (mixed).
    """
    a, xi = p.a, p.xi
    if isinstance(x, complex) or which == "u":
        u = complex(x)
        if which == "u":
            d, s = _dsecular_du_scaled(u, a, xi)
        elif which == "xi":
            d, s = _dsecular_dxi_scaled(u, a, xi)
        else:
            raise ValueError(f"derivative {which!r} is not defined for complex u")
        return d * math.exp(s)
    k = float(x)
    g, dg, d2g = _g_derivs(k, a)
    if which == "k":
        return float(2 * math.cos(2 * k) + xi * xi * dg)
    if which == "xi":
        return float(2 * xi * g)
    if which == "kk":
        return float(-4 * math.sin(2 * k) + xi * xi * d2g)
    if which == "kxi":
        return float(2 * xi * dg)
    raise ValueError(f"unknown derivative {which!r}")


def _is_zero(s: float, k: float) -> bool:
    return abs(s) <= _SINE_ZERO_TOL * max(1.0, abs(k))


def mpoint_limit_xi_squared(k: float, a: float) -> float:
    """Limit of ``xi^2(k)`` at a point where ``sin 2k = sin 2ka = 0``.

    One l'Hopital step on the ratio of sines gives ``k^2 / (a sin^2 k(1-a))``
    when the two cosines have opposite signs; with ``sin^2 k(1-a) = 1`` this is
    ``k^2/a``.
    """
    return k * k / (a * math.sin(k * (1 - a)) ** 2)


def xi_squared_of_k(k: float, a: float):
    """Coupling squared for which ``k`` is a real eigenvalue.

    Returns a float (``math.inf`` where only ``sin 2ka`` vanishes),
    ``Marker.ANY_XI`` where both sines vanish, and ``Marker.OUTSIDE`` when the
    right-hand side is negative.
    """
    if not k > 0:
        raise ParameterError(f"k must be positive, got {k!r}")
    s2k = math.sin(2 * k)
    s2ka = math.sin(2 * k * a)
    z2k, z2ka = _is_zero(s2k, k), _is_zero(s2ka, k)
    if z2k and z2ka:
        return Marker.ANY_XI
    if z2ka:
        return math.inf
    if z2k:
        return 0.0
    sb = math.sin(k * (1 - a))
    if sb == 0.0:
        return math.inf if -s2k / s2ka > 0 else Marker.OUTSIDE
    val = -s2k / s2ka * k * k / (sb * sb)
    if val < 0:
        return Marker.OUTSIDE
    return val


def xi_squared_array(k, a: float) -> np.ndarray:
    """Vectorised right-hand side of the xi^2(k) relation (may be negative)."""
    k = np.asarray(k, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.sin(2 * k) / np.sin(2 * k * a) * k**2 / np.sin(k * (1 - a)) ** 2
