"""Independent checks of the secular equation.

The wave function is built piecewise from solutions of ``psi'' = u^2 psi``
that already vanish at the walls,

    psi = A sinh(u(x+1))                on (-1, -a)
    psi = B cosh(ux) + C sinh(ux)       on (-a, a)
    psi = D sinh(u(1-x))                on (a, 1)

and the four conditions at ``x = -a, a`` (continuity, and the derivative jump
``psi'(+-a_R) - psi'(+-a_L) = +-i xi psi(+-a)``) form a 4x4 system.  Its
determinant equals ``u^2 F(u)`` identically.

A finite-difference discretisation of the Hamiltonian gives a third,
fully independent route to the spectrum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EigenfunctionError, FeatureUnavailable, ParameterError
from .secular import ModelParams, ScaledValue, _cosh_s, _sinh_s

__all__ = [
    "MatchingMatrix",
    "EigenfunctionCoefficients",
    "matching_matrix",
    "matching_det",
    "scaled_det_magnitude",
    "det4",
    "eigenfunction",
    "grid_oracle",
]


@dataclass(frozen=True)
class MatchingMatrix:
    """Column-scaled matching matrix.

    ``entries[:, j] = M[:, j] * exp(-col_log_scale[j])``; the determinant of
    ``entries`` times ``exp(log_scale)`` is the true determinant.
    """

    entries: np.ndarray
    col_log_scale: tuple
    u: complex
    params: ModelParams

    @property
    def log_scale(self) -> float:
        return float(sum(self.col_log_scale))

    def full(self) -> np.ndarray:
        return self.entries * np.exp(np.asarray(self.col_log_scale))


@dataclass(frozen=True)
class EigenfunctionCoefficients:
    A: complex
    B: complex
    C: complex
    D: complex
    u: complex
    params: ModelParams
    residual: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a, u = self.params.a, self.u
        left = self.A * np.sinh(u * (x + 1))
        mid = self.B * np.cosh(u * x) + self.C * np.sinh(u * x)
        right = self.D * np.sinh(u * (1 - x))
        return np.where(x < -a, left, np.where(x > a, right, mid))

    def matching_residuals(self) -> np.ndarray:
        """Continuity and jump defects at -a and +a (relative to max |psi|)."""
        a, u, xi = self.params.a, self.u, self.params.xi
        s1, c1 = np.sinh(u * (1 - a)), np.cosh(u * (1 - a))
        sa, ca = np.sinh(u * a), np.cosh(u * a)
        psi_l = self.A * s1
        psi_ml = self.B * ca - self.C * sa
        psi_mr = self.B * ca + self.C * sa
        psi_r = self.D * s1
        d_l = self.A * u * c1
        d_ml = u * (-self.B * sa + self.C * ca)
        d_mr = u * (self.B * sa + self.C * ca)
        d_r = -self.D * u * c1
        res = np.array([
            psi_ml - psi_l,
            (d_ml - d_l) - (-1j * xi * psi_l),
            psi_r - psi_mr,
            (d_r - d_mr) - (1j * xi * psi_r),
        ])
        xs = np.linspace(-1, 1, 2001)
        scale = max(np.max(np.abs(self(xs))), 1e-300)
        return np.abs(res) / (scale * max(1.0, abs(u), xi))


def matching_matrix(u: complex, p: ModelParams) -> MatchingMatrix:
    """Assemble the column-scaled 4x4 matching system for amplitudes (A, B, C, D)."""
    u = complex(u)
    if u == 0:
        raise ParameterError("u = 0 is excluded from the matching system")
    a, xi = p.a, p.xi
    r = abs(u.real)
    so, sa = (1 - a) * r, a * r  # column scales: outer pieces and middle piece
    s1, c1 = _sinh_s(u * (1 - a), so), _cosh_s(u * (1 - a), so)
    sha, cha = _sinh_s(u * a, sa), _cosh_s(u * a, sa)
    m = np.array([
        [s1, -cha, sha, 0],
        [-u * c1 + 1j * xi * s1, -u * sha, u * cha, 0],
        [0, cha, sha, -s1],
        [0, -u * sha, -u * cha, -u * c1 - 1j * xi * s1],
    ], dtype=complex)
    return MatchingMatrix(m, (so, sa, sa, so), u, p)


def det4(m) -> complex:
    """Determinant by cofactor expansion along the first row."""
    m = [[complex(v) for v in row] for row in m]

    def det3(r):
        return (r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
                - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
                + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]))

    total = 0j
    for j in range(4):
        if m[0][j] == 0:
            continue
        minor = [[row[c] for c in range(4) if c != j] for row in m[1:]]
        total += (-1) ** j * m[0][j] * det3(minor)
    return total


def matching_det(u: complex, p: ModelParams) -> ScaledValue:
    """Determinant of the matching system in scaled form (equals ``u^2 F(u)``)."""
    mm = matching_matrix(u, p)
    return ScaledValue.from_scaled(det4(mm.entries), mm.log_scale)


def scaled_det_magnitude(u: complex, p: ModelParams) -> float:
    """``|det|`` of the column-scaled matrix over its Hadamard bound (scale free)."""
    m = matching_matrix(u, p).entries
    bound = float(np.prod(np.linalg.norm(m, axis=1)))
    return abs(det4(m)) / bound if bound > 0 else 0.0


def eigenfunction(u_root: complex, p: ModelParams, *, null_tol: float = 1e-8,
                  gap_tol: float = 1e-6) -> EigenfunctionCoefficients:
    """Null vector of the matching matrix at a root.

    Computed from the SVD rather than by fixing ``A = 1``: at M points the
    outer amplitudes may vanish identically.
    """
    mm = matching_matrix(u_root, p)
    _, sv, vh = np.linalg.svd(mm.entries)
    if sv[-1] > null_tol * sv[0]:
        raise EigenfunctionError(
            f"u={u_root} is not a root: smallest singular value ratio {sv[-1] / sv[0]:.3g}")
    if sv[-2] < gap_tol * sv[0]:
        raise EigenfunctionError(
            f"near-degenerate null space at u={u_root} (exceptional point or crossing?)")
    v = vh[-1].conj() * np.exp(-np.asarray(mm.col_log_scale))
    v = v / v[np.argmax(np.abs(v))]
    res = float(np.linalg.norm(mm.full() @ v) / max(np.linalg.norm(mm.full()), 1e-300))
    return EigenfunctionCoefficients(*[complex(c) for c in v], complex(u_root), p, res)


def _eig_backend():
    try:
        import scipy.linalg
        import scipy.sparse
        import scipy.sparse.linalg
    except ImportError as exc:  # pragma: no cover
        raise FeatureUnavailable("grid oracle not built: needs scipy eigensolvers") from exc
    return scipy.linalg, scipy.sparse, scipy.sparse.linalg


def grid_oracle(p: ModelParams, n_grid: int = 1000, n_eigs: int = 10, *,
                method: str = "auto", cancel=None) -> np.ndarray:
    """Lowest eigenvalues of a central-difference Hamiltonian, sorted by real part.

    The interior nodes are ``x_j = -1 + j h``, ``h = 2/(n_grid+1)``.  Each delta
    adds ``-/+ i xi / h`` on the node nearest ``-/+ a``.  ``cancel`` is an
    optional ``threading.Event`` checked between stages.
    """
    if n_grid < 200:
        raise ParameterError("n_grid must be >= 200")
    dense_la, sparse, sparse_la = _eig_backend()
    h = 2.0 / (n_grid + 1)
    main = np.full(n_grid, 2.0 / h**2, dtype=complex)
    off = np.full(n_grid - 1, -1.0 / h**2, dtype=complex)
    j_left = int(round((1 - p.a) / h)) - 1
    j_right = int(round((1 + p.a) / h)) - 1
    main[j_left] += -1j * p.xi / h
    main[j_right] += 1j * p.xi / h
    if cancel is not None and cancel.is_set():
        raise InterruptedError("grid oracle cancelled after assembly")
    if method == "auto":
        method = "dense" if n_grid <= 800 else "sparse"
    if method == "dense":
        H = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
        ev = dense_la.eigvals(H)
    elif method == "sparse":
        H = sparse.diags([off, main, off], [-1, 0, 1], format="csc")
        k = min(n_eigs + 6, n_grid - 2)
        ev = sparse_la.eigs(H, k=k, sigma=0.0, return_eigenvectors=False)
    else:
        raise ParameterError(f"unknown method {method!r}")
    if cancel is not None and cancel.is_set():
        raise InterruptedError("grid oracle cancelled after eigensolve")
    ev = np.asarray(ev)
    ev = ev[np.argsort(ev.real, kind="stable")]
    return ev[:n_eigs]
