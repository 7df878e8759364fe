"""
Truncated minimal isometric dilation and its leg factorisation.

A vector of ``H + H^2`` is stored as ``h`` (length ``d``) and a coefficient
array of shape ``(N, r)``; row ``n`` is the coefficient of ``z^n`` in
defect-space coordinates. ``star_upto = k`` marks the hybrid space in which
levels ``0..k`` hold ``D_*`` coordinates and the rest ``D`` coordinates
(``k = -1`` is plain ``H^2(D)``).
"""

from dataclasses import dataclass

import numpy as np

from .errors import LevelMismatch, TruncationOverflow
from .numeric import dag

__all__ = ["TruncatedHardySpace", "DilationVector", "dilation_apply", "leg_apply",
           "leg_adjoint_apply", "leg_product", "power_closed_form",
           "power_factorization_residual", "dilation_matrix", "shift_coeffs"]


@dataclass(frozen=True)
class TruncatedHardySpace:
    N: int
    dim_D: int
    dim_Dstar: int
    star_upto: int = -1

    def __post_init__(self):
        if self.N < 1 or self.dim_D < 0 or self.dim_Dstar < 0:
            raise ValueError("invalid truncated Hardy space")

    @property
    def level_dims(self):
        return tuple(self.dim_Dstar if n <= self.star_upto else self.dim_D
                     for n in range(self.N))


@dataclass(frozen=True)
class DilationVector:
    h: np.ndarray
    coeffs: np.ndarray
    star_upto: int = -1

    @classmethod
    def make(cls, h, coeffs=None, N=None, r=None, star_upto=-1):
        h = np.atleast_1d(np.asarray(h, dtype=complex))
        if coeffs is None:
            coeffs = np.zeros((N, r), dtype=complex)
        else:
            coeffs = np.asarray(coeffs, dtype=complex)
            if coeffs.ndim == 1:
                coeffs = coeffs[:, None]
            if N is not None and coeffs.shape[0] < N:
                pad = np.zeros((N - coeffs.shape[0], coeffs.shape[1]), dtype=complex)
                coeffs = np.vstack([coeffs, pad])
        return cls(h, coeffs, star_upto)

    @property
    def N(self):
        return self.coeffs.shape[0]

    def norm(self):
        return float(np.sqrt(np.vdot(self.h, self.h).real
                             + np.vdot(self.coeffs, self.coeffs).real))

    def flat(self):
        return np.concatenate([self.h, self.coeffs.ravel()])

    def space(self, dd):
        return TruncatedHardySpace(self.N, dd.defect_dim, dd.defect_star_dim,
                                   self.star_upto)


def shift_coeffs(coeffs, n=1, eps=0.0):
    """Multiply by ``z^n``; refuses to drop coefficients larger than ``eps``."""
    if n == 0:
        return coeffs.copy()
    top = coeffs[-n:] if n <= coeffs.shape[0] else coeffs
    if top.size and np.max(np.abs(top)) > eps:
        raise TruncationOverflow(f"shift by {n} would drop coefficients "
                                 f"of size {np.max(np.abs(top)):.3g}")
    out = np.zeros_like(coeffs)
    if n < coeffs.shape[0]:
        out[n:] = coeffs[:-n]
    return out


def _check(dd, v):
    if v.h.shape != (dd.dim,) or v.coeffs.shape[1] != dd.defect_dim:
        raise LevelMismatch(f"vector shapes {v.h.shape}, {v.coeffs.shape} do not "
                            f"fit d={dd.dim}, r={dd.defect_dim}")


def dilation_apply(dd, v):
    """``h + f  ->  Th + (Dh + z f)``."""
    _check(dd, v)
    if v.star_upto != -1:
        raise LevelMismatch("dilation acts on H + H^2(D)")
    out = shift_coeffs(v.coeffs, 1, dd.tol.rank_eps)
    out[0] = dd.D_coords @ v.h
    return DilationVector(dd.T @ v.h, out, -1)


def leg_apply(dd, k, v):
    """Apply ``R_k``: H + H^2(D_{*,k}) -> H + H^2(D_{*,k-1})."""
    _check(dd, v)
    if v.star_upto != k:
        raise LevelMismatch(f"R_{k} needs D_* on levels 0..{k}, "
                            f"vector has them on 0..{v.star_upto}")
    if not 0 <= k < v.N:
        raise LevelMismatch(f"level {k} outside truncation {v.N}")
    ak = v.coeffs[k]
    Bs = dd.basis_Dstar
    h_new = dd.T @ v.h + dd.D_star @ (Bs @ ak)
    coeffs = v.coeffs.copy()
    coeffs[k] = dd.D_coords @ v.h - dag(dd.basis_D) @ dag(dd.T) @ (Bs @ ak)
    return DilationVector(h_new, coeffs, k - 1)


def leg_adjoint_apply(dd, k, v):
    """Apply ``R_k^*``: H + H^2(D_{*,k-1}) -> H + H^2(D_{*,k})."""
    _check(dd, v)
    if v.star_upto != k - 1:
        raise LevelMismatch(f"R_{k}^* needs D_* on levels 0..{k - 1}, "
                            f"vector has them on 0..{v.star_upto}")
    bk = dd.basis_D @ v.coeffs[k]
    h_new = dag(dd.T) @ v.h + dd.D @ bk
    coeffs = v.coeffs.copy()
    coeffs[k] = dd.Dstar_coords @ v.h - dag(dd.basis_Dstar) @ dd.T @ bk
    return DilationVector(h_new, coeffs, k)


def leg_product(dd, n, v):
    """``R_0 ... R_{n-1} (h + z^n f)`` for ``v = h + f`` in ``H^2(D)``."""
    _check(dd, v)
    w = DilationVector(v.h.copy(), shift_coeffs(v.coeffs, n, dd.tol.rank_eps), n - 1)
    for k in range(n - 1, -1, -1):
        w = leg_apply(dd, k, w)
    return w


def power_closed_form(dd, n, v):
    """``T^n h + (D T^{n-1} h + ... + D h z^{n-1} + z^n f)``."""
    t = dd.T
    coeffs = shift_coeffs(v.coeffs, n, dd.tol.rank_eps)
    x = v.h.copy()
    for j in range(n - 1, -1, -1):
        coeffs[j] = coeffs[j] + dd.D_coords @ x
        x = t @ x
    return DilationVector(x, coeffs, -1)


def power_factorization_residual(dd, n, v):
    """Largest gap between ``U^n v``, the leg product and the closed form."""
    if n < 1:
        raise ValueError("n must be positive")
    u = v
    for _ in range(n):
        u = dilation_apply(dd, u)
    legs = leg_product(dd, n, v)
    closed = power_closed_form(dd, n, v)
    return max(np.linalg.norm(u.flat() - legs.flat()),
               np.linalg.norm(u.flat() - closed.flat()))


def dilation_matrix(dd, N):
    """Dense matrix of ``U`` on ``H + H^2_N(D)``, top level shifted out."""
    d, r = dd.dim, dd.defect_dim
    size = d + N * r
    U = np.zeros((size, size), dtype=complex)
    U[:d, :d] = dd.T
    U[d:d + r, :d] = dd.D_coords
    for n in range(N - 1):
        U[d + (n + 1) * r:d + (n + 2) * r, d + n * r:d + (n + 1) * r] = np.eye(r)
    return U
