"""
Contractions, their defect operators and the rotation matrix.

For a contraction ``T`` on ``H = C^d`` we build ``D = sqrt(I - T^*T)``,
``D_* = sqrt(I - TT^*)``, orthonormal bases ``B`` and ``B_*`` of their ranges,
and the unitary

    R = [[T,        D_* B_*      ],
         [B^* D,   -B^* T^* B_*  ]] : H + D_* -> H + D

written in defect-space coordinates.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NotAContraction
from .numeric import DEFAULT_TOL, as_matrix, dag, opnorm, range_basis

__all__ = ["Contraction", "DefectData", "StabilityReport", "validate_contraction",
           "defect_data", "star_stability", "random_contraction", "truncation_degree"]


@dataclass(frozen=True)
class Contraction:
    T: np.ndarray
    norm_bound: float

    @property
    def dim(self):
        return self.T.shape[0]


@dataclass(frozen=True)
class DefectData:
    """Everything derived from a contraction that the dilation needs.

    ``basis_D`` and ``basis_Dstar`` are ``d x r`` isometries; ``R`` has shape
    ``(d + r) x (d + r)`` with rows indexed by ``H + D`` and columns by
    ``H + D_*``. In finite dimensions ``dim D == dim D_*``.
    """

    contraction: Contraction
    D: np.ndarray
    D_star: np.ndarray
    basis_D: np.ndarray
    basis_Dstar: np.ndarray
    R: np.ndarray
    tol: object = field(default=DEFAULT_TOL, repr=False)

    @property
    def T(self):
        return self.contraction.T

    @property
    def dim(self):
        return self.T.shape[0]

    @property
    def defect_dim(self):
        return self.basis_D.shape[1]

    @property
    def defect_star_dim(self):
        return self.basis_Dstar.shape[1]

    # defect operators composed with the basis maps, used everywhere downstream
    @property
    def D_coords(self):
        """``B^* D``: H -> D coordinates."""
        return dag(self.basis_D) @ self.D

    @property
    def Dstar_coords(self):
        """``B_*^* D_*``: H -> D_* coordinates."""
        return dag(self.basis_Dstar) @ self.D_star


@dataclass(frozen=True)
class StabilityReport:
    spectral_radius: float
    power_decay: np.ndarray
    is_star_stable: bool


def validate_contraction(m, tol=DEFAULT_TOL):
    """Accept ``m`` if its largest singular value is at most ``1 + rank_eps``."""
    t = as_matrix(m, square=True)
    norm = opnorm(t)
    if norm > 1.0 + tol.rank_eps:
        raise NotAContraction(norm)
    return Contraction(T=t, norm_bound=norm)


def _defect_sqrt(m, tol):
    """Square root of ``I - T^*T`` with eigenvalues below ``rank_eps`` set to zero.

    Rounding leaves eigenvalues near 1e-16 where a singular value of ``T``
    equals one; their square roots would clear the rank cutoff and give
    ``D`` and ``D_*`` different ranks. Slightly negative eigenvalues come
    from norms in ``(1, 1 + rank_eps]`` and are clamped the same way.
    """
    h = (m + dag(m)) / 2
    w, v = np.linalg.eigh(h)
    w = np.where(w < tol.rank_eps, 0.0, w)
    return (v * np.sqrt(w)) @ dag(v)


def defect_data(c, tol=DEFAULT_TOL):
    if not isinstance(c, Contraction):
        c = validate_contraction(c, tol)
    t = c.T
    d = t.shape[0]
    eye = np.eye(d)
    D = _defect_sqrt(eye - dag(t) @ t, tol)
    Ds = _defect_sqrt(eye - t @ dag(t), tol)
    B = range_basis(D, tol)
    Bs = range_basis(Ds, tol)
    if B.shape[1] != Bs.shape[1]:
        # cannot happen for square T; guards against inconsistent rank cutoffs
        raise ArithmeticError(
            f"defect dimensions differ: {B.shape[1]} vs {Bs.shape[1]}")
    R = np.block([
        [t, Ds @ Bs],
        [dag(B) @ D, -dag(B) @ dag(t) @ Bs],
    ])
    return DefectData(c, D, Ds, B, Bs, R, tol)


def star_stability(c, n_max=50, tol=DEFAULT_TOL):
    """Spectral-radius test for ``T^{*n} -> 0`` with the power norms as evidence."""
    t = c.T if isinstance(c, Contraction) else as_matrix(c, square=True)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    rho = float(np.max(np.abs(np.linalg.eigvals(t))))
    ts = dag(t)
    p = np.eye(t.shape[0], dtype=complex)
    decay = np.empty(n_max)
    for n in range(n_max):
        p = ts @ p
        decay[n] = opnorm(p)
    return StabilityReport(rho, decay, bool(rho < 1.0 - tol.rank_eps))


def random_contraction(rng, d, margin=0.0):
    """Complex Ginibre matrix scaled to norm ``1 / (1 + margin)``."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return z / (opnorm(z) * (1.0 + margin))


def truncation_degree(t, eps, cap=2048):
    """Smallest ``N`` with a certified bound ``sum_{n >= N} ||T^{*n}|| <= eps``.

    Uses submultiplicativity: once some power ``m`` has ``||T^m|| = q < 1``,
    ``sum_{n>=N} ||T^n|| <= (sum_{j<m} ||T^{N+j}||) / (1 - q)``.
    Returns ``cap`` if no certificate is found below it.
    """
    t = as_matrix(t, square=True)
    p = np.eye(t.shape[0], dtype=complex)
    norms = [1.0]

    def grow(k):
        nonlocal p
        while len(norms) <= k:
            p = p @ t
            norms.append(opnorm(p))

    grow(64)
    below = np.flatnonzero(np.asarray(norms[1:65]) < 1.0)
    if below.size == 0:
        return cap
    m = int(below[0]) + 1
    q = norms[m]
    for N in range(1, cap + 1):
        grow(N + m)
        if sum(norms[N:N + m]) / (1.0 - q) <= eps:
            return N
    return cap
    m = int(below[0]) + 1
    q = norms[m]
    for N in range(1, cap + 1):
        if norms[N:N + m].sum() / (1.0 - q) <= eps:
            return N
    return cap
