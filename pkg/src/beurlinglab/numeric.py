"""
Dense complex linear algebra primitives.

Operators are plain ``numpy`` arrays of dtype ``complex128``. Every function
here is pure; tolerances travel explicitly in a :class:`Tolerance`.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotHermitian, NotPSD, DimensionMismatch

__all__ = [
    "Tolerance", "DEFAULT_TOL", "as_matrix", "dag", "opnorm",
    "hermitian_sqrt", "range_basis", "unitarity_defect", "eigh_sorted",
    "phase_normalize", "random_unitary",
]


@dataclass(frozen=True)
class Tolerance:
    """Numerical cutoffs.

    Parameters
    ----------
    rank_eps : float
        Singular/eigenvalue cutoff below which a value is treated as zero.
    residual_eps : float
        Acceptance threshold for operator identities.
    """

    rank_eps: float = 1e-9
    residual_eps: float = 1e-8

    def __post_init__(self):
        for name in ("rank_eps", "residual_eps"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")


DEFAULT_TOL = Tolerance()


def as_matrix(m, square=False):
    """Coerce to a finite 2-d complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 0:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if square and a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def dag(m):
    return np.conj(np.swapaxes(m, -1, -2))


def opnorm(m):
    """Operator (spectral) norm; 0 for empty matrices."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    if m.ndim == 1:
        return float(np.linalg.norm(m))
    return float(np.linalg.norm(m, 2))


def phase_normalize(vecs, eps=1e-12):
    """Rotate each column so its first non-negligible entry is real positive."""
    vecs = np.array(vecs, dtype=complex, copy=True)
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        idx = np.flatnonzero(np.abs(col) > eps)
        if idx.size:
            c = col[idx[0]]
            vecs[:, j] = col * (abs(c) / c)
    return vecs


def eigh_sorted(m):
    """Hermitian eigendecomposition, eigenvalues descending, vectors phase-normalized.

    Degenerate eigenspaces are not canonicalised beyond the phase rule.
    """
    w, v = np.linalg.eigh(m)
    order = np.argsort(-w, kind="stable")
    return w[order], phase_normalize(v[:, order])


def hermitian_sqrt(m, tol=DEFAULT_TOL):
    """Positive square root of a Hermitian positive-semidefinite matrix.

    Eigenvalues in ``[-rank_eps, 0)`` are clamped to zero before rooting.

    Raises
    ------
    NotHermitian
        If ``||M - M^*|| > residual_eps``.
    NotPSD
        If an eigenvalue is below ``-rank_eps``.
    """
    m = as_matrix(m, square=True)
    asym = opnorm(m - dag(m))
    if asym > tol.residual_eps:
        raise NotHermitian(f"||M - M*|| = {asym:.3g}")
    h = (m + dag(m)) / 2
    w, v = eigh_sorted(h)
    if w.size and w.min() < -tol.rank_eps:
        raise NotPSD(f"smallest eigenvalue {w.min():.3g}")
    w = np.clip(w, 0.0, None)
    s = (v * np.sqrt(w)) @ dag(v)
    return (s + dag(s)) / 2


def range_basis(m, tol=DEFAULT_TOL):
    """Orthonormal basis of the range of ``m``.

    The basis is canonical: the range projector ``P`` is formed from the SVD
    (it does not depend on the SVD's gauge), a set of ``rank`` linearly
    independent columns of ``P`` is selected by pivoted QR and re-sorted into
    ascending column order, and those columns are Gram-Schmidt orthonormalised
    with positive diagonal. A full-rank input therefore yields the identity.
    """
    m = as_matrix(m)
    rows = m.shape[0]
    if m.size == 0:
        return np.zeros((rows, 0), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    rank = int(np.sum(s > tol.rank_eps))
    if rank == 0:
        return np.zeros((rows, 0), dtype=complex)
    if rank == rows:
        return np.eye(rows, dtype=complex)
    ur = u[:, :rank]
    proj = ur @ dag(ur)
    _, _, piv = scipy.linalg.qr(proj, pivoting=True, mode="economic")
    cols = np.sort(piv[:rank])
    q, r = np.linalg.qr(proj[:, cols])
    signs = np.diag(r) / np.abs(np.diag(r))
    q = q * signs.conj()[None, :]
    # project back onto the exact range to remove QR round-off leakage
    q = proj @ q
    q, _ = np.linalg.qr(q)
    return phase_normalize(q)


def unitarity_defect(m):
    """``max(||M^*M - I||, ||MM^* - I||)`` in operator norm."""
    m = as_matrix(m, square=True)
    eye = np.eye(m.shape[0])
    return max(opnorm(dag(m) @ m - eye), opnorm(m @ dag(m) - eye))


def random_unitary(rng, d):
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph[None, :]
