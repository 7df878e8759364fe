"""
Embedding ``C``, characteristic function, model unitary ``W`` and the limit
product ``R_{n-1}^* ... R_0^*``.

Coefficient sequences of ``H^2(D_*)`` are arrays of shape ``(N, r)`` in the
``basis_Dstar`` coordinates of a :class:`~beurlinglab.contraction.DefectData`.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .contraction import star_stability, truncation_degree
from .dilation import DilationVector, dilation_apply, leg_adjoint_apply
from .errors import NotStarStable, OutsideDisc, TruncationOverflow
from .numeric import dag, opnorm

__all__ = ["Embedding", "CharacteristicFunction", "LimitProduct", "embed_C",
           "theta_coefficients", "theta_eval", "model_map_W", "limit_product_What",
           "beurling_residual", "embedding_matrix", "theta_toeplitz",
           "default_degree", "certified_headroom", "intertwining_residual", "inner_defect"]


class StarStabilityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Embedding:
    coeffs: np.ndarray
    tail_bound: float
    norm_defect: float
    star_stable: bool


@dataclass(frozen=True)
class CharacteristicFunction:
    """Taylor coefficients ``Theta_n`` (shape ``(N, r_*, r)``) plus the data
    needed to evaluate the exact remainder at a point."""

    coeffs: np.ndarray
    dd: object

    @property
    def N(self):
        return self.coeffs.shape[0]


@dataclass(frozen=True)
class LimitProduct:
    vector: DilationVector
    h_norms: np.ndarray
    errors: np.ndarray
    target: np.ndarray
    constant: float
    induction_residual: float
    converges: bool


def default_degree(dd, cap=2048):
    """Truncation degree whose certified geometric tail is below ``residual_eps / 10``."""
    return truncation_degree(dd.T, dd.tol.residual_eps / 10, cap=cap)


def _is_star_stable(dd):
    return star_stability(dd.contraction, 1, dd.tol).is_star_stable


def embed_C(dd, h, N):
    """``h -> (D_* h, D_* T^* h, ..., D_* T^{*(N-1)} h)``.

    ``norm_defect`` is the exact truncation loss ``||T^{*N} h||``, from the
    telescoping identity ``||D_* x||^2 = ||x||^2 - ||T^* x||^2``.
    """
    if N < 1:
        raise ValueError("N must be positive")
    h = np.atleast_1d(np.asarray(h, dtype=complex))
    stable = _is_star_stable(dd)
    if not stable:
        warnings.warn("C is not isometric for a contraction that is not *-stable",
                      StarStabilityWarning, stacklevel=2)
    ts = dag(dd.T)
    Dc = dd.Dstar_coords
    out = np.empty((N, dd.defect_star_dim), dtype=complex)
    x = h.copy()
    for n in range(N):
        out[n] = Dc @ x
        x = ts @ x
    rho = float(np.max(np.abs(np.linalg.eigvals(dd.T))))
    pw = opnorm(np.linalg.matrix_power(ts, N))
    tail = pw * np.linalg.norm(h) / (1.0 - rho) if rho < 1 else np.inf
    return Embedding(out, float(tail), float(np.linalg.norm(x)), stable)


def theta_coefficients(dd, N):
    """``Theta_0 = -T|_D`` and ``Theta_n = D_* T^{*(n-1)} D|_D``, in defect coordinates."""
    if N < 1:
        raise ValueError("N must be positive")
    B, Bs = dd.basis_D, dd.basis_Dstar
    out = np.empty((N, dd.defect_star_dim, dd.defect_dim), dtype=complex)
    out[0] = -dag(Bs) @ dd.T @ B
    x = dd.D @ B
    ts = dag(dd.T)
    for n in range(1, N):
        out[n] = dd.Dstar_coords @ x
        x = ts @ x
    return CharacteristicFunction(out, dd)


def theta_eval(cf, z, return_tail=False):
    """``sum_n Theta_n z^n`` with the exact remainder norm when available.

    The remainder ``z^N D_* T^{*(N-1)} (I - z T^*)^{-1} D`` is evaluated
    directly whenever ``I - z T^*`` is invertible.
    """
    z = complex(z)
    dd = cf.dd
    if abs(z) > 1 + dd.tol.rank_eps:
        raise OutsideDisc(f"|z| = {abs(z):.6g} > 1")
    powers = z ** np.arange(cf.N)
    val = np.tensordot(powers, cf.coeffs, axes=(0, 0))
    if not return_tail:
        return val
    d = dd.dim
    ts = dag(dd.T)
    a = np.eye(d) - z * ts
    try:
        res = scipy.linalg.solve(a, dd.D @ dd.basis_D)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        return val, np.inf
    if cf.N >= 2:
        rem = z ** cf.N * dd.Dstar_coords @ np.linalg.matrix_power(ts, cf.N - 1) @ res
        tail = opnorm(rem)
    else:
        tail = opnorm(z * dd.Dstar_coords @ res)
    return val, float(tail)


def _cauchy(theta, f, N_out):
    """Coefficients of ``Theta * f`` up to degree ``N_out - 1``."""
    out = np.zeros((N_out, theta.shape[1]), dtype=complex)
    nf = f.shape[0]
    for k in range(N_out):
        j = np.arange(max(0, k - theta.shape[0] + 1), min(k, nf - 1) + 1)
        if j.size:
            out[k] = np.einsum("jab,jb->a", theta[k - j], f[j])
    return out


def _f_degree(f, eps):
    nz = np.flatnonzero(np.max(np.abs(f), axis=1) > eps) if f.size else []
    return int(nz[-1]) if len(nz) else -1


def model_map_W(dd, v, N_out):
    """``h + f -> C h + Theta_T f`` truncated at degree ``N_out``.

    Returns ``(coeffs, dropped)`` where ``dropped`` is the norm lost beyond
    ``N_out`` (meaningful for *-stable ``T`` where ``W`` is isometric).
    """
    if v.star_upto != -1:
        raise ValueError("W acts on H + H^2(D)")
    if _f_degree(v.coeffs, dd.tol.rank_eps) >= N_out:
        raise TruncationOverflow(f"N_out = {N_out} below the degree of f")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StarStabilityWarning)
        c = embed_C(dd, v.h, N_out).coeffs
    theta = theta_coefficients(dd, N_out).coeffs
    out = c + _cauchy(theta, v.coeffs, N_out)
    dropped = np.sqrt(max(v.norm() ** 2 - np.vdot(out, out).real, 0.0))
    return out, float(dropped)


def _induction_display(dd, n, v):
    """Closed form of ``R_{n-1}^* ... R_0^* v`` term by term.

    ``x_k = T^{*k} h + sum_{j<k} T^{*(k-1-j)} D a_j`` is carried forward, so
    level ``k`` is ``D_* x_k - T a_k`` and the ``H`` part is ``x_n``.
    """
    ts = dag(dd.T)
    B = dd.basis_D
    coeffs = v.coeffs.copy()
    x = v.h.astype(complex)
    for k in range(n):
        a = B @ v.coeffs[k] if k < v.N else None
        if a is not None:
            coeffs[k] = dag(dd.basis_Dstar) @ (dd.D_star @ x - dd.T @ a)
        x = ts @ x
        if a is not None:
            x = x + dd.D @ a
    return x, coeffs


def limit_product_What(dd, n, v, N_out=None):
    """Apply ``R_0^*, R_1^*, ..., R_{n-1}^*`` and compare with ``W v``.

    The error after step ``k`` is the distance between the hybrid vector and
    ``0 + W v``, with levels ``>= k`` of the hybrid vector (still in ``D``
    coordinates) counted as orthogonal to the ``D_*`` levels of ``W v``.
    ``constant`` is the largest observed ratio
    ``error_k / (||T^{*k}|| ||v||)`` over steps past the support of ``f``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if v.star_upto != -1:
        raise ValueError("input must lie in H + H^2(D)")
    r = dd.defect_dim
    N = max(v.N, n)
    if N > v.N:
        v = DilationVector(v.h, np.vstack([v.coeffs, np.zeros((N - v.N, r), complex)]), -1)
    stable = _is_star_stable(dd)
    if N_out is None:
        N_out = N + (default_degree(dd) if stable else n)
    target, _ = model_map_W(dd, v, N_out)
    ts = dag(dd.T)
    vnorm = v.norm()
    deg = _f_degree(v.coeffs, dd.tol.rank_eps)

    w = v
    h_norms = np.empty(n)
    errors = np.empty(n)
    ratios = []
    tpow = np.eye(dd.dim, dtype=complex)
    for k in range(n):
        w = leg_adjoint_apply(dd, k, w)
        tpow = ts @ tpow
        m = k + 1
        h_norms[k] = np.linalg.norm(w.h)
        err2 = h_norms[k] ** 2
        err2 += np.sum(np.abs(w.coeffs[:m] - target[:m]) ** 2)
        err2 += np.sum(np.abs(w.coeffs[m:]) ** 2)
        err2 += np.sum(np.abs(target[m:]) ** 2)
        errors[k] = np.sqrt(err2)
        scale = opnorm(tpow) * vnorm
        if m > deg and scale > 0 and errors[k] > 1e-14:
            ratios.append(errors[k] / scale)

    h_ind, c_ind = _induction_display(dd, n, v)
    ind_res = max(np.linalg.norm(w.h - h_ind), np.linalg.norm(w.coeffs - c_ind))
    const = float(max(ratios)) if ratios else 0.0
    return LimitProduct(w, h_norms, errors, target, const, float(ind_res), stable)


def embedding_matrix(dd, N):
    """Dense ``(N r_*) x d`` matrix of ``C`` truncated at degree ``N``."""
    cols = []
    for i in range(dd.dim):
        e = np.zeros(dd.dim, dtype=complex)
        e[i] = 1.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StarStabilityWarning)
            cols.append(embed_C(dd, e, N).coeffs.ravel())
    return np.column_stack(cols)


def theta_toeplitz(dd, N, M):
    """Dense ``(N r_*) x (M r)`` matrix of multiplication by ``Theta`` on degrees ``< M``."""
    theta = theta_coefficients(dd, N).coeffs
    rs, r = dd.defect_star_dim, dd.defect_dim
    out = np.zeros((N * rs, M * r), dtype=complex)
    for j in range(M):
        for k in range(j, N):
            out[k * rs:(k + 1) * rs, j * r:(j + 1) * r] = theta[k - j]
    return out


def certified_headroom(dd, eps=1e-6):
    """Degrees between ``low`` and ``N`` that push the truncation tail below ``eps``."""
    return truncation_degree(dd.T, eps)


def beurling_residual(dd, N=None, low=None, eps=1e-6):
    """Compare ``(C H)^perp`` with ``Theta H^2(D)`` on low-degree functions.

    Both subspaces live in the truncated ``H^2_N(D_*)``. With ``low = M``
    the comparison is restricted to functions of degree ``< M`` and
    ``Theta`` multiplies ``H^2_M(D)``. The residual is the larger of
    ``||(P_1 - P_2) E_M||`` and the sine of the largest principal angle
    between ``P_1 E_M`` and ``P_2 E_M``.

    With ``N`` omitted, ``low`` defaults to 20 and ``N`` adds the
    :func:`certified_headroom` for ``eps``; otherwise ``low`` defaults to
    ``2N/3``.
    """
    if not _is_star_stable(dd):
        raise NotStarStable("the Beurling identity needs a *-stable contraction")
    if N is None:
        low = low or 20
        N = low + certified_headroom(dd, eps)
    M = low if low is not None else max(1, (2 * N) // 3)
    if not 1 <= M < N:
        raise ValueError("need 1 <= low < N")
    rs = dd.defect_star_dim
    C = embedding_matrix(dd, N)
    Th = theta_toeplitz(dd, N, M)
    qc = scipy.linalg.orth(C, rcond=dd.tol.rank_eps)
    qt = scipy.linalg.orth(Th, rcond=dd.tol.rank_eps)
    size = N * rs
    P1 = np.eye(size) - qc @ dag(qc)
    P2 = qt @ dag(qt)
    E = np.eye(size)[:, :M * rs]
    diff = opnorm((P1 - P2) @ E)
    a, b = P1 @ E, P2 @ E
    oa = scipy.linalg.orth(a, rcond=1e-6)
    ob = scipy.linalg.orth(b, rcond=1e-6)
    if oa.shape[1] != ob.shape[1]:
        return max(diff, 1.0)
    if oa.shape[1] == 0:
        return diff
    ang = scipy.linalg.subspace_angles(oa, ob)
    return float(max(diff, np.sin(np.max(ang))))


def intertwining_residual(dd, v, N_out):
    """``||W U v - S W v||`` on the first ``N_out`` coefficients.

    ``S`` is the coefficient shift of ``H^2(D_*)``; both sides are exact below
    degree ``N_out``, so no tail enters.
    """
    wv, _ = model_map_W(dd, v, N_out)
    wuv, _ = model_map_W(dd, dilation_apply(dd, v), N_out)
    swv = np.zeros_like(wv)
    swv[1:] = wv[:-1]
    return float(np.linalg.norm(wuv - swv))


def inner_defect(dd, zs, N=None):
    """Worst ``||Theta(z)^* Theta(z) - I||`` over boundary points ``zs``."""
    N = N or default_degree(dd)
    cf = theta_coefficients(dd, N)
    worst = 0.0
    for z in zs:
        th = theta_eval(cf, z)
        worst = max(worst, opnorm(dag(th) @ th - np.eye(dd.defect_dim)))
    return float(worst)
