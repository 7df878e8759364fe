"""
Unital completely positive maps in Kraus form.

The Heisenberg action is ``x -> sum_i A_i^* x A_i`` and its predual is
``rho -> sum_i A_i rho A_i^*``. Vectorisation is row-major throughout:
``vec(A X B) = kron(A, B^T) vec(X)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EquivalenceViolation, NotInvariant
from .numeric import DEFAULT_TOL, as_matrix, dag, opnorm

__all__ = ["KrausMap", "ErgodicityReport", "SpectralSummary", "apply_heisenberg",
           "apply_schrodinger", "fixed_point_space", "spectral_summary",
           "absorbing_check", "equivalence_report", "probe_states",
           "trace_distance", "validate_state"]

# eigenvalues this close to the unit circle count as peripheral
PERIPHERAL_EPS = 1e-6
# spectral gaps below this are reported as indeterminate
GAP_FLOOR = 1e-3


@dataclass(frozen=True)
class KrausMap:
    """Unital CP map given by Kraus operators ``ops`` of shape ``(k, d, d)``."""

    ops: np.ndarray
    tol: object = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        ops = np.asarray(self.ops, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise DimensionMismatch(f"Kraus operators must be (k, d, d), got {ops.shape}")
        object.__setattr__(self, "ops", ops)
        d = ops.shape[1]
        defect = opnorm(np.einsum("kji,kjl->il", ops.conj(), ops) - np.eye(d))
        if defect > self.tol.residual_eps:
            raise ValueError(f"Kraus map is not unital: ||sum A*A - I|| = {defect:.3g}")

    @property
    def dim(self):
        return self.ops.shape[1]

    def heisenberg(self, x):
        return np.einsum("kji,jl,klm->im", self.ops.conj(), x, self.ops)

    def schrodinger(self, rho):
        return np.einsum("kij,jl,kml->im", self.ops, rho, self.ops.conj())

    def heisenberg_matrix(self):
        return sum(np.kron(dag(a), a.T) for a in self.ops)

    def schrodinger_matrix(self):
        return sum(np.kron(a, a.conj()) for a in self.ops)

    def power_heisenberg(self, x, n):
        for _ in range(n):
            x = self.heisenberg(x)
        return x


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray
    peripheral_count: int
    second_modulus: float
    gap: float
    indeterminate: bool


@dataclass(frozen=True)
class ErgodicityReport:
    fixed_space_dim: int
    fixed_space_basis: list
    is_ergodic: bool
    invariant_vector: np.ndarray
    is_absorbing: bool
    convergence_curve: np.ndarray
    monotone_slack: float
    limit_defect: float
    limit_fixed_defect: float
    indeterminate: bool
    agree: bool


def _check_dim(Z, x):
    x = as_matrix(x)
    if x.shape != (Z.dim, Z.dim):
        raise DimensionMismatch(f"expected {Z.dim}x{Z.dim}, got {x.shape}")
    return x


def apply_heisenberg(Z, x):
    return Z.heisenberg(_check_dim(Z, x))


def validate_state(rho, tol=DEFAULT_TOL):
    rho = as_matrix(rho, square=True)
    if opnorm(rho - dag(rho)) > tol.residual_eps:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol.residual_eps:
        raise ValueError("density matrix does not have unit trace")
    if np.linalg.eigvalsh((rho + dag(rho)) / 2).min() < -tol.rank_eps:
        raise ValueError("density matrix is not positive")
    return rho


def apply_schrodinger(Z, rho):
    rho = validate_state(_check_dim(Z, rho), Z.tol)
    return Z.schrodinger(rho)


def fixed_point_space(Z, tol=None):
    """Basis of ``{x : Z(x) = x}`` from the null space of ``L - I``.

    ``L`` is the ``d^2 x d^2`` Heisenberg matrix; singular values of
    ``L - I`` below ``100 * rank_eps`` count as zero.
    """
    tol = tol or Z.tol
    d = Z.dim
    L = Z.heisenberg_matrix()
    _, s, vh = np.linalg.svd(L - np.eye(d * d))
    null = vh[s <= 100 * tol.rank_eps].conj()
    return [v.reshape(d, d) for v in null]


def spectral_summary(Z):
    """Peripheral spectrum and gap of the vectorised action.

    ``second_modulus`` is the largest modulus among non-peripheral
    eigenvalues; the gap is ``1 - second_modulus``.
    """
    ev = np.linalg.eigvals(Z.heisenberg_matrix())
    mod = np.abs(ev)
    periph = mod >= 1 - PERIPHERAL_EPS
    rest = mod[~periph]
    r2 = float(rest.max()) if rest.size else 0.0
    gap = 1.0 - r2
    return SpectralSummary(ev, int(periph.sum()), r2, gap, bool(gap < GAP_FLOOR))


def trace_distance(a, b):
    h = a - b
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh((h + dag(h)) / 2))))


def probe_states(d):
    """Maximally mixed state plus ``d^2`` states built from matrix units.

    Diagonal units, and for ``i < j`` the states on ``span{e_i, e_j}`` with
    Bloch vectors along ``x`` and ``y``; together they span the Hermitian
    matrices.
    """
    out = [np.eye(d, dtype=complex) / d]
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1
        out.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            for phase in (1, 1j):
                v = np.zeros(d, dtype=complex)
                v[i] = 1 / np.sqrt(2)
                v[j] = phase / np.sqrt(2)
                out.append(np.outer(v, v.conj()))
    return out


def default_n_max(summary, atol):
    base = 10 * int(np.ceil(1 / max(summary.gap, 1e-12)))
    if summary.peripheral_count > 1 or summary.indeterminate:
        return min(base, 2000)
    r2 = summary.second_modulus
    extra = 0 if r2 <= 0 else 2 * int(np.ceil(np.log(atol) / np.log(r2)))
    return min(base + extra, 100000)


def _unit(delta, d):
    delta = np.atleast_1d(np.asarray(delta, dtype=complex))
    if delta.shape != (d,):
        raise DimensionMismatch(f"delta must have length {d}")
    return delta / np.linalg.norm(delta)


def absorbing_check(Z, delta, n_max=None, tol=None, atol=1e-6):
    """Decide whether ``<delta, . delta>`` is absorbing for ``Z``.

    Returns ``(is_absorbing, curve)`` where ``curve[n]`` is the worst trace
    distance between ``Z_*^{n+1}(probe)`` and ``|delta><delta|`` over
    :func:`probe_states`.

    Raises
    ------
    NotInvariant
        If the vector state is not invariant.
    """
    tol = tol or Z.tol
    d = Z.dim
    delta = _unit(delta, d)
    target = np.outer(delta, delta.conj())
    inv = opnorm(Z.schrodinger(target) - target)
    if inv > tol.residual_eps:
        raise NotInvariant(f"||Z_*(|d><d|) - |d><d||| = {inv:.3g}")
    if n_max is None:
        n_max = default_n_max(spectral_summary(Z), atol)
    states = np.array(probe_states(d))
    curve = []
    for _ in range(max(n_max, 1)):
        states = np.einsum("kij,sjl,kml->sim", Z.ops, states, Z.ops.conj())
        curve.append(max(trace_distance(s, target) for s in states))
        if curve[-1] <= atol:
            break
    curve = np.asarray(curve)
    return bool(curve[-1] <= atol), curve


def equivalence_report(Z, delta, n_max=None, tol=None, atol=1e-6):
    """Absorption (d) and ergodicity (e), decided independently, plus the
    monotonicity argument linking them.

    ``monotone_slack`` is the smallest eigenvalue of
    ``Z^{n+1}(|d><d|) - Z^n(|d><d|)`` seen along the iteration;
    ``limit_defect`` is ``||Z^n(|d><d|) - I||`` at the last step.

    Raises
    ------
    EquivalenceViolation
        If the verdicts disagree on an instance whose spectral gap is not
        flagged indeterminate.
    """
    tol = tol or Z.tol
    d = Z.dim
    delta = _unit(delta, d)
    basis = fixed_point_space(Z, tol)
    ergodic = len(basis) == 1
    summary = spectral_summary(Z)
    if n_max is None:
        n_max = default_n_max(summary, atol)
    absorbing, curve = absorbing_check(Z, delta, n_max, tol, atol)

    x = np.outer(delta, delta.conj())
    slack = np.inf
    for _ in range(max(n_max, 1)):
        nxt = Z.heisenberg(x)
        diff = nxt - x
        slack = min(slack, float(np.linalg.eigvalsh((diff + dag(diff)) / 2).min()))
        x = nxt
        if ergodic and opnorm(x - np.eye(d)) <= atol:
            break
    limit_defect = opnorm(x - np.eye(d))
    fixed_defect = opnorm(Z.heisenberg(x) - x)
    agree = ergodic == absorbing
    indeterminate = summary.indeterminate and summary.peripheral_count <= 1
    if not agree and not indeterminate:
        raise EquivalenceViolation(
            f"ergodic={ergodic} but absorbing={absorbing} (gap {summary.gap:.3g})")
    return ErgodicityReport(len(basis), basis, ergodic, delta, absorbing, curve,
                            slack, limit_defect, fixed_defect, indeterminate, agree)
