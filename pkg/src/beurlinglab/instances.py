"""
Seeded instance generators.

All randomness comes from ``numpy.random.Generator`` with the PCG64 bit
generator, seeded as ``SeedSequence([seed, kind_index])`` so different
instance kinds drawn from one seed use independent streams.
"""

import numpy as np

from .contraction import random_contraction
from .cocycle import ToyCocycle, compress_Z
from .cpmaps import KrausMap, spectral_summary
from .errors import BadDims
from .numeric import dag, random_unitary

__all__ = ["KINDS", "rng_for", "generate_instance", "amplitude_damping_unitary",
           "amplitude_damping_kraus", "amplitude_damping_cocycle",
           "random_star_stable", "random_invariant_kraus",
           "random_nonergodic_kraus", "random_ergodic_cocycle",
           "nonergodic_cocycle", "identity_cocycle"]

KINDS = ("random_contraction", "star_stable", "unitary", "amplitude_damping",
         "random_cocycle", "nonergodic_cocycle")


def rng_for(seed, kind):
    idx = KINDS.index(kind) if kind in KINDS else len(KINDS)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), idx])))


def random_star_stable(rng, d, radius=0.9, margin=0.0):
    """Random contraction with spectral radius at most ``radius``.

    A Ginibre draw is scaled to norm ``1/(1+margin)``; if its spectral radius
    exceeds ``radius`` the matrix is rescaled by ``radius / rho``.
    """
    t = random_contraction(rng, d, margin)
    rho = np.max(np.abs(np.linalg.eigvals(t)))
    if rho > radius:
        t = t * (radius / rho)
    return t


def amplitude_damping_unitary(lam=0.75):
    """Generator on ``C^2 (x) C^2`` with ``|1,e0> -> sqrt(1-lam)|1,e0> + sqrt(lam)|0,e1>``.

    Basis order is ``|h, e>`` with ``h`` the major index.
    """
    a, b = np.sqrt(1 - lam), np.sqrt(lam)
    u = np.zeros((4, 4), dtype=complex)
    # columns: |0e0>, |0e1>, |1e0>, |1e1>
    u[0, 0] = 1
    u[:, 2] = [0, b, a, 0]
    u[:, 1] = [0, a, -b, 0]
    u[3, 3] = 1
    return u


def amplitude_damping_kraus(lam=0.75):
    a, b = np.sqrt(1 - lam), np.sqrt(lam)
    return np.array([[[1, 0], [0, a]], [[0, -b], [0, 0]]], dtype=complex)


def amplitude_damping_cocycle(N=40, lam=0.75):
    return ToyCocycle(amplitude_damping_unitary(lam), 2, 2, N, np.array([1, 0]))


def identity_cocycle(d, m=2, N=10):
    delta = np.zeros(d)
    delta[0] = 1
    return ToyCocycle(np.eye(d * m), d, m, N, delta)


def nonergodic_cocycle(N=20, phases=(1.0, 1j), m=2):
    """``u = U (x) I`` with ``U`` diagonal; ``Z`` is conjugation by a unitary."""
    U = np.diag(np.asarray(phases, dtype=complex))
    d = U.shape[0]
    delta = np.zeros(d)
    delta[0] = 1
    return ToyCocycle(np.kron(U, np.eye(m)), d, m, N, delta)


def _unitary_with_first_column(rng, v):
    """Random unitary whose first column is the unit vector ``v``."""
    n = v.shape[0]
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    z[:, 0] = v
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))[None, :]
    return q


def random_invariant_kraus(rng, d, k, delta=None):
    """Random unital CP map with invariant vector state ``delta``.

    An isometry ``V: C^d -> C^k (x) C^d`` is drawn with ``V delta = c (x) delta``,
    then ``A_i = (<i| (x) I) V``; the result is conjugated by a random unitary
    so ``delta`` ends up in general position.
    """
    e0 = np.zeros(d, dtype=complex)
    e0[0] = 1
    c = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    c /= np.linalg.norm(c)
    first = np.kron(c, e0)
    Q = _unitary_with_first_column(rng, first)
    V = Q[:, :d]
    ops = V.reshape(k, d, d)
    W = random_unitary(rng, d)
    ops = np.array([W @ a @ dag(W) for a in ops])
    return KrausMap(ops), W @ e0


def random_nonergodic_kraus(rng, d, k):
    """Direct sum of an invariant-state map on ``d-1`` levels and a decoupled
    unitary block on the last level; the block projector is a second fixed point."""
    if d < 2:
        raise BadDims("need d >= 2 for a non-ergodic instance")
    if d == 2:
        inner = [np.eye(1, dtype=complex)] + [np.zeros((1, 1), complex)] * (k - 1)
        inner = np.array(inner)
        delta = np.array([1.0, 0.0], dtype=complex)
    else:
        Zi, delta_i = random_invariant_kraus(rng, d - 1, k)
        inner = Zi.ops
        delta = np.append(delta_i, 0)
    c = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    c /= np.linalg.norm(c)
    ops = np.zeros((k, d, d), dtype=complex)
    for i in range(k):
        ops[i, :d - 1, :d - 1] = inner[i]
        ops[i, d - 1, d - 1] = c[i]
    return KrausMap(ops), delta


def _isometry_fixing(rng, d, m, delta):
    """Random isometry ``V: C^d -> C^d (x) C^m`` with ``V delta = delta (x) e_0``."""
    first = np.kron(delta, np.eye(m)[0])
    Q = _unitary_with_first_column(rng, first)
    basis = _unitary_with_first_column(rng, delta)
    # columns of V are images of an orthonormal basis starting with delta
    return Q[:, :d] @ dag(basis)


def _reset_isometry(rng, d, m, delta):
    """Isometry of the reset channel ``x -> <delta, x delta> I`` (needs ``m >= d``)."""
    basis = _unitary_with_first_column(rng, delta)
    V = np.zeros((d * m, d), dtype=complex)
    for i in range(d):
        V += np.kron(delta, np.eye(m)[i])[:, None] * basis[:, i].conj()[None, :]
    return V


def random_ergodic_cocycle(rng, d, m, N, max_second=None, tries=200, tol=1e-6):
    """Random generator with ``u^*(delta (x) e_0) = delta (x) omega``.

    ``u^*`` restricted to ``H (x) e_0`` is the polar part of
    ``cos(t) V_reset + sin(t) V_random``, both isometries sending ``delta``
    to ``delta (x) e_0``; a random unitary on the field then moves ``e_0``
    to ``omega``. The angle shrinks until the compressed map has second
    eigenvalue modulus at most ``max_second``. ``Delta_n^2`` decays like
    ``r_2^n``; the default ``(tol/10)^(2/k)`` uses ``k = min(3N/4, N - 10)``
    decay steps, the fewest available to the burn-in test and to the
    exactness check at ``n = 5``. Without room for the reset channel
    (``m < d``) draws are rejected instead.
    """
    if max_second is None:
        steps = max(min((3 * N) // 4, N - 10), 1)
        max_second = (tol / 10) ** (2 / steps)
    delta = np.zeros(d, dtype=complex)
    delta[0] = 1
    theta = rng.uniform(0.3, 1.0) * np.pi / 2
    for _ in range(tries):
        V = _isometry_fixing(rng, d, m, delta)
        if m >= d:
            V = np.cos(theta) * _reset_isometry(rng, d, m, delta) + np.sin(theta) * V
            w, _, vh = np.linalg.svd(V, full_matrices=False)
            V = w @ vh
        Y = random_unitary(rng, m)
        V = np.kron(np.eye(d), Y) @ V
        # complete V to u^* and invert
        Q = _complete(rng, V)
        c = ToyCocycle(dag(Q), d, m, N, delta)
        s = spectral_summary(compress_Z(c))
        if s.peripheral_count == 1 and s.second_modulus <= max_second:
            return c
        theta *= 0.8
    raise BadDims(f"no generator with second eigenvalue modulus <= {max_second:.3g} "
                  f"found for d = {d}, m = {m}")


def _complete(rng, V):
    """Unitary on ``C^d (x) C^m`` whose ``(h, e_0)`` columns are ``V h``."""
    n, d = V.shape
    m = n // d
    z = rng.standard_normal((n, n - d)) + 1j * rng.standard_normal((n, n - d))
    z -= V @ (dag(V) @ z)
    rest, _ = np.linalg.qr(z)
    Q = np.zeros((n, n), dtype=complex)
    cols = np.arange(n).reshape(d, m)
    Q[:, cols[:, 0]] = V
    Q[:, cols[:, 1:].ravel()] = rest
    return Q


def generate_instance(kind, seed, dims):
    """Deterministic instance of the requested kind.

    ``dims`` may carry ``d_H``, ``m``, ``N`` and ``lam``. Returns a dict of
    named matrices (and a ``cocycle`` for cocycle kinds).
    """
    d = int(dims.get("d_H", 2))
    m = int(dims.get("m", 2))
    N = int(dims.get("N", 20))
    if d < 1 or m < 2 or N < 1:
        raise BadDims(f"invalid dims {dims}")
    rng = rng_for(seed, kind)
    if kind == "random_contraction":
        return {"T": random_contraction(rng, d, float(dims.get("margin", 0.0)))}
    if kind == "star_stable":
        return {"T": random_star_stable(rng, d)}
    if kind == "unitary":
        return {"T": random_unitary(rng, d)}
    if kind == "amplitude_damping":
        lam = float(dims.get("lam", 0.75))
        c = amplitude_damping_cocycle(N, lam)
        return {"u": c.u, "delta": c.delta, "kraus": amplitude_damping_kraus(lam),
                "cocycle": c}
    if kind == "random_cocycle":
        c = random_ergodic_cocycle(rng, d, m, N)
        return {"u": c.u, "delta": c.delta, "cocycle": c}
    if kind == "nonergodic_cocycle":
        if d < 2:
            raise BadDims("non-ergodic cocycle needs d_H >= 2")
        phases = np.exp(2j * np.pi * rng.uniform(size=d))
        phases[0] = 1.0
        c = nonergodic_cocycle(N, phases, m)
        return {"u": c.u, "delta": c.delta, "cocycle": c}
    raise BadDims(f"unknown instance kind {kind!r}")
