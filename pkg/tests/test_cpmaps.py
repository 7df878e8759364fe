import numpy as np
import pytest
from hypothesis import given, strategies as st

from beurlinglab.cpmaps import (KrausMap, absorbing_check, apply_heisenberg,
                                apply_schrodinger, equivalence_report, fixed_point_space,
                                probe_states, spectral_summary, validate_state)
from beurlinglab.errors import DimensionMismatch, NotInvariant
from beurlinglab.instances import (amplitude_damping_kraus, random_invariant_kraus,
                                   random_nonergodic_kraus)
from beurlinglab.numeric import DEFAULT_TOL, dag, opnorm

AD = KrausMap(amplitude_damping_kraus(0.75))
E0 = np.array([1.0, 0.0])
PHASE = KrausMap(np.diag([1.0, 1j])[None])


def test_kraus_validation():
    with pytest.raises(ValueError):
        KrausMap(np.array([[[1, 0], [0, 0.5]]]))
    with pytest.raises(DimensionMismatch):
        KrausMap(np.ones((2, 2, 3)))


def test_heisenberg_examples():
    assert np.allclose(apply_heisenberg(AD, np.eye(2)), np.eye(2))
    a, b = 0.3, -1.7
    assert np.allclose(apply_heisenberg(AD, np.diag([a, b])), np.diag([a, b / 4 + 3 * a / 4]))
    x = np.array([[1, 2j], [0.5, -1]])
    y = apply_heisenberg(PHASE, x)
    assert np.allclose(np.sort_complex(np.linalg.eigvals(y)), np.sort_complex(np.linalg.eigvals(x)))


def test_schrodinger_examples():
    assert np.allclose(apply_schrodinger(AD, np.diag([1.0, 0])), np.diag([1.0, 0]))
    assert np.allclose(apply_schrodinger(AD, np.diag([0, 1.0])), np.diag([0.75, 0.25]))
    assert np.allclose(apply_schrodinger(PHASE, np.eye(2) / 2), np.eye(2) / 2)
    with pytest.raises(ValueError):
        validate_state(np.diag([2.0, 0]))


def test_matrices_match_actions(rng):
    Z, _ = random_invariant_kraus(rng, 3, 3)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.allclose((Z.heisenberg_matrix() @ x.ravel()).reshape(3, 3), Z.heisenberg(x))
    assert np.allclose((Z.schrodinger_matrix() @ x.ravel()).reshape(3, 3), Z.schrodinger(x))


def test_fixed_point_examples():
    basis = fixed_point_space(AD)
    assert len(basis) == 1
    b = basis[0] / basis[0][0, 0]
    assert np.allclose(b, np.eye(2))
    basis = fixed_point_space(PHASE)
    assert len(basis) == 2
    for b in basis:
        assert abs(b[0, 1]) < 1e-12 and abs(b[1, 0]) < 1e-12
    assert len(fixed_point_space(KrausMap(np.eye(3)[None]))) == 9


def test_absorbing_examples():
    ok, curve = absorbing_check(AD, E0)
    assert ok
    ratios = curve[1:] / curve[:-1]
    assert np.all(ratios <= 0.5 + 1e-9)
    ok, curve = absorbing_check(PHASE, E0, n_max=50)
    assert not ok and np.allclose(curve, 1.0)
    ok, _ = absorbing_check(KrausMap(np.ones((1, 1, 1))), [1.0])
    assert ok
    with pytest.raises(NotInvariant):
        absorbing_check(AD, [0, 1.0])


def test_equivalence_examples():
    rep = equivalence_report(AD, E0)
    assert rep.is_ergodic and rep.is_absorbing and rep.agree
    assert rep.limit_defect <= 1e-6 and rep.monotone_slack >= -1e-12
    rep = equivalence_report(PHASE, E0)
    assert not rep.is_ergodic and not rep.is_absorbing and rep.agree
    rep = equivalence_report(KrausMap(np.ones((1, 1, 1))), [1.0])
    assert rep.is_ergodic and rep.is_absorbing


def test_amplitude_damping_closed_form():
    # Z^n(|e0><e0|) = diag(1, 1 - 4^-n)
    x = np.diag([1.0, 0])
    for n in range(1, 12):
        x = AD.heisenberg(x)
        assert np.allclose(x, np.diag([1, 1 - 4.0 ** -n]), atol=1e-15)


def test_spectral_summary_flags():
    s = spectral_summary(AD)
    assert s.peripheral_count == 1 and s.second_modulus == pytest.approx(0.5)
    s = spectral_summary(PHASE)
    assert s.peripheral_count == 4


def test_probe_states_span_hermitian():
    d = 3
    probes = probe_states(d)
    assert all(abs(np.trace(p) - 1) < 1e-14 for p in probes)
    M = np.array([p.ravel() for p in probes])
    assert np.linalg.matrix_rank(M) == d * d


@given(st.integers(1, 5), st.integers(1, 6), st.integers(0, 10_000))
def test_random_invariant_properties(d, k, seed):
    rng = np.random.default_rng(seed)
    Z, delta = random_invariant_kraus(rng, d, k)
    eps = DEFAULT_TOL.residual_eps
    assert opnorm(Z.heisenberg(np.eye(d)) - np.eye(d)) <= eps
    rho = np.outer(delta, delta.conj())
    assert opnorm(Z.schrodinger(rho) - rho) <= eps
    # duality
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    r = a @ dag(a)
    r /= np.trace(r)
    assert abs(np.trace(Z.schrodinger(r) @ x) - np.trace(r @ Z.heisenberg(x))) <= eps * max(1, opnorm(x))
    # monotone climb of Z^n(|delta><delta|)
    y = rho
    for _ in range(20):
        nxt = Z.heisenberg(y)
        assert np.linalg.eigvalsh((nxt - y + dag(nxt - y)) / 2).min() >= -DEFAULT_TOL.rank_eps
        y = nxt


@given(st.integers(2, 5), st.integers(1, 5), st.integers(0, 10_000))
def test_nonergodic_generator(d, k, seed):
    Z, delta = random_nonergodic_kraus(np.random.default_rng(seed), d, k)
    rep = equivalence_report(Z, delta)
    assert not rep.is_ergodic and not rep.is_absorbing and rep.agree
