import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from beurlinglab.errors import DimensionMismatch, NotHermitian, NotPSD
from beurlinglab.numeric import (DEFAULT_TOL, Tolerance, as_matrix, dag, eigh_sorted,
                                 hermitian_sqrt, opnorm, phase_normalize, random_unitary,
                                 range_basis, unitarity_defect)


def ginibre(rng, r, c=None):
    c = c or r
    return rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))


def test_tolerance_defaults_and_validation():
    assert DEFAULT_TOL.rank_eps == 1e-9 and DEFAULT_TOL.residual_eps == 1e-8
    for bad in (0.0, 1.0, -1e-3):
        with pytest.raises(ValueError):
            Tolerance(rank_eps=bad)


def test_as_matrix_rejects_nonfinite_and_ragged():
    with pytest.raises(ValueError):
        as_matrix([[1, np.nan]])
    with pytest.raises(DimensionMismatch):
        as_matrix([[1, 2]], square=True)


def test_sqrt_examples():
    assert np.allclose(hermitian_sqrt(np.eye(2)), np.eye(2))
    assert np.allclose(hermitian_sqrt(np.diag([0, 0.25])), np.diag([0, 0.5]))


def test_sqrt_errors():
    with pytest.raises(NotHermitian):
        hermitian_sqrt(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NotPSD):
        hermitian_sqrt(np.diag([1.0, -0.1]))


def test_sqrt_clamps_tiny_negative():
    s = hermitian_sqrt(np.diag([1.0, -1e-12]))
    assert np.allclose(s, np.diag([1.0, 0.0]))


def test_sqrt_matches_scipy(rng):
    for d in range(1, 7):
        a = ginibre(rng, d)
        m = dag(a) @ a
        s = hermitian_sqrt(m)
        assert opnorm(s @ s - m) <= 1e-10 * max(1, opnorm(m))
        assert np.allclose(s, scipy.linalg.sqrtm(m), atol=1e-8)


@given(st.integers(1, 8), st.integers(0, 10_000))
def test_sqrt_squares_back(d, seed):
    a = ginibre(np.random.default_rng(seed), d)
    m = dag(a) @ a
    s = hermitian_sqrt(m)
    assert opnorm(s @ s - m) <= DEFAULT_TOL.residual_eps * max(1.0, opnorm(m))
    assert opnorm(s - dag(s)) == 0.0


def test_range_basis_examples():
    assert range_basis(np.zeros((2, 2))).shape == (2, 0)
    b = range_basis(np.diag([1.0, 0.0]))
    assert np.allclose(b, [[1], [0]])
    D = np.diag([1.0, np.sqrt(3) / 2])
    assert range_basis(D).shape == (2, 2)


@given(st.integers(1, 6), st.integers(0, 5), st.integers(0, 10_000))
def test_range_basis_orthonormal_and_spans(d, rank, seed):
    rng = np.random.default_rng(seed)
    rank = min(rank, d)
    m = ginibre(rng, d, rank) @ ginibre(rng, rank, d) if rank else np.zeros((d, d))
    b = range_basis(m)
    assert b.shape[1] == np.linalg.matrix_rank(m, tol=1e-9 * max(1, opnorm(m)))
    assert opnorm(dag(b) @ b - np.eye(b.shape[1])) <= DEFAULT_TOL.residual_eps
    # columns of m lie in span(b)
    assert opnorm(m - b @ dag(b) @ m) <= 1e-9 * max(1, opnorm(m))


def test_range_basis_is_deterministic(rng):
    m = ginibre(rng, 4, 2) @ ginibre(rng, 2, 4)
    assert np.array_equal(range_basis(m), range_basis(m.copy()))


def test_unitarity_defect_examples():
    assert unitarity_defect(np.eye(3)) == 0.0
    assert unitarity_defect(np.diag([1.0, 0.0])) == pytest.approx(1.0)


@given(st.integers(1, 5), st.integers(0, 10_000))
def test_unitarity_defect_unitarily_invariant(d, seed):
    rng = np.random.default_rng(seed)
    m = ginibre(rng, d) / 3
    v, w = random_unitary(rng, d), random_unitary(rng, d)
    assert abs(unitarity_defect(v @ m @ w) - unitarity_defect(m)) <= 10 * DEFAULT_TOL.residual_eps


def test_eigh_sorted_descending_and_phase(rng):
    a = ginibre(rng, 4)
    w, v = eigh_sorted(a + dag(a))
    assert np.all(np.diff(w) <= 0)
    for col in v.T:
        first = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
        assert abs(first.imag) < 1e-12 and first.real > 0


def test_phase_normalize():
    v = np.array([[0, 1j], [-1, 0]])
    out = phase_normalize(v)
    assert np.allclose(out, [[0, 1], [1, 0]])


def test_random_unitary(rng):
    for d in (1, 3, 6):
        assert unitarity_defect(random_unitary(rng, d)) <= 1e-12
