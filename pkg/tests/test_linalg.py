import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from scfg_ngram.linalg import SingularMatrixError, lu_factor, lu_solve, spectral_radius_estimate


def test_identity():
    f = lu_factor(np.eye(4))
    b = np.array([1.0, -2.0, 3.5, 0.25])
    assert np.array_equal(lu_solve(f, b), b)
    assert np.array_equal(f.reconstruct(), np.eye(4))


def test_scalar():
    # 1 - 2q at q = 0.25, rhs p = 0.75
    assert lu_solve(lu_factor([[0.5]]), [0.75]) == pytest.approx([1.5], abs=1e-15)


def test_two_by_two():
    x = lu_solve(lu_factor([[2.0, 1.0], [1.0, 3.0]]), [3.0, 5.0])
    np.testing.assert_allclose(x, [0.8, 1.4], atol=1e-15)


def test_pivoting_needed():
    m = np.array([[0.0, 1.0], [1.0, 1.0]])
    np.testing.assert_allclose(lu_solve(lu_factor(m), [2.0, 3.0]), [1.0, 2.0])


def test_singular():
    with pytest.raises(SingularMatrixError):
        lu_factor([[1.0, 2.0], [2.0, 4.0]])


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        lu_solve(lu_factor(np.eye(3)), np.ones(2))
    with pytest.raises(ValueError):
        lu_factor(np.ones((2, 3)))


@given(st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_diagonally_dominant_recovers_x(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.uniform(-1, 1, (n, n))
    m += np.diag(np.abs(m).sum(axis=1) + rng.uniform(0.1, 1.0, n))
    x = rng.normal(size=n)
    f = lu_factor(m)
    np.testing.assert_allclose(lu_solve(f, m @ x), x, rtol=1e-8, atol=1e-8 * np.abs(x).max())
    scale = np.abs(m).max()
    assert np.abs(f.reconstruct() - m).max() <= 1e-10 * scale


@given(st.integers(2, 25), st.integers(0, 2**32 - 1))
def test_matches_scipy(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n)) + n * np.eye(n)
    b = rng.normal(size=(n, 3))
    np.testing.assert_allclose(lu_solve(lu_factor(m), b), scipy.linalg.solve(m, b), rtol=1e-9, atol=1e-12)


def test_batch_equals_single_solves(rng):
    n, k = 40, 25
    m = np.eye(n) - rng.uniform(0, 1.0 / n, (n, n))
    f = lu_factor(m)
    b = rng.uniform(0, 1, (n, k))
    batch = lu_solve(f, b)
    for j in range(k):
        single = lu_solve(f, b[:, j])
        assert np.array_equal(batch[:, j], single)
        fresh = lu_solve(lu_factor(m), b[:, j])
        assert np.abs(single - fresh).max() <= 1e-10


@pytest.mark.parametrize(
    "m, rho",
    [
        ([[0.5]], 0.5),
        (np.eye(3), 1.0),
        ([[0.0, 0.9], [0.9, 0.0]], 0.9),
        (np.zeros((3, 3)), 0.0),
        ([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]], 0.0),
        ([[0.5, 1.0], [0.0, 0.5]], 0.5),
    ],
)
def test_spectral_radius_examples(m, rho):
    est = spectral_radius_estimate(m)
    assert est.converged
    assert est.radius == pytest.approx(rho, abs=1e-9)


@given(st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_spectral_radius_triangular(n, seed):
    rng = np.random.default_rng(seed)
    m = np.triu(rng.uniform(0, 2, (n, n)))
    est = spectral_radius_estimate(m, tol=1e-12)
    assert est.radius == pytest.approx(np.abs(np.diag(m)).max(), abs=1e-6)


@given(st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_spectral_radius_matches_eigvals(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.uniform(0, 1, (n, n)) * (rng.uniform(0, 1, (n, n)) < 0.3)
    est = spectral_radius_estimate(m)
    assert est.radius == pytest.approx(np.abs(scipy.linalg.eigvals(m)).max(), abs=1e-6)


def test_spectral_radius_rejects_negative():
    with pytest.raises(ValueError):
        spectral_radius_estimate([[-1.0]])


def test_nonconvergence_reported():
    est = spectral_radius_estimate([[0.5, 1.0], [0.0, 0.5]], max_iter=2)
    assert not est.converged
    assert est.iterations == 2
