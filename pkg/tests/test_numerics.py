import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import care_scipy, lyapunov_kron, random_hurwitz
from raidd.errors import (DimensionMismatch, NoStabilizingSolution, NonFiniteInput, NotHurwitz,
                          UnstableSystem)
from raidd.numerics import (DEFAULT_SETTINGS, NumericSettings, care_residual, hankel_norm,
                            hinf_norm, matrix_exponential, sigma_max_grid, solve_care,
                            solve_lyapunov, spectral_abscissa)
from raidd.sysmodel import StateSpace

seeds = st.integers(0, 2**32 - 1)


def test_lyapunov_scalar_and_diagonal():
    assert solve_lyapunov([[-1.0]], [[1.0]]) == pytest.approx(np.array([[0.5]]))
    W = solve_lyapunov(np.diag([-1.0, -2.0]), np.eye(2))
    np.testing.assert_allclose(W, np.diag([0.5, 0.25]), atol=1e-14)


def test_lyapunov_matches_kronecker_oracle(rng):
    for n in (1, 2, 5, 8):
        A = random_hurwitz(rng, n)
        M = rng.standard_normal((n, n))
        Q = M @ M.T
        np.testing.assert_allclose(solve_lyapunov(A, Q), lyapunov_kron(A, Q), atol=1e-9)


def test_lyapunov_uuv_closed_loop(uuv):
    A, B, _ = uuv
    X = solve_care(A, 2 * B, np.eye(3))
    Acl = A - 4 * B @ B.T @ X
    Q = B @ B.T
    W = solve_lyapunov(Acl, Q)
    assert np.linalg.norm(Acl @ W + W @ Acl.T + Q) < 1e-9


def test_lyapunov_errors():
    with pytest.raises(NotHurwitz):
        solve_lyapunov([[0.0]], [[1.0]])
    with pytest.raises(DimensionMismatch):
        solve_lyapunov(-np.eye(2), np.eye(3))
    with pytest.raises(NonFiniteInput):
        solve_lyapunov([[np.nan]], [[1.0]])


@given(seeds, st.integers(1, 10))
def test_lyapunov_residual_property(seed, n):
    rng = np.random.default_rng(seed)
    A = random_hurwitz(rng, n)
    M = rng.standard_normal((n, n))
    Q = M @ M.T
    W = solve_lyapunov(A, Q)
    assert np.linalg.norm(A @ W + W @ A.T + Q) <= 1e-9 * (1 + np.linalg.norm(Q))
    np.testing.assert_array_equal(W, W.T)


def test_care_scalar_examples():
    assert solve_care([[-1.0]], [[1.0]], [[1.0]])[0, 0] == pytest.approx(np.sqrt(2) - 1, abs=1e-14)
    assert solve_care([[0.0]], [[1.0]], [[1.0]])[0, 0] == pytest.approx(1.0, abs=1e-14)


def test_care_uuv(uuv):
    A, B, _ = uuv
    X = solve_care(A, 2 * B, np.eye(3))
    assert care_residual(A, 2 * B, np.eye(3), X) < 1e-8
    assert spectral_abscissa(A - 4 * B @ B.T @ X) < 0
    np.testing.assert_allclose(X, care_scipy(A, 2 * B, np.eye(3)), rtol=1e-8, atol=1e-10)


def test_care_no_stabilizing_solution():
    # uncontrollable, unobservable mode on the imaginary axis
    with pytest.raises(NoStabilizingSolution):
        solve_care([[0.0]], [[0.0]], [[0.0]])


@given(seeds, st.integers(1, 8), st.integers(1, 3))
def test_care_residual_property(seed, n, m):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    B = rng.standard_normal((n, m))
    Q = np.eye(n)
    X = solve_care(A, B, Q)
    assert care_residual(A, B, Q, X) <= 1e-8 * (1 + np.linalg.norm(X) ** 2)
    assert spectral_abscissa(A - B @ B.T @ X) < 0
    np.testing.assert_allclose(X, care_scipy(A, B, Q), rtol=1e-6, atol=1e-8)


def test_expm_examples():
    np.testing.assert_array_equal(matrix_exponential(np.zeros((3, 3)), 7.0), np.eye(3))
    assert matrix_exponential([[-1.0]], 1.0)[0, 0] == pytest.approx(np.exp(-1), rel=1e-14)
    np.testing.assert_allclose(matrix_exponential([[0.0, 1.0], [0.0, 0.0]], 2.0),
                               [[1.0, 2.0], [0.0, 1.0]], atol=1e-15)
    with pytest.raises(NonFiniteInput):
        matrix_exponential([[np.inf]])


def test_expm_diagonalizable_accuracy(rng):
    V = rng.standard_normal((4, 4))
    lam = np.array([-3.0, -1.0, 0.5, 2.0])
    M = V @ np.diag(lam) @ np.linalg.inv(V)
    exact = V @ np.diag(np.exp(2 * lam)) @ np.linalg.inv(V)
    np.testing.assert_allclose(matrix_exponential(M, 2.0), exact, rtol=1e-10, atol=1e-10)


@given(seeds, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_expm_semigroup(seed, t1, t2):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((4, 4))
    M *= 5 / max(np.linalg.norm(M, 2), 5)
    lhs = matrix_exponential(M, t1) @ matrix_exponential(M, t2)
    np.testing.assert_allclose(lhs, matrix_exponential(M, t1 + t2), atol=1e-8)


def test_spectral_abscissa_examples(uuv):
    assert spectral_abscissa(np.diag([-1.0, -3.0])) == pytest.approx(-1.0)
    assert spectral_abscissa([[0.0, 1.0], [-1.0, 0.0]]) == pytest.approx(0.0, abs=1e-15)
    # the depth integrator puts an eigenvalue at the origin
    assert spectral_abscissa(uuv[0]) == pytest.approx(0.0, abs=1e-12)
    assert spectral_abscissa(np.zeros((0, 0))) == -np.inf


def test_hinf_examples():
    assert hinf_norm(StateSpace.static([[3.0]])) == 3.0
    assert hinf_norm(StateSpace([[-1.0]], [[1.0]], [[1.0]], [[0.0]])) == pytest.approx(1.0, abs=1e-6)
    assert hinf_norm(StateSpace([[-1.0]], [[2.0]], [[3.0]], [[0.0]])) == pytest.approx(6.0, abs=1e-5)
    with pytest.raises(UnstableSystem):
        hinf_norm(StateSpace([[1.0]], [[1.0]], [[1.0]], [[0.0]]))


def test_hinf_resonant_peak():
    # lightly damped oscillator: peak 1 / (2 zeta sqrt(1 - zeta^2)) near w = 1
    z = 0.01
    sys = StateSpace([[0.0, 1.0], [-1.0, -2 * z]], [[0.0], [1.0]], [[1.0, 0.0]], [[0.0]])
    assert hinf_norm(sys) == pytest.approx(1 / (2 * z * np.sqrt(1 - z * z)), rel=1e-6)


@given(seeds, st.integers(1, 6), st.integers(1, 3), st.integers(1, 3))
def test_hinf_bounds_grid_and_hankel(seed, n, m, p):
    rng = np.random.default_rng(seed)
    sys = StateSpace(random_hurwitz(rng, n), rng.standard_normal((n, m)),
                     rng.standard_normal((p, n)), rng.standard_normal((p, m)))
    h = hinf_norm(sys)
    grid = sigma_max_grid(sys, np.logspace(-4, 4, 200))
    assert h >= grid.max() - 1e-6
    assert h >= np.linalg.norm(sys.D, 2) - 1e-12
    assert hankel_norm(sys) <= h + 1e-9


def test_hankel_examples():
    assert hankel_norm(StateSpace([[-1.0]], [[1.0]], [[1.0]], [[0.0]])) == pytest.approx(0.5)
    assert hankel_norm(StateSpace([[-2.0]], [[2.0]], [[1.0]], [[0.0]])) == pytest.approx(0.5)
    with pytest.raises(UnstableSystem):
        hankel_norm(StateSpace([[0.5]], [[1.0]], [[1.0]], [[0.0]]))


def test_settings_record():
    assert DEFAULT_SETTINGS.hurwitz_margin == 1e-12
    assert DEFAULT_SETTINGS.are_residual == 1e-8
    assert DEFAULT_SETTINGS.bisection_tol == 1e-6
    loose = NumericSettings(bisection_tol=1e-3)
    sys = StateSpace([[-1.0]], [[2.0]], [[3.0]], [[0.0]])
    assert abs(hinf_norm(sys, loose) - 6.0) <= 1e-3 * 6
