"""Dense kernels for continuous-time control computations.

Lyapunov and Riccati solvers, the matrix exponential, spectral abscissa,
and the H-infinity / Hankel norms of stable state-space systems. Functions
taking a system only rely on its ``A, B, C, D`` attributes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (BisectionStall, DimensionMismatch, EigenFailure, NoStabilizingSolution,
                     NonFiniteInput, NotHurwitz, SingularSubspace, UnstableSystem)

__all__ = [
    "NumericSettings", "DEFAULT_SETTINGS", "solve_lyapunov", "solve_care", "matrix_exponential",
    "spectral_abscissa", "hinf_norm", "hankel_norm", "sigma_max_grid",
]


@dataclass(frozen=True)
class NumericSettings:
    """Every numerical threshold used by the package, in one place."""

    hurwitz_margin: float = 1e-12
    hamiltonian_axis_tol: float = 1e-8
    subspace_cond_max: float = 1e12
    are_residual: float = 1e-8
    lyapunov_residual: float = 1e-9
    bisection_tol: float = 1e-6
    imag_axis_rel: float = 1e-8
    bisection_max_iter: int = 400


DEFAULT_SETTINGS = NumericSettings()


def _as_matrix(M, name="matrix"):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NonFiniteInput(f"{name} has non-finite entries")
    return M


def _square(M, name):
    M = _as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got {M.shape}")
    return M


def spectral_abscissa(A) -> float:
    """Largest real part among the eigenvalues of ``A`` (``-inf`` for an empty matrix)."""
    A = _square(A, "A")
    if A.shape[0] == 0:
        return -np.inf
    try:
        ev = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    return float(np.max(ev.real))


def solve_lyapunov(A, Q, settings: NumericSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """Solve ``A W + W A^T + Q = 0`` for a Hurwitz ``A``.

    Parameters
    ----------
    A : (n, n) array_like
        Hurwitz state matrix.
    Q : (n, n) array_like
        Symmetric right-hand side.

    Returns
    -------
    W : (n, n) ndarray
        The symmetric solution.
    """
    A = _square(A, "A")
    Q = _square(Q, "Q")
    if Q.shape != A.shape:
        raise DimensionMismatch(f"A is {A.shape} but Q is {Q.shape}")
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    if spectral_abscissa(A) >= -settings.hurwitz_margin:
        raise NotHurwitz("Lyapunov equation needs a Hurwitz A")
    W = sla.solve_continuous_lyapunov(A, -Q)
    return (W + W.T) / 2


def solve_care(A, B, Q, settings: NumericSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """Stabilizing solution of ``A^T X + X A - X B B^T X + Q = 0``.

    The stable invariant subspace of the Hamiltonian
    ``[[A, -B B^T], [-Q, -A^T]]`` is extracted with an ordered real Schur
    decomposition; ``X = U2 U1^{-1}``, then symmetrized.

    Raises
    ------
    NoStabilizingSolution
        The Hamiltonian has eigenvalues too close to the imaginary axis.
    SingularSubspace
        The upper block of the stable subspace basis is rank deficient.
    """
    A = _square(A, "A")
    B = _as_matrix(B, "B")
    Q = _square(Q, "Q")
    n = A.shape[0]
    if B.shape[0] != n or Q.shape != A.shape:
        raise DimensionMismatch(f"incompatible shapes A{A.shape} B{B.shape} Q{Q.shape}")
    if n == 0:
        return np.zeros((0, 0))
    Q = (Q + Q.T) / 2
    H = np.block([[A, -B @ B.T], [-Q, -A.T]])
    ev = np.linalg.eigvals(H)
    if np.min(np.abs(ev.real)) < settings.hamiltonian_axis_tol:
        raise NoStabilizingSolution("Hamiltonian has eigenvalues on the imaginary axis")
    T, Z, sdim = sla.schur(H, output="real", sort="lhp")
    if sdim != n:
        raise NoStabilizingSolution(f"stable subspace has dimension {sdim}, expected {n}")
    U1, U2 = Z[:n, :n], Z[n:, :n]
    if np.linalg.cond(U1) > settings.subspace_cond_max:
        raise SingularSubspace("stable subspace basis is not a graph over the state space")
    X = np.linalg.solve(U1.T, U2.T).T
    return (X + X.T) / 2


def care_residual(A, B, Q, X) -> float:
    R = A.T @ X + X @ A - X @ B @ B.T @ X + Q
    return float(np.linalg.norm(R, "fro"))


def matrix_exponential(M, t: float = 1.0) -> np.ndarray:
    """``exp(M t)`` by scaling and squaring with a diagonal Pade approximant."""
    M = _square(M, "M")
    if not np.isfinite(t):
        raise NonFiniteInput("t must be finite")
    return sla.expm(M * t)


def sigma_max_grid(sys, omegas) -> np.ndarray:
    """Largest singular value of ``C (jw I - A)^{-1} B + D`` at each frequency."""
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    omegas = np.asarray(omegas, dtype=float)
    n = A.shape[0]
    if n == 0:
        s = np.linalg.norm(D, 2) if D.size else 0.0
        return np.full(omegas.shape, s)
    I = np.eye(n)
    G = C @ np.linalg.solve(1j * omegas[:, None, None] * I - A, B) + D
    if G.shape[1] == 0 or G.shape[2] == 0:
        return np.zeros(omegas.shape)
    return np.linalg.svd(G, compute_uv=False)[:, 0]


def _has_imaginary_eig(A, B, C, D, gamma, rel):
    m, p = B.shape[1], C.shape[0]
    R = gamma**2 * np.eye(m) - D.T @ D
    S = gamma**2 * np.eye(p) - D @ D.T
    Ri = np.linalg.inv(R)
    Ah = A + B @ Ri @ D.T @ C
    H = np.block([[Ah, gamma * B @ Ri @ B.T],
                  [-gamma * C.T @ np.linalg.solve(S, C), -Ah.T]])
    ev = np.linalg.eigvals(H)
    return bool(np.any(np.abs(ev.real) < rel * (1 + np.abs(ev))))


def hinf_norm(sys, settings: NumericSettings = DEFAULT_SETTINGS, omegas=None) -> float:
    """H-infinity norm of a stable system.

    A frequency grid supplies the lower bracket; the bracket is then
    narrowed by bisection with the Hamiltonian imaginary-axis eigenvalue
    test. The returned value is the upper end of the final bracket, so it
    never falls below ``sigma_max(D)`` or any sampled grid value.
    """
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    sd = float(np.linalg.norm(D, 2)) if D.size else 0.0
    n = A.shape[0]
    if n == 0 or B.shape[1] == 0 or C.shape[0] == 0:
        return sd
    if spectral_abscissa(A) >= -settings.hurwitz_margin:
        raise UnstableSystem("H-infinity norm requires a stable system")

    if omegas is None:
        ev = np.linalg.eigvals(A)
        omegas = np.concatenate([[0.0], np.logspace(-4, 4, 200), np.abs(ev.imag), np.abs(ev)])
    lo = max(sd, float(np.max(sigma_max_grid(sys, omegas))))
    if lo == 0.0:
        return 0.0
    rel = settings.imag_axis_rel
    hi = 2.0 * lo
    for _ in range(200):
        if not _has_imaginary_eig(A, B, C, D, hi, rel):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise BisectionStall("could not find an upper bound for the H-infinity norm")

    tol = settings.bisection_tol
    for _ in range(settings.bisection_max_iter):
        if hi - lo <= tol * min(1.0, hi):
            return hi
        mid = np.sqrt(lo * hi)
        if not lo < mid < hi:
            return hi
        if _has_imaginary_eig(A, B, C, D, mid, rel):
            lo = mid
        else:
            hi = mid
    raise BisectionStall(f"bracket [{lo}, {hi}] did not shrink below tolerance")


def hankel_norm(sys, settings: NumericSettings = DEFAULT_SETTINGS) -> float:
    """Hankel norm ``sqrt(lambda_max(Wc Wo))`` of a stable system."""
    A, B, C = sys.A, sys.B, sys.C
    if A.shape[0] == 0:
        return 0.0
    if spectral_abscissa(A) >= -settings.hurwitz_margin:
        raise UnstableSystem("Hankel norm requires a stable system")
    Wc = solve_lyapunov(A, B @ B.T, settings)
    Wo = solve_lyapunov(A.T, C.T @ C, settings)
    lam = float(np.max(np.linalg.eigvals(Wc @ Wo).real))
    return float(np.sqrt(max(lam, 0.0)))
