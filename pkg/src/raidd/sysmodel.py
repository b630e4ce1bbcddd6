"""State-space system algebra and normalized coprime factorization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (DimensionMismatch, FactorizationFailed, NoStabilizingSolution, NonFiniteInput,
                     NotDetectable, PoleOnAxis, SingularSubspace)
from .numerics import DEFAULT_SETTINGS, NumericSettings, solve_care

__all__ = [
    "StateSpace", "CoprimeFactors", "conjugate", "series", "add", "negate", "vstack",
    "freq_response", "normalized_coprime_factors",
]


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Continuous-time LTI system ``x' = A x + B u,  y = C x + D u``.

    Zero-state systems (static gains) are allowed: ``A`` is then ``0 x 0``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            n = 0
            A = np.zeros((0, 0))
            B = np.zeros((0, D.shape[1]))
            C = np.zeros((D.shape[0], 0))
        else:
            A = np.atleast_2d(A)
            n = A.shape[0]
            B = np.atleast_2d(np.asarray(self.B, dtype=float))
            C = np.atleast_2d(np.asarray(self.C, dtype=float))
        if A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            raise DimensionMismatch(f"B has {B.shape[0]} rows, expected {n}")
        if C.shape[1] != n:
            raise DimensionMismatch(f"C has {C.shape[1]} columns, expected {n}")
        if D.shape != (C.shape[0], B.shape[1]):
            raise DimensionMismatch(f"D is {D.shape}, expected {(C.shape[0], B.shape[1])}")
        for name, M in zip("ABCD", (A, B, C, D)):
            if not np.all(np.isfinite(M)):
                raise NonFiniteInput(f"{name} has non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @classmethod
    def static(cls, D):
        D = np.atleast_2d(np.asarray(D, dtype=float))
        return cls(np.zeros((0, 0)), np.zeros((0, D.shape[1])), np.zeros((D.shape[0], 0)), D)

    @property
    def nstates(self) -> int:
        return self.A.shape[0]

    @property
    def ninputs(self) -> int:
        return self.B.shape[1]

    @property
    def noutputs(self) -> int:
        return self.C.shape[0]

    def __neg__(self):
        return negate(self)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, negate(other))

    def __mul__(self, other):
        # self * other: signal passes through `other` first
        return series(other, self)

    def __call__(self, omega):
        return freq_response(self, omega)

    def __repr__(self):
        return f"StateSpace(n={self.nstates}, m={self.ninputs}, p={self.noutputs})"


@dataclass(frozen=True, eq=False)
class CoprimeFactors:
    """Normalized right (``N M^{-1}``) and left (``Mt^{-1} Nt``) factors."""

    N: StateSpace
    M: StateSpace
    Ntilde: StateSpace
    Mtilde: StateSpace
    X: np.ndarray
    Z: np.ndarray


def conjugate(P: StateSpace) -> StateSpace:
    """Para-Hermitian conjugate ``P(-s)^T`` with realization ``(-A^T, -C^T, B^T, D^T)``."""
    return StateSpace(-P.A.T, -P.C.T, P.B.T, P.D.T)


def series(P1: StateSpace, P2: StateSpace) -> StateSpace:
    """Cascade ``P2 * P1``: the input drives ``P1`` whose output drives ``P2``."""
    if P1.noutputs != P2.ninputs:
        raise DimensionMismatch(f"cannot cascade {P1} into {P2}")
    n1, n2 = P1.nstates, P2.nstates
    A = np.block([[P1.A, np.zeros((n1, n2))], [P2.B @ P1.C, P2.A]])
    B = np.vstack([P1.B, P2.B @ P1.D])
    C = np.hstack([P2.D @ P1.C, P2.C])
    return StateSpace(A, B, C, P2.D @ P1.D)


def add(P1: StateSpace, P2: StateSpace) -> StateSpace:
    if (P1.ninputs, P1.noutputs) != (P2.ninputs, P2.noutputs):
        raise DimensionMismatch(f"cannot add {P1} and {P2}")
    A = sla.block_diag(P1.A, P2.A)
    return StateSpace(A, np.vstack([P1.B, P2.B]), np.hstack([P1.C, P2.C]), P1.D + P2.D)


def negate(P: StateSpace) -> StateSpace:
    return StateSpace(P.A, P.B, -P.C, -P.D)


def vstack(P1: StateSpace, P2: StateSpace) -> StateSpace:
    """Stack outputs of two systems driven by the same input."""
    if P1.ninputs != P2.ninputs:
        raise DimensionMismatch(f"cannot stack {P1} over {P2}")
    A = sla.block_diag(P1.A, P2.A)
    C = sla.block_diag(P1.C, P2.C)
    return StateSpace(A, np.vstack([P1.B, P2.B]), C, np.vstack([P1.D, P2.D]))


def freq_response(P: StateSpace, omega, axis_tol: float = 1e-12) -> np.ndarray:
    """``C (j omega I - A)^{-1} B + D``.

    ``omega`` may be a scalar (returns a ``p x m`` matrix) or a 1-D array
    (returns an array of shape ``(len(omega), p, m)``).
    """
    w = np.asarray(omega, dtype=float)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    n = P.nstates
    if n == 0:
        G = np.broadcast_to(P.D.astype(complex), (w.size,) + P.D.shape).copy()
    else:
        ev = np.linalg.eigvals(P.A)
        dist = np.abs(1j * w[:, None] - ev[None, :])
        if np.any(dist <= axis_tol * (1 + np.abs(ev[None, :]))):
            raise PoleOnAxis("frequency coincides with a pole on the imaginary axis")
        G = P.C @ np.linalg.solve(1j * w[:, None, None] * np.eye(n) - P.A, P.B) + P.D
    return G[0] if scalar else G


def _inv_sqrt_spd(R):
    ev, V = np.linalg.eigh(R)
    return (V / np.sqrt(ev)) @ V.T


def normalized_coprime_factors(P: StateSpace,
                               settings: NumericSettings = DEFAULT_SETTINGS) -> CoprimeFactors:
    """Normalized right and left coprime factors of ``P``.

    With ``R = I + D^T D`` and ``Rt = I + D D^T`` the control and filter
    Riccati equations are solved on the shifted data, giving
    ``F = -R^{-1}(B^T X + D^T C)`` and ``H = -(Z C^T + B D^T) Rt^{-1}``.
    For ``D = 0`` this reduces to ``F = -B^T X``, ``H = -Z C^T`` and the
    factors ``M = (A+BF, B, F, I)``, ``N = (A+BF, B, C, 0)``,
    ``Mt = (A+HC, H, C, I)``, ``Nt = (A+HC, B, C, 0)``.
    """
    A, B, C, D = P.A, P.B, P.C, P.D
    m, p = P.ninputs, P.noutputs
    R = np.eye(m) + D.T @ D
    Rt = np.eye(p) + D @ D.T
    Ri = np.linalg.inv(R)
    Rti = np.linalg.inv(Rt)
    Rih = _inv_sqrt_spd(R)
    Rtih = _inv_sqrt_spd(Rt)

    try:
        X = solve_care(A - B @ Ri @ D.T @ C, B @ Rih, C.T @ Rti @ C, settings)
    except (NoStabilizingSolution, SingularSubspace) as exc:
        raise FactorizationFailed(f"control Riccati equation: {exc}") from exc
    try:
        Z = solve_care((A - B @ D.T @ Rti @ C).T, C.T @ Rtih, B @ Ri @ B.T, settings)
    except (NoStabilizingSolution, SingularSubspace) as exc:
        raise NotDetectable(f"filter Riccati equation: {exc}") from exc

    F = -Ri @ (B.T @ X + D.T @ C)
    H = -(Z @ C.T + B @ D.T) @ Rti
    Af = A + B @ F
    Ah = A + H @ C
    M = StateSpace(Af, B @ Rih, F, Rih)
    N = StateSpace(Af, B @ Rih, C + D @ F, D @ Rih)
    Mt = StateSpace(Ah, H, Rtih @ C, Rtih)
    Nt = StateSpace(Ah, B + H @ D, Rtih @ C, Rtih @ D)
    return CoprimeFactors(N=N, M=M, Ntilde=Nt, Mtilde=Mt, X=X, Z=Z)
