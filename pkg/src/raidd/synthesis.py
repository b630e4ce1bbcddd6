"""Plant family construction, stability margins, robust condition checks and
Glover-McFarlane synthesis of the consensus protocol.

Feedback sign convention: positive feedback ``u = K y`` everywhere, so the
closed loop of a plant ``(A, B, C, 0)`` with ``K = (K_A, K_B, K_C, K_D)`` is

    [[A + B K_D C, B K_C],
     [K_B C,       K_A  ]].
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (AlgebraicLoop, DimensionMismatch, FactorizationFailed, MarginShortfall,
                     NoStabilizingSolution, NotStabilizable, SingularL, SingularSubspace)
from .graphs import EigenvaluePool
from .numerics import DEFAULT_SETTINGS, NumericSettings, hankel_norm, hinf_norm, solve_care, spectral_abscissa
from .nugap import central_plant, gap_table, nu_gap
from .sysmodel import StateSpace, normalized_coprime_factors, vstack

log = logging.getLogger(__name__)

__all__ = [
    "PlantFamily", "PerturbationBox", "Controller", "MarginReport", "StabilizationSweep",
    "build_plant_family", "max_stability_margin", "psi", "check_conditions",
    "synthesize_controller", "generalized_stability_margin", "closed_loop_matrix",
    "verify_simultaneous_stabilization",
]


@dataclass
class PlantFamily:
    """Plants ``(A, lambda_i B, C, 0)``, one per entry of the eigenvalue pool."""

    base_A: np.ndarray
    base_B: np.ndarray
    base_C: np.ndarray
    lambdas: tuple
    plants: list = field(default_factory=list)

    def __len__(self):
        return len(self.plants)

    def perturbed(self, dA, dB) -> list[StateSpace]:
        A = self.base_A + dA
        B = self.base_B + dB
        zero = np.zeros((self.base_C.shape[0], B.shape[1]))
        return [StateSpace(A, lam * B, self.base_C, zero) for lam in self.lambdas]


@dataclass
class PerturbationBox:
    """Elementwise bounds on ``dA`` and ``dB``; entries with equal bounds stay fixed."""

    dA_lower: np.ndarray
    dA_upper: np.ndarray
    dB_lower: np.ndarray
    dB_upper: np.ndarray
    grid_count: int = 21

    def __post_init__(self):
        for name in ("dA_lower", "dA_upper", "dB_lower", "dB_upper"):
            setattr(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        if self.dA_lower.shape != self.dA_upper.shape or self.dB_lower.shape != self.dB_upper.shape:
            raise DimensionMismatch("lower and upper bounds differ in shape")
        if np.any(self.dA_lower > self.dA_upper) or np.any(self.dB_lower > self.dB_upper):
            raise ValueError("lower bound exceeds upper bound")
        if self.grid_count < 1:
            raise ValueError("grid_count must be positive")

    @classmethod
    def zero(cls, n, m, grid_count=1):
        zA, zB = np.zeros((n, n)), np.zeros((n, m))
        return cls(zA, zA.copy(), zB, zB.copy(), grid_count)

    def _axes(self):
        lo = np.concatenate([self.dA_lower.ravel(), self.dB_lower.ravel()])
        hi = np.concatenate([self.dA_upper.ravel(), self.dB_upper.ravel()])
        varying = np.nonzero(lo < hi)[0]
        count = self.grid_count if self.grid_count > 1 else 2
        axes = [np.linspace(lo[k], hi[k], count) for k in varying]
        return lo, varying, axes

    def grid(self):
        """All combinations of ``grid_count`` samples per varying entry (vertices included)."""
        lo, varying, axes = self._axes()
        nA = self.dA_lower.size
        for combo in itertools.product(*axes):
            v = lo.copy()
            v[varying] = combo
            yield v[:nA].reshape(self.dA_lower.shape), v[nA:].reshape(self.dB_lower.shape)

    def __len__(self):
        _, _, axes = self._axes()
        return int(np.prod([len(a) for a in axes])) if axes else 1


@dataclass
class Controller:
    """Protocol ``v' = K_A v + K_B delta,  u = K_C v + K_D delta``."""

    K_A: np.ndarray
    K_B: np.ndarray
    K_C: np.ndarray
    K_D: np.ndarray

    def __post_init__(self):
        # validates dimensions
        ss = StateSpace(self.K_A, self.K_B, self.K_C, self.K_D)
        self.K_A, self.K_B, self.K_C, self.K_D = ss.A, ss.B, ss.C, ss.D

    @property
    def nstates(self):
        return self.K_A.shape[0]

    def as_statespace(self) -> StateSpace:
        return StateSpace(self.K_A, self.K_B, self.K_C, self.K_D)

    @classmethod
    def from_statespace(cls, ss: StateSpace):
        return cls(ss.A, ss.B, ss.C, ss.D)

    def to_dict(self):
        return {k: np.asarray(getattr(self, k)).tolist() for k in ("K_A", "K_B", "K_C", "K_D")}

    @classmethod
    def from_dict(cls, d):
        KD = np.atleast_2d(np.asarray(d["K_D"], dtype=float))
        m, n = KD.shape
        KA = np.asarray(d["K_A"], dtype=float)
        nk = KA.shape[0] if KA.size else 0
        return cls(KA.reshape(nk, nk), np.asarray(d["K_B"], dtype=float).reshape(nk, n),
                   np.asarray(d["K_C"], dtype=float).reshape(m, nk), KD)


@dataclass
class MarginReport:
    b_max: float
    eps_cp: float
    psi_max: float
    cp_index: int
    nominal_ok: bool
    robust_ok: bool
    lambda_cp: float = float("nan")
    psi_trace: list = field(default_factory=list)

    def to_dict(self):
        return {
            "b_max": self.b_max, "eps_cp": self.eps_cp, "psi_max": self.psi_max,
            "cp_index": self.cp_index, "lambda_cp": self.lambda_cp,
            "nominal_ok": self.nominal_ok, "robust_ok": self.robust_ok,
            "psi_trace": [{"dA": np.asarray(a).tolist(), "dB": np.asarray(b).tolist(), "psi": v}
                          for a, b, v in self.psi_trace],
        }


def build_plant_family(A, B, C, pool) -> PlantFamily:
    """One plant ``(A, lambda B, C, 0)`` per pool entry."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    lambdas = tuple(pool.lambdas if isinstance(pool, EigenvaluePool) else pool)
    if not lambdas:
        raise ValueError("empty eigenvalue pool")
    if min(lambdas) <= 0:
        raise ValueError("pool entries must be positive")
    try:
        solve_care(A, min(lambdas) * B, np.eye(A.shape[0]))
    except (NoStabilizingSolution, SingularSubspace) as exc:
        raise NotStabilizable(f"(A, B) is not stabilizable: {exc}") from exc
    zero = np.zeros((C.shape[0], B.shape[1]))
    plants = [StateSpace(A, lam * B, C, zero) for lam in lambdas]
    return PlantFamily(A, B, C, lambdas, plants)


def _margin_from_factors(f) -> float:
    return float((1.0 + np.max(np.linalg.eigvals(f.X @ f.Z).real)) ** -0.5)


def max_stability_margin(P_cp: StateSpace, factors=None,
                         settings: NumericSettings = DEFAULT_SETTINGS) -> float:
    """Largest achievable generalized stability margin, ``sqrt(1 - ||[N; M]||_H^2)``."""
    f = factors if factors is not None else normalized_coprime_factors(P_cp, settings)
    h = hankel_norm(vstack(f.N, f.M), settings)
    b = float(np.sqrt(max(0.0, 1.0 - h * h)))
    b_are = _margin_from_factors(f)
    if abs(b - b_are) > 1e-8:
        log.warning("Hankel-norm margin %.12g disagrees with Riccati margin %.12g", b, b_are)
    return b


def psi(dA, dB, family: PlantFamily, cp: StateSpace, cp_factors=None,
        settings: NumericSettings = DEFAULT_SETTINGS) -> float:
    """Largest nu-gap between the central plant and the perturbed family members."""
    fcp = cp_factors if cp_factors is not None else normalized_coprime_factors(cp, settings)
    cache = {}
    best = 0.0
    for i, (lam, P) in enumerate(zip(family.lambdas, family.perturbed(dA, dB))):
        if lam not in cache:
            try:
                cache[lam] = nu_gap(cp, P, factors1=fcp, settings=settings).value
            except FactorizationFailed as exc:
                raise FactorizationFailed(f"perturbed plant {i}: {exc}", index=i) from exc
        best = max(best, cache[lam])
    return best


def check_conditions(family: PlantFamily, box: PerturbationBox, table=None,
                     workers: int | None = None,
                     settings: NumericSettings = DEFAULT_SETTINGS) -> MarginReport:
    """Central plant, maximum stability margin, and the robust sweep of Psi over the box.

    At the unperturbed grid point Psi equals ``eps_cp`` by definition, so the
    table value is used there instead of recomputing it.
    """
    if table is None:
        table = gap_table(family.plants, workers=workers, settings=settings)
    cp_index, eps_cp = central_plant(family, table=table)
    cp = family.plants[cp_index]
    try:
        fcp = normalized_coprime_factors(cp, settings)
    except FactorizationFailed as exc:
        raise FactorizationFailed(f"central plant {cp_index}: {exc}", index=cp_index) from exc
    b_max = max_stability_margin(cp, fcp, settings)

    trace = []
    for dA, dB in box.grid():
        if not np.any(dA) and not np.any(dB):
            value = eps_cp
        else:
            value = psi(dA, dB, family, cp, fcp, settings)
        trace.append((dA, dB, float(value)))
    psi_max = max(v for _, _, v in trace)
    return MarginReport(
        b_max=b_max, eps_cp=eps_cp, psi_max=psi_max, cp_index=cp_index,
        nominal_ok=bool(b_max > eps_cp), robust_ok=bool(b_max > psi_max),
        lambda_cp=float(family.lambdas[cp_index]), psi_trace=trace,
    )


def _reduce_descriptor(E, A, B, C, tol, scale=None):
    # E x' = A x + B y, u = C x; remove the singular directions of E.
    # Rank is judged against `scale` (default: the largest singular value).
    U, s, Vt = np.linalg.svd(E)
    scale = s[0] if scale is None else scale
    r = int(np.sum(s > tol * scale))
    if r == E.shape[0]:
        return np.linalg.solve(E, A), np.linalg.solve(E, B), C, np.zeros((C.shape[0], B.shape[1]))
    At = U.T @ A @ Vt.T
    Bt = U.T @ B
    Ct = C @ Vt.T
    A11, A12, A21, A22 = At[:r, :r], At[:r, r:], At[r:, :r], At[r:, r:]
    B1, B2 = Bt[:r], Bt[r:]
    C1, C2 = Ct[:, :r], Ct[:, r:]
    if np.linalg.cond(A22) > 1e12:
        raise SingularL("descriptor controller has an impulsive part")
    S1 = 1.0 / s[:r]
    KA = S1[:, None] * (A11 - A12 @ np.linalg.solve(A22, A21))
    KB = S1[:, None] * (B1 - A12 @ np.linalg.solve(A22, B2))
    KC = C1 - C2 @ np.linalg.solve(A22, A21)
    KD = -C2 @ np.linalg.solve(A22, B2)
    return KA, KB, KC, KD


def synthesize_controller(P_cp: StateSpace, gamma_rel: float = 1.0, check: bool = True,
                          settings: NumericSettings = DEFAULT_SETTINGS) -> Controller:
    """Glover-McFarlane normalized-coprime-factor robust stabilizing controller.

    With ``gamma = gamma_rel / b_max``, ``F = -B^T X`` and
    ``L = (1 - gamma^2) I + X Z`` the controller in descriptor form is

        L^T v' = (L^T (A + B F) + gamma^2 Z C^T C) v + gamma^2 Z C^T y,
        u      = B^T X v.

    For ``gamma_rel > 1`` ``L`` is invertible and this is the usual
    sub-optimal controller. At ``gamma_rel == 1`` ``L`` loses rank and the
    singular directions are eliminated, leaving the optimal controller of
    reduced order with a nonzero feed-through term.
    """
    if gamma_rel < 1.0:
        raise ValueError("gamma_rel must be at least 1")
    if np.any(P_cp.D):
        raise ValueError("synthesis expects a strictly proper plant (D = 0)")
    A, B, C = P_cp.A, P_cp.B, P_cp.C
    f = normalized_coprime_factors(P_cp, settings)
    X, Z = f.X, f.Z
    n = A.shape[0]
    b_max = _margin_from_factors(f)
    gamma = gamma_rel / b_max
    F = -B.T @ X
    L = (1 - gamma**2) * np.eye(n) + X @ Z

    E = L.T
    Ad = E @ (A + B @ F) + gamma**2 * Z @ C.T @ C
    Bd = gamma**2 * Z @ C.T
    Cd = B.T @ X
    if gamma_rel > 1.0:
        if np.linalg.cond(E) > 1e12:
            raise SingularL("L is numerically singular; increase gamma_rel")
        K = Controller(np.linalg.solve(E, Ad), np.linalg.solve(E, Bd), Cd,
                       np.zeros((B.shape[1], C.shape[0])))
    else:
        # L = (1 - gamma^2) I + X Z can vanish entirely, so its rank is measured
        # against the size of the terms that cancel
        scale = max(1.0, gamma**2, float(np.linalg.norm(X @ Z, 2)))
        K = Controller(*_reduce_descriptor(E, Ad, Bd, Cd, tol=1e-9, scale=scale))

    if check:
        b = generalized_stability_margin(P_cp, K, settings)
        if b < b_max / gamma_rel - 1e-6:
            raise MarginShortfall(f"achieved margin {b:.6g} below {b_max / gamma_rel:.6g}")
    return K


def _as_ss(K):
    return K.as_statespace() if isinstance(K, Controller) else K


def closed_loop_matrix(P: StateSpace, K) -> np.ndarray:
    """State matrix of the positive-feedback loop of ``P`` and ``K``."""
    Ks = _as_ss(K)
    if Ks.ninputs != P.noutputs or Ks.noutputs != P.ninputs:
        raise DimensionMismatch(f"controller {Ks} does not fit plant {P}")
    m = P.ninputs
    W = np.eye(m) - Ks.D @ P.D
    if np.linalg.cond(W) > 1e12:
        raise AlgebraicLoop("I - K_D D_P is singular")
    S = np.linalg.inv(W)
    Ex = S @ np.hstack([Ks.D @ P.C, Ks.C])
    np_, nk = P.nstates, Ks.nstates
    A0 = np.block([[P.A, np.zeros((np_, nk))], [Ks.B @ P.C, Ks.A]])
    Bu = np.vstack([P.B, Ks.B @ P.D])
    return A0 + Bu @ Ex


def _upsilon(P: StateSpace, K) -> StateSpace:
    # [P; I] (I - K P)^{-1} [-I, K]
    Ks = _as_ss(K)
    m, p = P.ninputs, P.noutputs
    np_, nk = P.nstates, Ks.nstates
    S = np.linalg.inv(np.eye(m) - Ks.D @ P.D)
    Ex = S @ np.hstack([Ks.D @ P.C, Ks.C])
    Ew = S @ np.hstack([-np.eye(m), Ks.D])
    A0 = np.block([[P.A, np.zeros((np_, nk))], [Ks.B @ P.C, Ks.A]])
    Bu = np.vstack([P.B, Ks.B @ P.D])
    Acl = A0 + Bu @ Ex
    Bw = np.block([[np.zeros((np_, m)), np.zeros((np_, p))], [np.zeros((nk, m)), Ks.B]])
    Bcl = Bw + Bu @ Ew
    Cy = np.hstack([P.C, np.zeros((p, nk))]) + P.D @ Ex
    Ccl = np.vstack([Cy, Ex])
    Dcl = np.vstack([P.D @ Ew, Ew])
    return StateSpace(Acl, Bcl, Ccl, Dcl)


def generalized_stability_margin(P: StateSpace, K,
                                 settings: NumericSettings = DEFAULT_SETTINGS) -> float:
    """``1 / ||[P; I](I - K P)^{-1}[-I, K]||_inf`` for an internally stable loop, else 0."""
    Acl = closed_loop_matrix(P, K)
    if spectral_abscissa(Acl) >= -settings.hurwitz_margin:
        return 0.0
    return 1.0 / hinf_norm(_upsilon(P, K), settings)


@dataclass
class StabilizationSweep:
    """Closed-loop spectral abscissa for every (grid point, plant) pair."""

    grid: list
    abscissa: np.ndarray

    @property
    def all_stable(self) -> bool:
        return bool(np.all(self.abscissa < 0))

    def records(self):
        for g, (dA, dB) in enumerate(self.grid):
            for i, a in enumerate(self.abscissa[g]):
                yield g, i, float(a)


def verify_simultaneous_stabilization(K, family: PlantFamily,
                                      box: PerturbationBox | None = None) -> StabilizationSweep:
    if box is None:
        n, m = family.base_B.shape
        box = PerturbationBox.zero(n, m)
    grid = list(box.grid())
    out = np.empty((len(grid), len(family.lambdas)))
    for g, (dA, dB) in enumerate(grid):
        for i, P in enumerate(family.perturbed(dA, dB)):
            out[g, i] = spectral_abscissa(closed_loop_matrix(P, K))
    return StabilizationSweep(grid, out)
