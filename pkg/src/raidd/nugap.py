"""Vinnicombe nu-gap metric, maximum nu-gap over a family, and central plant selection.

Winding numbers count clockwise encirclements of the origin as omega runs
from -inf to +inf, i.e. (#RHP zeros - #RHP poles) for a rational function
with no poles or zeros on the imaginary axis.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import GridResolutionExceeded, OriginCrossing
from .numerics import DEFAULT_SETTINGS, NumericSettings, hinf_norm
from .sysmodel import (CoprimeFactors, StateSpace, add, conjugate, freq_response, negate,
                       normalized_coprime_factors, series)

__all__ = [
    "NuGapResult", "nu_gap", "winding_number", "contour_winding_number", "gap_table",
    "max_nu_gap", "central_plant",
]

DET_ZERO_TOL = 1e-9
ORIGIN_TOL = 1e-9
MAX_GRID_POINTS = 2**18
TIE_TOL = 1e-9


@dataclass(frozen=True)
class NuGapResult:
    value: float
    winding_ok: bool
    det_nonzero_ok: bool
    phi_norm: float
    winding: int | None = None

    def __float__(self):
        return self.value


def winding_number(samples) -> int:
    """Winding number of an ordered sequence of samples on the closed omega contour.

    Every successive phase step must be below pi/2 in magnitude; otherwise
    the sampling is too coarse to resolve the phase and
    :class:`GridResolutionExceeded` is raised.
    """
    z = np.asarray(samples, dtype=complex).ravel()
    if np.any(np.abs(z) <= ORIGIN_TOL):
        raise OriginCrossing("a sample lies at the origin")
    steps = np.angle(z[1:] / z[:-1])
    if np.any(np.abs(steps) >= np.pi / 2):
        raise GridResolutionExceeded("phase step of at least pi/2 between samples")
    return int(np.rint(-np.sum(steps) / (2 * np.pi)))


def _midpoints(a, b):
    same = (a * b) > 0
    mid = (a + b) / 2
    mid[same] = np.sign(a[same]) * np.sqrt(a[same] * b[same])
    return mid


def contour_winding_number(evaluate: Callable[[np.ndarray], np.ndarray], limit: complex,
                           base_points: int = 400, wmin: float = 1e-6, wmax: float = 1e6,
                           max_points: int = MAX_GRID_POINTS):
    """Winding number of a scalar frequency function along the imaginary axis.

    Starts from a log-symmetric grid of ``base_points`` frequencies in
    ``[wmin, wmax]`` (both signs, plus omega = 0) closed at +/- infinity by
    ``limit``, and bisects every interval whose phase step reaches pi/2.

    Returns
    -------
    wno : int
    min_modulus : float
        Smallest modulus seen over all evaluated frequencies and the limit.
    """
    pos = np.logspace(np.log10(wmin), np.log10(wmax), base_points // 2)
    w = np.concatenate([-pos[::-1], [0.0], pos])
    vals = np.asarray(evaluate(w), dtype=complex)
    limit = complex(limit)

    while True:
        if np.any(np.abs(vals) <= ORIGIN_TOL) or abs(limit) <= ORIGIN_TOL:
            raise OriginCrossing("determinant vanishes on the imaginary axis")
        # extend outward until the tails connect smoothly to the limit at infinity
        tail = np.abs(np.angle(np.array([vals[0], vals[-1]]) / limit)) >= np.pi / 2
        if np.any(tail):
            if w[-1] > 1e15:
                raise GridResolutionExceeded("response does not settle to its limit at infinity")
            wn = w[-1] * 10.0
            extra = np.asarray(evaluate(np.array([-wn, wn])), dtype=complex)
            w = np.concatenate([[-wn], w, [wn]])
            vals = np.concatenate([[extra[0]], vals, [extra[1]]])
            continue
        steps = np.abs(np.angle(vals[1:] / vals[:-1]))
        bad = np.nonzero(steps >= np.pi / 2)[0]
        if bad.size == 0:
            break
        if w.size + bad.size > max_points:
            raise GridResolutionExceeded(f"phase not resolved with {max_points} grid points")
        mids = _midpoints(w[bad], w[bad + 1])
        mvals = np.asarray(evaluate(mids), dtype=complex)
        w = np.insert(w, bad + 1, mids)
        vals = np.insert(vals, bad + 1, mvals)

    samples = np.concatenate([[limit], vals, [limit]])
    return winding_number(samples), float(min(np.min(np.abs(vals)), abs(limit)))


def _scalar_det(G):
    if G.shape[-1] == 1:
        return G[..., 0, 0]
    return np.linalg.det(G)


def nu_gap(P1: StateSpace, P2: StateSpace, factors1: CoprimeFactors | None = None,
           factors2: CoprimeFactors | None = None,
           settings: NumericSettings = DEFAULT_SETTINGS) -> NuGapResult:
    """Nu-gap between two plants of equal input/output dimensions.

    ``Theta = N2~ N1 + M2~ M1`` is tested for a nonvanishing determinant
    and zero winding number along the imaginary axis; when both hold the
    gap is the H-infinity norm of ``Phi = Mt2 N1 - Nt2 M1``, otherwise 1.
    """
    f1 = factors1 if factors1 is not None else normalized_coprime_factors(P1, settings)
    f2 = factors2 if factors2 is not None else normalized_coprime_factors(P2, settings)

    theta = add(series(f1.N, conjugate(f2.N)), series(f1.M, conjugate(f2.M)))
    try:
        wno, min_mod = contour_winding_number(lambda w: _scalar_det(freq_response(theta, w)),
                                              limit=_scalar_det(theta.D.astype(complex)))
    except OriginCrossing:
        return NuGapResult(1.0, winding_ok=False, det_nonzero_ok=False, phi_norm=np.nan)
    det_ok = min_mod > DET_ZERO_TOL
    wno_ok = wno == 0
    if not (det_ok and wno_ok):
        return NuGapResult(1.0, winding_ok=wno_ok, det_nonzero_ok=det_ok, phi_norm=np.nan,
                           winding=wno)
    phi = add(series(f1.N, f2.Mtilde), negate(series(f1.M, f2.Ntilde)))
    norm = hinf_norm(phi, settings)
    return NuGapResult(min(norm, 1.0), winding_ok=True, det_nonzero_ok=True, phi_norm=norm,
                       winding=wno)


def _plant_key(P: StateSpace):
    return tuple(M.tobytes() + bytes(str(M.shape), "ascii") for M in (P.A, P.B, P.C, P.D))


def _pair_value(args):
    P1, P2, settings = args
    return nu_gap(P1, P2, settings=settings).value


def gap_table(plants: Sequence[StateSpace], workers: int | None = None,
              settings: NumericSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """Symmetric table of pairwise nu-gap values.

    Plants with identical realizations share one row of computation. With
    ``workers`` set, the unique pairs are evaluated in a process pool.
    """
    keys = [_plant_key(P) for P in plants]
    uniq: dict = {}
    for i, k in enumerate(keys):
        uniq.setdefault(k, i)
    reps = list(uniq.values())
    pos = {k: j for j, k in enumerate(uniq)}
    u = len(reps)
    pairs = [(a, b) for a in range(u) for b in range(a, u)]

    if workers and workers > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            vals = list(ex.map(_pair_value, [(plants[reps[a]], plants[reps[b]], settings)
                                                for a, b in pairs],
                               chunksize=4))
    else:
        factors = [normalized_coprime_factors(plants[r], settings) for r in reps]
        vals = [nu_gap(plants[reps[a]], plants[reps[b]], factors[a], factors[b], settings).value
                for a, b in pairs]

    small = np.zeros((u, u))
    for (a, b), v in zip(pairs, vals):
        small[a, b] = small[b, a] = v
    idx = np.array([pos[k] for k in keys])
    return small[np.ix_(idx, idx)]


def _plants(family):
    return family.plants if hasattr(family, "plants") else list(family)


def max_nu_gap(i: int, family, table: np.ndarray | None = None) -> float:
    """Largest nu-gap from plant ``i`` (0-based) to every member of the family."""
    plants = _plants(family)
    if not 0 <= i < len(plants):
        raise IndexError(f"plant index {i} out of range for a family of {len(plants)}")
    if table is not None:
        return float(np.max(table[i]))
    best = 0.0
    fi = normalized_coprime_factors(plants[i])
    for f, P in enumerate(plants):
        if f != i:
            best = max(best, nu_gap(plants[i], P, factors1=fi).value)
    return best


def central_plant(family, table: np.ndarray | None = None, workers: int | None = None,
                  settings: NumericSettings = DEFAULT_SETTINGS):
    """Index (0-based) of the plant whose maximum nu-gap is smallest, and that value.

    Ties (values within ``TIE_TOL`` of the minimum) go to the lowest index.
    """
    plants = _plants(family)
    if not plants:
        raise ValueError("empty plant family")
    if table is None:
        table = gap_table(plants, workers=workers, settings=settings)
    eps = table.max(axis=1)
    i = int(np.nonzero(eps <= eps.min() + TIE_TOL)[0][0])
    return i, float(eps[i])
