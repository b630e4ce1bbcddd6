# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simulation kernels; same contract as the numpy fallback."""
import numpy as np


def propagate(const double[:, ::1] Phi, const double[::1] x0, Py_ssize_t nsteps):
    cdef Py_ssize_t d = Phi.shape[0]
    cdef Py_ssize_t k, i, j
    cdef double s
    out = np.empty((nsteps + 1, d))
    cdef double[:, ::1] Y = out
    for i in range(d):
        Y[0, i] = x0[i]
    with nogil:
        for k in range(nsteps):
            for i in range(d):
                s = 0.0
                for j in range(d):
                    s += Phi[i, j] * Y[k, j]
                Y[k + 1, i] = s
    return out


def disagreement(X, Py_ssize_t count, Py_ssize_t n):
    cdef const double[:, :] V = np.asarray(X, dtype=float)
    cdef Py_ssize_t T = V.shape[0]
    cdef Py_ssize_t t, a, c
    cdef double lo, hi, v, best
    out = np.zeros(T)
    cdef double[::1] D = out
    if count <= 1:
        return out
    with nogil:
        for t in range(T):
            best = 0.0
            for c in range(n):
                lo = V[t, c]
                hi = lo
                for a in range(1, count):
                    v = V[t, a * n + c]
                    if v < lo:
                        lo = v
                    elif v > hi:
                        hi = v
                if hi - lo > best:
                    best = hi - lo
            D[t] = best
    return out
