"""Pure numpy implementations of the simulation kernels."""
from __future__ import annotations

import numpy as np


def propagate(Phi, x0, nsteps):
    """Iterate ``x[k+1] = Phi x[k]``; returns the ``(nsteps + 1, d)`` trajectory."""
    Phi = np.ascontiguousarray(Phi, dtype=float)
    out = np.empty((nsteps + 1, Phi.shape[0]))
    out[0] = x0
    for k in range(nsteps):
        np.dot(Phi, out[k], out=out[k + 1])
    return out


def disagreement(X, count, n):
    """Per-row ``max_c (max_i x_ic - min_i x_ic)`` over the first ``count`` agent blocks."""
    X = np.asarray(X, dtype=float)
    if count <= 1:
        return np.zeros(X.shape[0])
    blocks = X[:, :count * n].reshape(X.shape[0], count, n)
    return np.ptp(blocks, axis=1).max(axis=1)
