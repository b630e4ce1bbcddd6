"""Independent reference computations used as test oracles.

Nothing here shares code with the package beyond plain numpy/scipy.
"""
import numpy as np
import scipy.linalg as sla

# Pairwise nu-gap of the UUV family members (A, lam B, I) for the distinct
# pool eigenvalues below, from a brute-force sup of the chordal distance over
# 200001 log-spaced frequencies in [1e-5, 1e4] (no coprime factors involved).
UUV_LAMBDAS = (1.0, (5 - 5**0.5) / 2, 2.0, 3.0, (5 + 5**0.5) / 2, 4.0, 5.0)
UUV_GAP_TABLE = np.array([
    [0.0, 0.160357, 0.333333, 0.5, 0.566915, 0.6, 0.666667],
    [0.160357, 0.0, 0.182744, 0.369248, 0.447214, 0.486446, 0.566915],
    [0.333333, 0.182744, 0.0, 0.2, 0.288007, 0.333333, 0.428571],
    [0.5, 0.369248, 0.2, 0.0, 0.093386, 0.142857, 0.25],
    [0.566915, 0.447214, 0.288007, 0.093386, 0.0, 0.05014, 0.160357],
    [0.6, 0.486446, 0.333333, 0.142857, 0.05014, 0.0, 0.111111],
    [0.666667, 0.566915, 0.428571, 0.25, 0.160357, 0.111111, 0.0],
])


def lyapunov_kron(A, Q):
    """Solve ``A W + W A^T + Q = 0`` by vectorization."""
    n = A.shape[0]
    I = np.eye(n)
    K = np.kron(I, A) + np.kron(A, I)
    w = np.linalg.solve(K, -Q.reshape(-1, order="F"))
    return w.reshape((n, n), order="F")


def care_scipy(A, B, Q):
    return sla.solve_continuous_are(A, B, Q, np.eye(B.shape[1]))


def response(A, B, C, D, w):
    n = A.shape[0]
    if n == 0:
        return np.broadcast_to(np.asarray(D, complex), (len(w),) + np.shape(D))
    return C @ np.linalg.solve(1j * w[:, None, None] * np.eye(n) - A, B) + D


def _inv_sqrt_herm(M):
    ev, V = np.linalg.eigh(M)
    return V @ (np.conj(np.swapaxes(V, -1, -2)) / np.sqrt(ev)[..., None])


def chordal_sup(G1, G2):
    """``max_w sigma_max((I + G2 G2*)^{-1/2} (G2 - G1) (I + G1* G1)^{-1/2})`` on sampled responses."""
    H = lambda G: np.conj(np.swapaxes(G, -1, -2))
    p, m = G1.shape[-2:]
    L = _inv_sqrt_herm(np.eye(p) + G2 @ H(G2))
    R = _inv_sqrt_herm(np.eye(m) + H(G1) @ G1)
    return float(np.linalg.svd(L @ (G2 - G1) @ R, compute_uv=False)[:, 0].max())


def consensus_matrix_loops(count, edges, Abar, Bbar, KA, KB, KC, KD):
    """Closed-loop state matrix assembled agent by agent from
    ``delta_i = sum_j a_ij (x_i - x_j)``, ``u_i = K_C v_i + K_D delta_i``,
    ``v_i' = K_A v_i + K_B delta_i``; state order ``[x_1..x_N, v_1..v_N]``."""
    n, nk = Abar.shape[0], KA.shape[0]
    adj = np.zeros((count, count))
    for i, j in edges:
        adj[i - 1, j - 1] = adj[j - 1, i - 1] = 1
    dim = count * (n + nk)
    M = np.zeros((dim, dim))
    xs = lambda i: slice(i * n, (i + 1) * n)
    vs = lambda i: slice(count * n + i * nk, count * n + (i + 1) * nk)
    for i in range(count):
        M[xs(i), xs(i)] += Abar
        M[xs(i), vs(i)] += Bbar @ KC
        M[vs(i), vs(i)] += KA
        for j in range(count):
            if adj[i, j]:
                # delta_i picks up +x_i - x_j
                M[xs(i), xs(i)] += Bbar @ KD
                M[xs(i), xs(j)] -= Bbar @ KD
                M[vs(i), xs(i)] += KB
                M[vs(i), xs(j)] -= KB
    return M


def random_hurwitz(rng, n, margin=0.1):
    M = rng.standard_normal((n, n))
    return M - (np.max(np.linalg.eigvals(M).real) + margin) * np.eye(n)
