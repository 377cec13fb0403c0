"""Pure-numpy implementations of the hot loops.

Every function here has a twin with the same signature in ``_numba``.
"""

import numpy as np

_CHUNK = 4096


def pair_stats(X, U):
    """Squared distances and cross inner products over all pairs i < j.

    Returns ``(dxx, duu, dxu)``, each of length n(n-1)/2, in the row-major
    order of ``np.triu_indices(n, 1)``, where ``dxx = |x_i - x_j|^2``,
    ``duu = |u_i - u_j|^2`` and ``dxu = <x_i - x_j, u_i - u_j>``.
    """
    n = X.shape[0]
    m = n * (n - 1) // 2
    dxx = np.empty(m)
    duu = np.empty(m)
    dxu = np.empty(m)
    k = 0
    for i in range(n - 1):
        DX = X[i] - X[i + 1:]
        DU = U[i] - U[i + 1:]
        cnt = n - 1 - i
        dxx[k:k + cnt] = np.einsum("ij,ij->i", DX, DX)
        duu[k:k + cnt] = np.einsum("ij,ij->i", DU, DU)
        dxu[k:k + cnt] = np.einsum("ij,ij->i", DX, DU)
        k += cnt
    return dxx, duu, dxu


def cyclic_sums(X, TX):
    """Cyclic sums over tuples.

    ``X`` and ``TX`` have shape (m, n, d).  For each tuple returns
    ``sum_i <x_i - T x_i, T x_i - T x_{i+1}>`` (indices mod n) together with
    the scale ``sum_i |x_i - x_{i+1}|^2``.
    """
    R = X - TX
    dT = TX - np.roll(TX, -1, axis=1)
    dX = X - np.roll(X, -1, axis=1)
    sums = np.einsum("mnd,mnd->m", R, dT)
    scale = np.einsum("mnd,mnd->m", dX, dX)
    return sums, scale


def min_cross_inner(P, V, Z, W):
    """For each probe k, the min over j of ``<p_k - z_j, v_k - w_j>`` and its argmin."""
    K = P.shape[0]
    best = np.empty(K)
    arg = np.empty(K, dtype=np.int64)
    for start in range(0, K, _CHUNK):
        stop = min(K, start + _CHUNK)
        vals = np.einsum(
            "kjd,kjd->kj",
            P[start:stop, None, :] - Z[None, :, :],
            V[start:stop, None, :] - W[None, :, :],
        )
        arg[start:stop] = np.argmin(vals, axis=1)
        best[start:stop] = vals[np.arange(stop - start), arg[start:stop]]
    return best, arg


def power_iteration(G, max_iter, rtol, squarings):
    """Dominant eigenvalue of a symmetric PSD matrix ``G``.

    Power iteration driven by ``G^(2^squarings)`` (repeated squaring with
    renormalisation), Rayleigh quotient taken against ``G`` itself.
    Returns ``(value, iterations, converged)``.
    """
    B = G.copy()
    for _ in range(squarings):
        B = B @ B
        nb = np.abs(B).max()
        if nb == 0.0:
            break
        B = B / nb
    col = int(np.argmax(np.einsum("ij,ij->j", B, B)))
    v = B[:, col].copy()
    nv = np.linalg.norm(v)
    if nv == 0.0:
        v = np.ones(G.shape[0])
        nv = np.linalg.norm(v)
    v = v / nv
    prev = v @ G @ v
    for it in range(1, max_iter + 1):
        w = B @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return prev, it, True
        v = w / nw
        rq = v @ G @ v
        if abs(rq - prev) <= rtol * abs(rq):
            return rq, it, True
        prev = rq
    return prev, max_iter, False
