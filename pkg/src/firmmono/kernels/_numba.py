"""numba-compiled twins of the kernels in ``_numpy``."""

import numpy as np
from numba import njit


@njit(cache=True)
def pair_stats(X, U):
    n, d = X.shape
    m = n * (n - 1) // 2
    dxx = np.empty(m)
    duu = np.empty(m)
    dxu = np.empty(m)
    k = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            sxx = 0.0
            suu = 0.0
            sxu = 0.0
            for c in range(d):
                a = X[i, c] - X[j, c]
                b = U[i, c] - U[j, c]
                sxx += a * a
                suu += b * b
                sxu += a * b
            dxx[k] = sxx
            duu[k] = suu
            dxu[k] = sxu
            k += 1
    return dxx, duu, dxu


@njit(cache=True)
def cyclic_sums(X, TX):
    m, n, d = X.shape
    sums = np.empty(m)
    scale = np.empty(m)
    for t in range(m):
        s = 0.0
        sc = 0.0
        for i in range(n):
            nxt = (i + 1) % n
            for c in range(d):
                r = X[t, i, c] - TX[t, i, c]
                s += r * (TX[t, i, c] - TX[t, nxt, c])
                dx = X[t, i, c] - X[t, nxt, c]
                sc += dx * dx
        sums[t] = s
        scale[t] = sc
    return sums, scale


@njit(cache=True)
def min_cross_inner(P, V, Z, W):
    K, d = P.shape
    n = Z.shape[0]
    best = np.empty(K)
    arg = np.empty(K, dtype=np.int64)
    for k in range(K):
        bv = np.inf
        bj = 0
        for j in range(n):
            s = 0.0
            for c in range(d):
                s += (P[k, c] - Z[j, c]) * (V[k, c] - W[j, c])
            if s < bv:
                bv = s
                bj = j
        best[k] = bv
        arg[k] = bj
    return best, arg


@njit(cache=True)
def power_iteration(G, max_iter, rtol, squarings):
    B = G.copy()
    for _ in range(squarings):
        B = B @ B
        nb = np.abs(B).max()
        if nb == 0.0:
            break
        B = B / nb
    n = G.shape[0]
    col = 0
    best = -1.0
    for j in range(n):
        s = 0.0
        for i in range(n):
            s += B[i, j] * B[i, j]
        if s > best:
            best = s
            col = j
    v = B[:, col].copy()
    nv = np.sqrt(np.sum(v * v))
    if nv == 0.0:
        v = np.ones(n)
        nv = np.sqrt(float(n))
    v = v / nv
    prev = v @ (G @ v)
    for it in range(1, max_iter + 1):
        w = B @ v
        nw = np.sqrt(np.sum(w * w))
        if nw == 0.0:
            return prev, it, True
        v = w / nw
        rq = v @ (G @ v)
        if abs(rq - prev) <= rtol * abs(rq):
            return rq, it, True
        prev = rq
    return prev, max_iter, False
