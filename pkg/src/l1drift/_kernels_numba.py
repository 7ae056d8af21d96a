"""Numba-compiled loop versions of the inner kernels (see ``_kernels_numpy``)."""

import numpy as np
from numba import njit

INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


@njit(cache=True, nogil=True)
def cumulative_stieltjes(f, G):
    N, m = G.shape
    out = np.zeros((N, m))
    for r in range(N):
        acc = 0.0
        for j in range(1, m):
            if j >= 2:
                acc += G[r, j - 1] * (f[j - 1] - f[j - 2])
            out[r, j] = f[j - 1] * G[r, j] - f[0] * G[r, 0] - acc
    return out


@njit(cache=True, nogil=True)
def euler_paths(theta, x0, eps, dt, G):
    N, m = G.shape
    X = np.empty((N, m))
    a = 1.0 + theta * dt
    for r in range(N):
        X[r, 0] = x0
        for i in range(m - 1):
            X[r, i + 1] = X[r, i] * a + eps * (G[r, i + 1] - G[r, i])
    return X


@njit(cache=True, nogil=True)
def _objective(X, t, w, x0, theta):
    s = 0.0
    for i in range(X.shape[0]):
        s += w[i] * abs(X[i] - x0 * np.exp(theta * t[i]))
    return s


@njit(cache=True, nogil=True)
def l1_objectives(X, t, w, x0, thetas):
    out = np.empty(thetas.shape[0])
    for k in range(thetas.shape[0]):
        out[k] = _objective(X, t, w, x0, thetas[k])
    return out


@njit(cache=True, nogil=True)
def minimize_l1(X, t, w, x0, thetas, tol):
    M = thetas.shape[0]
    best_i = 0
    best_v = np.inf
    for k in range(M):
        v = _objective(X, t, w, x0, thetas[k])
        if v < best_v:
            best_v = v
            best_i = k
    n_evals = M
    best_t = thetas[best_i]
    a = thetas[max(best_i - 1, 0)]
    b = thetas[min(best_i + 1, M - 1)]
    if b - a <= tol:
        return best_t, best_v, n_evals, a, b
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc = _objective(X, t, w, x0, c)
    fd = _objective(X, t, w, x0, d)
    n_evals += 2
    while b - a > tol:
        if fc <= fd:
            b = d
            d = c
            fd = fc
            c = b - INVPHI * (b - a)
            fc = _objective(X, t, w, x0, c)
        else:
            a = c
            c = d
            fc = fd
            d = a + INVPHI * (b - a)
            fd = _objective(X, t, w, x0, d)
        n_evals += 1
    if fc <= fd:
        x, fx = c, fc
    else:
        x, fx = d, fd
    if fx < best_v or (fx == best_v and x < best_t):
        best_t = x
        best_v = fx
    return best_t, best_v, n_evals, a, b


@njit(cache=True, nogil=True)
def weighted_median(r, w):
    order = np.argsort(r, kind="mergesort")
    total = 0.0
    for i in range(w.shape[0]):
        total += w[order[i]]
    half = 0.5 * total
    acc = 0.0
    for i in range(order.shape[0]):
        acc += w[order[i]]
        if acc >= half:
            return r[order[i]]
    return r[order[-1]]


@njit(cache=True, nogil=True)
def covering_count(d, eps):
    n = d.shape[0]
    lim = eps * (1.0 + 1e-12) + 1e-15
    count = 0
    i = 0
    while i < n:
        count += 1
        m = i
        j = i
        while j < n and d[i, j] <= lim:
            worst = 0.0
            for r in range(i, j + 1):
                if d[r, j] > worst:
                    worst = d[r, j]
            if worst <= lim:
                m = j
            j += 1
        e = m
        while e + 1 < n and d[m, e + 1] <= lim:
            e += 1
        i = e + 1
    return count


@njit(cache=True, nogil=True)
def lag_max(d):
    n = d.shape[0]
    out = np.zeros(n)
    for k in range(1, n):
        best = 0.0
        for i in range(n - k):
            if d[i, i + k] > best:
                best = d[i, i + k]
        out[k] = best
    return out
