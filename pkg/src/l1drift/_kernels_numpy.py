"""Pure-numpy implementations of the inner loops.

Every function here has a twin with the same signature in
``_kernels_numba``; ``_accel`` picks one at import time.
"""

import numpy as np

INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def cumulative_stieltjes(f, G):
    """Left-point sums ``I[:, j] = sum_{i<j} f_i (G[:, i+1] - G[:, i])``.

    Evaluated in summation-by-parts form so a constant integrand telescopes
    exactly: ``I_j = f_{j-1} G_j - f_0 G_0 - sum_{i=1}^{j-1} G_i (f_i - f_{i-1})``.
    """
    N, m = G.shape
    out = np.zeros((N, m))
    if m < 2:
        return out
    df = np.diff(f)
    inner = np.zeros((N, m - 1))
    if m > 2:
        np.cumsum(G[:, 1 : m - 1] * df[: m - 2], axis=1, out=inner[:, 1:])
    out[:, 1:] = f[:-1] * G[:, 1:] - f[0] * G[:, :1] - inner
    return out


def euler_paths(theta, x0, eps, dt, G):
    N, m = G.shape
    X = np.empty((N, m))
    X[:, 0] = x0
    dG = np.diff(G, axis=1)
    a = 1.0 + theta * dt
    for i in range(m - 1):
        X[:, i + 1] = X[:, i] * a + eps * dG[:, i]
    return X


def l1_objectives(X, t, w, x0, thetas):
    thetas = np.asarray(thetas, dtype=np.float64)
    dev = np.abs(X[None, :] - x0 * np.exp(thetas[:, None] * t[None, :]))
    return dev @ w


def _objective(X, t, w, x0, theta):
    return float(np.dot(w, np.abs(X - x0 * np.exp(theta * t))))


def minimize_l1(X, t, w, x0, thetas, tol):
    """Scan ``thetas`` then golden-section refine around the best point.

    Returns ``(theta, objective, n_evals, bracket_lo, bracket_hi)``.
    """
    vals = l1_objectives(X, t, w, x0, thetas)
    n_evals = len(thetas)
    i = int(np.argmin(vals))
    best_t, best_v = float(thetas[i]), float(vals[i])
    a = float(thetas[max(i - 1, 0)])
    b = float(thetas[min(i + 1, len(thetas) - 1)])
    if b - a <= tol:
        return best_t, best_v, n_evals, a, b
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc = _objective(X, t, w, x0, c)
    fd = _objective(X, t, w, x0, d)
    n_evals += 2
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = _objective(X, t, w, x0, c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = _objective(X, t, w, x0, d)
        n_evals += 1
    x, fx = (c, fc) if fc <= fd else (d, fd)
    if fx < best_v or (fx == best_v and x < best_t):
        best_t, best_v = x, fx
    return best_t, best_v, n_evals, a, b


def weighted_median(r, w):
    """Smallest minimizer of ``sum_i w_i |r_i - u|`` (weights positive)."""
    order = np.argsort(r, kind="mergesort")
    cw = np.cumsum(w[order])
    k = int(np.searchsorted(cw, 0.5 * cw[-1], side="left"))
    return float(r[order[min(k, len(r) - 1)]])


def covering_count(d, eps):
    """Greedy left-to-right cover of the grid by d-balls of radius ``eps``."""
    n = d.shape[0]
    lim = eps * (1.0 + 1e-12) + 1e-15
    count = 0
    i = 0
    while i < n:
        count += 1
        row = d[i, i:] <= lim
        L = len(row) if row.all() else int(np.argmin(row))
        block = d[i : i + L, i : i + L]
        colmax = np.diagonal(np.maximum.accumulate(block, axis=0))
        feasible = np.flatnonzero(colmax <= lim)
        m = i + int(feasible[-1])
        tail = d[m, m + 1 :] <= lim
        ext = len(tail) if tail.all() else int(np.argmin(tail))
        i = m + ext + 1
    return count


def lag_max(d):
    n = d.shape[0]
    out = np.zeros(n)
    for k in range(1, n):
        out[k] = np.diagonal(d, k).max()
    return out
