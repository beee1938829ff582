"""Brute-force solver for small C-SVC duals, used as a test oracle.

Every assignment of each multiplier to {0, C, free} is tried. For the free
set the equality-constrained stationarity system is solved directly; the
feasible candidate with the smallest dual objective is the optimum because
the problem is convex and its true active set is among those enumerated.
"""
import itertools

import numpy as np


def solve_dual(K, y, C, tol=1e-10):
    y = np.asarray(y, dtype=float)
    m = len(y)
    Q = np.outer(y, y) * K
    best = None
    for pattern in itertools.product((0, 1, 2), repeat=m):
        alpha = np.zeros(m)
        free = [i for i, s in enumerate(pattern) if s == 2]
        fixed = [i for i, s in enumerate(pattern) if s != 2]
        alpha[[i for i, s in enumerate(pattern) if s == 1]] = C
        nu = None
        if free:
            f = np.array(free)
            # rows: Q_ff a_f + nu y_f = 1 - Q_f,fixed a_fixed ; y_f . a_f = -y_fixed . a_fixed
            n = len(f)
            A = np.zeros((n + 1, n + 1))
            A[:n, :n] = Q[np.ix_(f, f)]
            A[:n, n] = y[f]
            A[n, :n] = y[f]
            rhs = np.r_[1 - Q[np.ix_(f, fixed)] @ alpha[fixed], -y[fixed] @ alpha[fixed]]
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if np.abs(A @ sol - rhs).max() > 1e-9:
                continue
            alpha[f] = sol[:n]
            nu = sol[n]
            if alpha[f].min() < -tol or alpha[f].max() > C + tol:
                continue
            alpha = np.clip(alpha, 0, C)
        if abs(y @ alpha) > 1e-9:
            continue
        obj = 0.5 * alpha @ Q @ alpha - alpha.sum()
        if best is None or obj < best[0] - 1e-12:
            best = (obj, alpha, nu)
    obj, alpha, nu = best
    grad = Q @ alpha - 1
    if nu is None or not ((alpha > 1e-9) & (alpha < C - 1e-9)).any():
        # no free multiplier: nu is only bounded by the box-edge conditions
        lo, hi = -np.inf, np.inf
        for i in range(m):
            # alpha_i = 0 needs grad_i + nu y_i >= 0; alpha_i = C needs <= 0
            at_zero = alpha[i] <= 1e-9
            bound = -grad[i] * y[i]
            if at_zero == (y[i] > 0):
                lo = max(lo, bound)
            else:
                hi = min(hi, bound)
        nu = 0.5 * (lo + hi)
    return alpha, nu, obj


def decision_values(K, y, alpha, bias):
    return K @ (alpha * np.asarray(y, dtype=float)) + bias
