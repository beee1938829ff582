"""SMO inner loop for the C-SVC dual.

Minimizes ``0.5 a^T Q a - sum(a)`` with ``Q_ij = y_i y_j K_ij`` subject to
``0 <= a_i <= C`` and ``sum(a_i y_i) = 0``. Working pairs are the maximal
violating pair; a pair update is solved analytically and clipped to the box.
Both implementations follow the same arithmetic and tie-breaking (first
index wins), so they visit the same iterates.
"""
import numpy as np

from ._accel import njit, select

TAU = 1e-12


def pair_update(ai, aj, yi, yj, gi, gj, qii, qjj, qij, c):
    # qij is Q[i, j] (already label-signed)
    if yi != yj:
        quad = qii + qjj + 2.0 * qij
        if quad <= 0.0:
            quad = TAU
        delta = (-gi - gj) / quad
        diff = ai - aj
        ai = ai + delta
        aj = aj + delta
        if diff > 0.0:
            if aj < 0.0:
                aj = 0.0
                ai = diff
        else:
            if ai < 0.0:
                ai = 0.0
                aj = -diff
        if diff > 0.0:
            if ai > c:
                ai = c
                aj = c - diff
        else:
            if aj > c:
                aj = c
                ai = c + diff
    else:
        quad = qii + qjj - 2.0 * qij
        if quad <= 0.0:
            quad = TAU
        delta = (gi - gj) / quad
        total = ai + aj
        ai = ai - delta
        aj = aj + delta
        if total > c:
            if ai > c:
                ai = c
                aj = total - c
        else:
            if aj < 0.0:
                aj = 0.0
                ai = total
        if total > c:
            if aj > c:
                aj = c
                ai = total - c
        else:
            if ai < 0.0:
                ai = 0.0
                aj = total
    return ai, aj


_pair_update_numba = njit(pair_update)


@njit
def smo_numba(Q, y, c, tol, max_iter):
    m = y.shape[0]
    alpha = np.zeros(m)
    grad = -np.ones(m)
    history = np.empty(max_iter + 1)
    history[0] = 0.0
    n_iter = 0
    converged = False
    while True:
        i = -1
        j = -1
        gmax = -np.inf
        gmin = np.inf
        for t in range(m):
            yg = -y[t] * grad[t]
            up = (y[t] > 0 and alpha[t] < c) or (y[t] < 0 and alpha[t] > 0.0)
            low = (y[t] < 0 and alpha[t] < c) or (y[t] > 0 and alpha[t] > 0.0)
            if up and yg > gmax:
                gmax = yg
                i = t
            if low and yg < gmin:
                gmin = yg
                j = t
        if i < 0 or j < 0 or gmax - gmin <= tol:
            converged = True
            break
        if n_iter >= max_iter:
            break
        ai_old = alpha[i]
        aj_old = alpha[j]
        ai, aj = _pair_update_numba(ai_old, aj_old, y[i], y[j], grad[i], grad[j],
                                    Q[i, i], Q[j, j], Q[i, j], c)
        alpha[i] = ai
        alpha[j] = aj
        dai = ai - ai_old
        daj = aj - aj_old
        for t in range(m):
            grad[t] += Q[i, t] * dai + Q[j, t] * daj
        n_iter += 1
        obj = 0.0
        for t in range(m):
            obj += alpha[t] * (1.0 - grad[t])
        history[n_iter] = 0.5 * obj
    return alpha, grad, n_iter, converged, history[:n_iter + 1]


def smo_numpy(Q, y, c, tol, max_iter):
    m = len(y)
    alpha = np.zeros(m)
    grad = -np.ones(m)
    history = [0.0]
    n_iter = 0
    converged = False
    pos = y > 0
    while True:
        yg = -y * grad
        up = np.where(pos, alpha < c, alpha > 0.0)
        low = np.where(pos, alpha > 0.0, alpha < c)
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.argmax(np.where(up, yg, -np.inf)))
        j = int(np.argmin(np.where(low, yg, np.inf)))
        if yg[i] - yg[j] <= tol:
            converged = True
            break
        if n_iter >= max_iter:
            break
        ai_old, aj_old = alpha[i], alpha[j]
        ai, aj = pair_update(ai_old, aj_old, y[i], y[j], grad[i], grad[j],
                             Q[i, i], Q[j, j], Q[i, j], c)
        alpha[i], alpha[j] = ai, aj
        grad += Q[i] * (ai - ai_old) + Q[j] * (aj - aj_old)
        n_iter += 1
        history.append(0.5 * float(np.sum(alpha * (1.0 - grad))))
    return alpha, grad, n_iter, converged, np.array(history)


smo = select(smo_numba, smo_numpy)
