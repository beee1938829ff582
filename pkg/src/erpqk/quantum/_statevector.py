"""Gate-application kernels for batches of statevectors.

Qubit ``q`` is bit ``q`` of the amplitude index (little-endian). Gate codes:
0 = H, 1 = Phase(theta) = diag(1, e^{i theta}), 2 = CX(control, target).
Every kernel updates ``states`` (shape ``(m, 2**n)``) in place; row ``r``
uses angle ``thetas[r, g]`` for gate ``g``.
"""
import math

import numpy as np

from .._accel import njit, select

GATE_H = 0
GATE_P = 1
GATE_CX = 2

INV_SQRT2 = 1.0 / math.sqrt(2.0)


@njit
def run_gates_numba(states, kinds, q0, q1, thetas):
    m, dim = states.shape
    for r in range(m):
        psi = states[r]
        for g in range(kinds.shape[0]):
            kind = kinds[g]
            if kind == 0:
                bit = 1 << q0[g]
                for i in range(dim):
                    if i & bit == 0:
                        a = psi[i]
                        b = psi[i | bit]
                        psi[i] = (a + b) * INV_SQRT2
                        psi[i | bit] = (a - b) * INV_SQRT2
            elif kind == 1:
                bit = 1 << q0[g]
                theta = thetas[r, g]
                phase = complex(math.cos(theta), math.sin(theta))
                for i in range(dim):
                    if i & bit:
                        psi[i] = psi[i] * phase
            else:
                cbit = 1 << q0[g]
                tbit = 1 << q1[g]
                for i in range(dim):
                    if (i & cbit) and not (i & tbit):
                        j = i | tbit
                        tmp = psi[i]
                        psi[i] = psi[j]
                        psi[j] = tmp
    return states


def run_gates_numpy(states, kinds, q0, q1, thetas):
    m, dim = states.shape
    n = dim.bit_length() - 1
    # axis 1 + (n - 1 - q) of the (m, 2, ..., 2) view carries qubit q
    view = states.reshape((m,) + (2,) * n)
    for g in range(len(kinds)):
        kind = kinds[g]
        if kind == GATE_H:
            ax = n - q0[g]
            a = np.take(view, 0, axis=ax)
            b = np.take(view, 1, axis=ax)
            lo = (a + b) * INV_SQRT2
            hi = (a - b) * INV_SQRT2
            idx = [slice(None)] * (n + 1)
            idx[ax] = 0
            view[tuple(idx)] = lo
            idx[ax] = 1
            view[tuple(idx)] = hi
        elif kind == GATE_P:
            ax = n - q0[g]
            theta = thetas[:, g]
            phase = np.cos(theta) + 1j * np.sin(theta)
            idx = [slice(None)] * (n + 1)
            idx[ax] = 1
            sub = view[tuple(idx)]
            view[tuple(idx)] = sub * phase.reshape((m,) + (1,) * (n - 1))
        else:
            cax = n - q0[g]
            tax = n - q1[g]
            idx = [slice(None)] * (n + 1)
            idx[cax] = 1
            sub = view[tuple(idx)]
            # target axis index inside the sub-view shifts when control precedes it
            sub_tax = tax - 1 if cax < tax else tax
            view[tuple(idx)] = np.flip(sub, axis=sub_tax).copy()
    return states


run_gates = select(run_gates_numba, run_gates_numpy)
