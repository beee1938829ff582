"""Fidelity kernel: exact and shot-estimated values, Gram matrices, SPD repair."""
import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..exceptions import ParameterError
from . import _sampling
from .circuit import build_feature_map, feature_states, simulate

EXACT = "exact"
SHOTS = "shots"


@dataclass
class KernelMatrix:
    values: np.ndarray
    mode: str = EXACT
    shots: Optional[int] = None
    seed: Optional[int] = None

    @property
    def shape(self):
        return self.values.shape


def _pair(x, y):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ParameterError(f"dimension mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise ParameterError("kernel inputs need at least 2 features")
    return x, y


def kernel_exact(x, y, reps=2):
    """``|<psi(x)|psi(y)>|**2`` from two simulated feature-map states."""
    x, y = _pair(x, y)
    a = simulate(build_feature_map(x, reps))
    b = simulate(build_feature_map(y, reps))
    return float(np.abs(np.vdot(a, b)) ** 2)


def _check_shots(shots):
    if int(shots) != shots or shots < 1:
        raise ParameterError(f"shots must be a positive integer, got {shots}")
    return int(shots)


def sample_fraction(probs, seeds, shots):
    """Fraction of ``shots`` simulated measurements that return all zeros."""
    probs = np.clip(np.asarray(probs, dtype=float), 0.0, 1.0)
    seeds = np.asarray(seeds, dtype=np.uint64)
    return _sampling.count_zero(probs.ravel(), seeds.ravel(), shots).reshape(probs.shape) / shots


def kernel_shots(x, y, reps=2, shots=1024, seed=0):
    """Shot estimate of the fidelity kernel.

    The exact all-zeros probability ``p`` is measured ``shots`` times with a
    generator keyed by ``seed``; the return value is ``count / shots`` with
    ``count ~ Binomial(shots, p)``.
    """
    shots = _check_shots(shots)
    p = kernel_exact(x, y, reps)
    return float(sample_fraction([p], [seed], shots)[0])


def gram(X, Y=None, reps=2, mode=EXACT, shots=1024, seed=0):
    """Kernel Gram matrix.

    With ``Y`` omitted the result is the symmetric training Gram of ``X``:
    the upper triangle is evaluated, mirrored, and the diagonal set to 1.
    With ``Y`` given the result has one row per ``X`` point and one column
    per ``Y`` point. In shot mode entry ``(i, j)`` is sampled with the key
    ``entry_seed(seed, i, j)``, so it equals
    ``kernel_shots(X[i], Y[j], reps, shots, int(entry_seed(seed, i, j)))``.
    """
    if mode not in (EXACT, SHOTS):
        raise ParameterError(f"mode must be 'exact' or 'shots', got {mode!r}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] < 2:
        raise ParameterError("kernel inputs need at least 2 features")
    sx = feature_states(X, reps)
    if Y is None:
        sy = sx
    else:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if Y.shape[1] != X.shape[1]:
            raise ParameterError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
        sy = feature_states(Y, reps)
    probs = np.abs(sx.conj() @ sy.T) ** 2
    m, p = probs.shape

    if Y is None:
        rows, cols = np.triu_indices(m, k=1)
        upper = probs[rows, cols]
        if mode == SHOTS:
            upper = sample_fraction(upper, _sampling.entry_seed(seed, rows, cols), _check_shots(shots))
        values = np.eye(m)
        values[rows, cols] = upper
        values[cols, rows] = upper
    elif mode == SHOTS:
        rows, cols = np.indices((m, p))
        values = sample_fraction(probs, _sampling.entry_seed(seed, rows, cols), _check_shots(shots))
    else:
        values = probs
    return KernelMatrix(values, mode, int(shots) if mode == SHOTS else None,
                        seed if mode == SHOTS else None)


def entry_seed(seed, i, j):
    return int(_sampling.entry_seed(seed, i, j))


def enforce_spd(K):
    """Clamp negative eigenvalues of a symmetric kernel matrix to zero."""
    values = np.asarray(getattr(K, "values", K), dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ParameterError(f"enforce_spd needs a square matrix, got shape {values.shape}")
    sym = 0.5 * (values + values.T)
    evals, evecs = np.linalg.eigh(sym)
    neg = evals < 0
    # subtract the negative part only; PSD input comes back unchanged
    fixed = sym - (evecs[:, neg] * evals[neg]) @ evecs[:, neg].T
    fixed = 0.5 * (fixed + fixed.T)
    if isinstance(K, KernelMatrix):
        return KernelMatrix(fixed, K.mode, K.shots, K.seed)
    return fixed


def write_gram_csv(path, values):
    """Full matrix, row-major, 17 significant digits."""
    values = np.asarray(getattr(values, "values", values), dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in values:
            writer.writerow([f"{v:.17g}" for v in row])


def read_gram_csv(path):
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    if len({len(r) for r in rows}) > 1:
        raise ParameterError(f"{path}: ragged rows")
    return np.array(rows, dtype=float)
