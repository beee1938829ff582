"""Riemannian geometry of SPD matrices and the MDM classifier."""
from dataclasses import dataclass

import numpy as np

from .dsp import CLASS_ORDER
from .exceptions import DomainError, FitError, ParameterError

SYM_TOL = 1e-10


def _apply(a, func, name, positive):
    a = np.asarray(a, dtype=float)
    a = 0.5 * (a + np.swapaxes(a, -1, -2))
    evals, evecs = np.linalg.eigh(a)
    if positive and np.any(evals <= 0):
        raise DomainError(f"{name} needs a positive definite input; smallest eigenvalue is {evals.min():.6g}")
    out = (evecs * func(evals)[..., None, :]) @ np.swapaxes(evecs, -1, -2)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def logm(a):
    return _apply(a, np.log, "log", True)


def expm(a):
    return _apply(a, np.exp, "exp", False)


def sqrtm(a):
    return _apply(a, np.sqrt, "sqrt", True)


def invsqrtm(a):
    return _apply(a, lambda v: 1.0 / np.sqrt(v), "invsqrt", True)


_FUNCS = {"log": logm, "exp": expm, "sqrt": sqrtm, "invsqrt": invsqrtm}


def spd_func(a, f):
    """Apply ``f`` in {"log", "exp", "sqrt", "invsqrt"} through the eigendecomposition of ``a``."""
    try:
        return _FUNCS[f](a)
    except KeyError:
        raise ParameterError(f"unknown matrix function {f!r}; choose from {sorted(_FUNCS)}") from None


def check_spd(a, tol=SYM_TOL):
    """Raise DomainError unless every matrix in ``a`` is symmetric and positive definite."""
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != a.shape[-2]:
        raise ParameterError("SPD matrices must be square")
    asym = np.max(np.abs(a - np.swapaxes(a, -1, -2)), initial=0.0)
    if asym > tol * max(1.0, np.max(np.abs(a), initial=0.0)):
        raise DomainError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    if a.size and np.linalg.eigvalsh(a).min() <= 0:
        raise DomainError("matrix is not positive definite")
    return a


def riemann_distance(a, b):
    """Affine-invariant distance ``sqrt(sum log^2 lambda_i)`` with ``lambda`` the eigenvalues of ``a^-1 b``.

    Broadcasts over leading dimensions.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-2:] != b.shape[-2:]:
        raise ParameterError(f"dimension mismatch: {a.shape[-2:]} vs {b.shape[-2:]}")
    isq = invsqrtm(a)
    m = isq @ b @ isq
    evals = np.linalg.eigvalsh(0.5 * (m + np.swapaxes(m, -1, -2)))
    return np.sqrt(np.sum(np.log(evals) ** 2, axis=-1))


def geometric_mean(covs, tol=1e-8, max_iter=50, return_converged=False):
    """Karcher mean by fixed-point iteration with unit step.

    Starts from the arithmetic mean and updates
    ``M <- M^1/2 exp(mean_i log(M^-1/2 C_i M^-1/2)) M^1/2`` until the
    Frobenius norm of the mean log term is at most ``tol``.

    Parameters
    ----------
    covs : ndarray, shape (n_matrices, n, n)
        SPD matrices.
    tol : float
        Stopping threshold on the tangent-space gradient norm.
    max_iter : int
        Maximum number of updates.
    return_converged : bool
        Also return whether ``tol`` was reached.

    Returns
    -------
    mean : ndarray, shape (n, n)
    converged : bool
        Only when ``return_converged`` is true.
    """
    covs = np.asarray(covs, dtype=float)
    if covs.ndim != 3 or len(covs) == 0:
        raise ParameterError("geometric_mean needs a non-empty stack of matrices (n_matrices, n, n)")
    mean = covs.mean(axis=0)
    converged = False
    for _ in range(max_iter):
        sq = sqrtm(mean)
        isq = invsqrtm(mean)
        step = logm(isq @ covs @ isq).mean(axis=0)
        if np.linalg.norm(step, "fro") <= tol:
            converged = True
            break
        mean = sq @ expm(step) @ sq
        mean = 0.5 * (mean + mean.T)
    else:
        sq = invsqrtm(mean)
        converged = np.linalg.norm(logm(sq @ covs @ sq).mean(axis=0), "fro") <= tol
    if return_converged:
        return mean, bool(converged)
    return mean


def _upper_weights(n):
    rows, cols = np.triu_indices(n)
    weights = np.where(rows == cols, 1.0, np.sqrt(2.0))
    return rows, cols, weights


def tangent_project(covs, ref):
    """Isometric tangent-space vectors of ``covs`` at ``ref``.

    Each matrix maps to ``L = log(ref^-1/2 X ref^-1/2)``; the vector is the
    row-major upper triangle of ``L`` with off-diagonal entries scaled by
    sqrt(2), so its Euclidean norm equals the Riemannian distance to ``ref``.

    Returns
    -------
    ndarray, shape (..., n (n + 1) / 2)
    """
    covs = np.asarray(covs, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if covs.shape[-2:] != ref.shape:
        raise ParameterError(f"dimension mismatch: matrices {covs.shape[-2:]} vs reference {ref.shape}")
    isq = invsqrtm(ref)
    logs = logm(isq @ covs @ isq)
    rows, cols, weights = _upper_weights(ref.shape[0])
    return logs[..., rows, cols] * weights


def untangent(vectors, ref):
    """Inverse of :func:`tangent_project`."""
    vectors = np.asarray(vectors, dtype=float)
    n = int(round((np.sqrt(1 + 8 * vectors.shape[-1]) - 1) / 2))
    rows, cols, weights = _upper_weights(n)
    sym = np.zeros(vectors.shape[:-1] + (n, n))
    sym[..., rows, cols] = vectors / weights
    sym[..., cols, rows] = vectors / weights
    sq = sqrtm(ref)
    return sq @ expm(sym) @ sq


@dataclass
class MdmModel:
    class_means: np.ndarray
    class_order: tuple = CLASS_ORDER
    converged: tuple = ()


def mdm_fit(covs, labels, tol=1e-8, max_iter=50):
    """One geometric mean per class."""
    covs = np.asarray(covs, dtype=float)
    labels = np.asarray(labels)
    means, flags = [], []
    for c in CLASS_ORDER:
        members = covs[labels == c]
        if not len(members):
            raise FitError(f"class {c} has no training matrices")
        mean, ok = geometric_mean(members, tol, max_iter, return_converged=True)
        means.append(mean)
        flags.append(ok)
    return MdmModel(np.array(means), CLASS_ORDER, tuple(flags))


def mdm_distances(model, covs):
    covs = np.asarray(covs, dtype=float)
    if covs.shape[-2:] != model.class_means.shape[-2:]:
        raise ParameterError("matrix dimension does not match the fitted class means")
    return np.stack([riemann_distance(m, covs) for m in model.class_means], axis=-1)


def mdm_predict(model, covs):
    """Label of the closest class mean; ties go to the first class (TARGET)."""
    dist = mdm_distances(model, covs)
    # argmin returns the first minimum, i.e. TARGET on exact ties
    return np.asarray(model.class_order)[np.argmin(dist, axis=-1)]
