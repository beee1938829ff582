"""xDAWN spatial filtering and super-trial covariance matrices."""
from dataclasses import dataclass

import numpy as np

from .dsp import CLASS_ORDER
from .exceptions import ErpqkError, FitError, ParameterError

DEFAULT_SHRINKAGE = 1e-6
# relative eigenvalue floor below which the signal covariance is shrunk
_SINGULAR_RTOL = 1e-10


@dataclass
class XdawnModel:
    """Fitted xDAWN filters.

    Parameters
    ----------
    filters : ndarray, shape (n_classes, nfilter, n_channels)
        Unit-norm spatial filters per class, rows ordered by decreasing
        generalized eigenvalue.
    prototypes : ndarray, shape (n_classes, nfilter, n_samples)
        Filtered class-average evoked responses.
    class_order : tuple
        Always ``(TARGET, NONTARGET)``.
    """

    filters: np.ndarray
    prototypes: np.ndarray
    class_order: tuple = CLASS_ORDER

    @property
    def nfilter(self):
        return self.filters.shape[1]

    @property
    def n_channels(self):
        return self.filters.shape[2]


def _center(x):
    return x - x.mean(axis=-1, keepdims=True)


def _fix_sign(vectors):
    # rows: make the largest-magnitude component positive
    idx = np.argmax(np.abs(vectors), axis=1)
    signs = np.sign(vectors[np.arange(len(vectors)), idx])
    signs[signs == 0] = 1.0
    return vectors * signs[:, None]


def _generalized_eigh(a, b):
    """Eigen-pairs of ``a v = lambda b v`` for symmetric ``a`` and SPD ``b``, descending."""
    chol = np.linalg.cholesky(b)
    inv_chol = np.linalg.inv(chol)
    m = inv_chol @ a @ inv_chol.T
    evals, evecs = np.linalg.eigh(0.5 * (m + m.T))
    vectors = inv_chol.T @ evecs
    order = np.argsort(evals)[::-1]
    return evals[order], vectors[:, order]


def _signal_covariance(x):
    n_samples = x.shape[-1]
    sigma = np.einsum("kct,kdt->cd", x, x) / (n_samples * len(x))
    sigma = 0.5 * (sigma + sigma.T)
    evals = np.linalg.eigvalsh(sigma)
    top = max(evals[-1], 0.0)
    if top == 0.0:
        return np.eye(len(sigma))
    if evals[0] <= _SINGULAR_RTOL * top:
        mu = np.trace(sigma) / len(sigma)
        sigma = (1 - DEFAULT_SHRINKAGE) * sigma + DEFAULT_SHRINKAGE * mu * np.eye(len(sigma))
    return sigma


def fit_xdawn(epochs, nfilter=1):
    """Estimate xDAWN filters from labelled epochs.

    For each class the class-average evoked response ``P`` gives the evoked
    covariance ``P P^T / T``; the filters are the leading generalized
    eigenvectors of that matrix against the average single-trial covariance.
    Epochs are row-mean-centered first. A singular signal covariance is
    shrunk toward a scaled identity instead of failing.
    """
    x = _center(np.asarray(epochs.epochs, dtype=float))
    n_channels, n_samples = x.shape[1:]
    if not 1 <= nfilter <= n_channels:
        raise ParameterError(f"nfilter must be in [1, {n_channels}], got {nfilter}")
    for c in CLASS_ORDER:
        if not np.any(epochs.labels == c):
            raise FitError(f"class {c} has no epochs; xDAWN needs both classes")

    sigma_x = _signal_covariance(x)
    filters, prototypes = [], []
    for c in CLASS_ORDER:
        evoked = x[epochs.labels == c].mean(axis=0)
        sigma_c = evoked @ evoked.T / n_samples
        _, vectors = _generalized_eigh(sigma_c, sigma_x)
        w = vectors[:, :nfilter].T
        w = w / np.linalg.norm(w, axis=1, keepdims=True)
        w = _fix_sign(w)
        filters.append(w)
        prototypes.append(w @ evoked)
    return XdawnModel(np.array(filters), np.array(prototypes))


def apply_filters(epochs, model):
    """Filtered trials, shape ``(n_trials, n_classes * nfilter, n_samples)``."""
    x = np.asarray(getattr(epochs, "epochs", epochs), dtype=float)
    w = model.filters.reshape(-1, model.n_channels)
    return np.einsum("fc,kct->kft", w, x)


def supertrial_covariance(prototypes, filtered, shrinkage=DEFAULT_SHRINKAGE):
    """Shrunk sample covariance of the vertical stack ``[prototypes; filtered]``.

    ``filtered`` may hold one trial ``(rows, T)`` or a batch ``(n, rows, T)``.
    """
    prototypes = np.asarray(prototypes, dtype=float)
    filtered = np.asarray(filtered, dtype=float)
    single = filtered.ndim == 2
    if single:
        filtered = filtered[None]
    if not 0 <= shrinkage < 1:
        raise ParameterError(f"shrinkage must lie in [0, 1), got {shrinkage}")
    n_samples = filtered.shape[-1]
    if prototypes.shape[-1] != n_samples:
        raise ParameterError("prototypes and trials differ in sample count")
    protos = np.broadcast_to(prototypes, (len(filtered),) + prototypes.shape)
    stacked = _center(np.concatenate([protos, filtered], axis=1))
    covs = stacked @ stacked.transpose(0, 2, 1) / (n_samples - 1)
    n = covs.shape[-1]
    if shrinkage:
        mu = np.trace(covs, axis1=1, axis2=2) / n
        covs = (1 - shrinkage) * covs + shrinkage * mu[:, None, None] * np.eye(n)
    covs = 0.5 * (covs + covs.transpose(0, 2, 1))
    return covs[0] if single else covs


def erp_covariances(epochs, model, shrinkage=DEFAULT_SHRINKAGE):
    """One super-trial covariance per trial, shape ``(n_trials, 2*nfilter, 2*nfilter)``.

    Each super-trial stacks the TARGET and NONTARGET prototypes above the
    trial filtered by the TARGET and NONTARGET filters.
    """
    x = np.asarray(getattr(epochs, "epochs", epochs), dtype=float)
    if x.shape[1] != model.n_channels:
        raise ParameterError(
            f"model fitted on {model.n_channels} channels, epochs have {x.shape[1]}")
    protos = model.prototypes.reshape(-1, model.prototypes.shape[-1])
    covs = supertrial_covariance(protos, apply_filters(x, model), shrinkage)
    if len(covs) and np.linalg.eigvalsh(covs)[:, 0].min() <= 0:
        raise ErpqkError("super-trial covariance is not positive definite after shrinkage")
    return covs
