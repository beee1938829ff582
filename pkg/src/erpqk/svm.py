"""Soft-margin SVM on precomputed or RBF kernels."""
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _smo
from .exceptions import FitError, ParameterError

MODEL_FORMAT = "erpqk-svm"
MODEL_VERSION = 1
SUPPORT_EPS = 1e-12


def rbf_kernel(x, y, gamma):
    """``exp(-gamma * ||x - y||**2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ParameterError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if not gamma > 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    return float(np.exp(-gamma * np.sum((x - y) ** 2)))


def rbf_gram(X, Y, gamma):
    """RBF kernel between rows of ``X`` and rows of ``Y``, shape ``(len(X), len(Y))``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise ParameterError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if not gamma > 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    sq = (X ** 2).sum(1)[:, None] + (Y ** 2).sum(1)[None, :] - 2.0 * X @ Y.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


def regularization_to_c(value, as_lambda=False, n_train=None):
    """Map the configured regularization to the box constraint C.

    By default the value is C itself. With ``as_lambda`` it is an L2 penalty
    weight and ``C = 1 / (lambda * n_train)``.
    """
    if not value > 0:
        raise ParameterError(f"regularization must be positive, got {value}")
    if not as_lambda:
        return float(value)
    if not n_train:
        raise ParameterError("n_train is required when regularization is a lambda")
    return 1.0 / (value * n_train)


@dataclass
class SvmModel:
    alphas: np.ndarray
    bias: float
    labels: np.ndarray
    C: float
    kernel: dict = field(default_factory=lambda: {"type": "precomputed"})
    training_features: Optional[np.ndarray] = None
    converged: bool = True
    n_iter: int = 0
    objective: Optional[np.ndarray] = None

    @property
    def support_indices(self):
        return np.flatnonzero(self.alphas > SUPPORT_EPS)

    @property
    def dual_coef(self):
        return self.alphas * self.labels


def _bias(alpha, grad, y, c):
    yg = y * grad
    free = (alpha > 0.0) & (alpha < c)
    if free.any():
        rho = float(np.mean(yg[free]))
    else:
        at_upper = alpha >= c
        at_lower = alpha <= 0.0
        # bounds on rho implied by points sitting at a box edge
        ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
        ub = yg[ub_mask].min() if ub_mask.any() else np.inf
        lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
        rho = 0.5 * (ub + lb)
    return -rho


def _train_kernel(X, kernel, gamma):
    if kernel == "precomputed":
        K = np.asarray(getattr(X, "values", X), dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ParameterError(f"precomputed kernel must be square, got shape {K.shape}")
        if not np.allclose(K, K.T, rtol=0, atol=1e-10):
            raise ParameterError("precomputed kernel is not symmetric")
        return K, None
    if kernel == "rbf":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return rbf_gram(X, X, gamma), X.copy()
    raise ParameterError(f"kernel must be 'precomputed' or 'rbf', got {kernel!r}")


def svc_fit(X, y, C=0.001, max_iter=500, tol=1e-3, kernel="precomputed", gamma=0.1):
    """Solve the C-SVC dual by SMO with maximal-violating-pair selection.

    ``X`` is the training Gram matrix when ``kernel="precomputed"`` and the
    feature matrix when ``kernel="rbf"``. ``max_iter`` caps the number of
    pair updates; ``tol`` is the allowed KKT violation gap. Labels are -1/+1.
    """
    y = np.asarray(y, dtype=float)
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ParameterError("labels must be -1 or +1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise FitError("both classes are required to fit an SVM")
    if not C > 0:
        raise ParameterError(f"C must be positive, got {C}")
    if max_iter < 0:
        raise ParameterError("max_iter must be non-negative")
    K, features = _train_kernel(X, kernel, gamma)
    if len(K) != len(y):
        raise ParameterError(f"{len(K)} kernel rows for {len(y)} labels")
    Q = np.ascontiguousarray(y[:, None] * y[None, :] * K)
    alpha, grad, n_iter, converged, history = _smo.smo(Q, y, float(C), float(tol), int(max_iter))
    spec = {"type": "precomputed"} if kernel == "precomputed" else {"type": "rbf", "gamma": float(gamma)}
    return SvmModel(alphas=np.asarray(alpha), bias=_bias(alpha, grad, y, C), labels=y,
                    C=float(C), kernel=spec, training_features=features,
                    converged=bool(converged), n_iter=int(n_iter), objective=np.asarray(history))


def decision_function(model, X):
    if model.kernel["type"] == "rbf":
        K = rbf_gram(X, model.training_features, model.kernel["gamma"])
    else:
        K = np.atleast_2d(np.asarray(getattr(X, "values", X), dtype=float))
    if K.shape[1] != len(model.alphas):
        raise ParameterError(
            f"kernel has {K.shape[1]} columns, model was trained on {len(model.alphas)} points")
    return K @ model.dual_coef + model.bias


def svc_predict(model, X):
    """Labels in {-1, +1} and decision values; a decision of exactly 0 maps to +1."""
    f = decision_function(model, X)
    return np.where(f >= 0, 1, -1), f


def model_to_dict(model):
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "C": model.C,
        "kernel": model.kernel,
        "alphas": model.alphas.tolist(),
        "bias": model.bias,
        "support_indices": model.support_indices.tolist(),
        "labels": model.labels.astype(int).tolist(),
        "training_features": None if model.training_features is None
        else model.training_features.tolist(),
        "converged": model.converged,
        "n_iter": model.n_iter,
    }


def model_from_dict(doc):
    if doc.get("format") != MODEL_FORMAT:
        raise ParameterError("not an SVM model document")
    if doc.get("version") != MODEL_VERSION:
        raise ParameterError(f"unsupported SVM model version {doc.get('version')}")
    feats = doc.get("training_features")
    return SvmModel(alphas=np.array(doc["alphas"], dtype=float), bias=float(doc["bias"]),
                    labels=np.array(doc["labels"], dtype=float), C=float(doc["C"]),
                    kernel=dict(doc["kernel"]),
                    training_features=None if feats is None else np.array(feats, dtype=float),
                    converged=bool(doc["converged"]), n_iter=int(doc["n_iter"]))


def save_model(model, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
