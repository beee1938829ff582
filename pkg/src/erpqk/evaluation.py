"""Cross-validation harness, metrics and end-to-end pipeline."""
import logging
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import quantum
from .config import Config
from .dataset import find_subjects, load_subject
from .dsp import CLASS_ORDER, NONTARGET, TARGET, design_bandpass, extract_epochs, filtfilt
from .exceptions import FitError, MetricError, ParameterError, StageError
from .quantum import _sampling
from .riemann import geometric_mean, mdm_fit, mdm_predict, tangent_project
from .svm import regularization_to_c, svc_fit, svc_predict
from .xdawn import erp_covariances, fit_xdawn

log = logging.getLogger(__name__)

REPORT_FORMAT = "erpqk-cv-report"
REPORT_VERSION = 1
METRICS = ("train_ba", "test_ba", "train_f1", "test_f1", "fit_seconds", "predict_seconds")


@dataclass(frozen=True)
class Confusion:
    """Counts: A/B TARGET correct/incorrect, C/D NONTARGET correct/incorrect."""

    A: int
    B: int
    C: int
    D: int

    def __post_init__(self):
        if min(self.A, self.B, self.C, self.D) < 0:
            raise ParameterError("confusion counts must be non-negative")

    @classmethod
    def from_labels(cls, y_true, y_pred):
        y_true = np.asarray(y_true)
        y_pred = np.asarray(y_pred)
        t = y_true == TARGET
        hit = y_pred == y_true
        return cls(int(np.sum(t & hit)), int(np.sum(t & ~hit)),
                   int(np.sum(~t & hit)), int(np.sum(~t & ~hit)))

    def to_dict(self):
        return asdict(self)


def balanced_accuracy(c):
    """``(A / (A + B) + C / (C + D)) / 2``, correctly rounded."""
    if c.A + c.B == 0 or c.C + c.D == 0:
        raise MetricError(f"balanced accuracy needs both classes in the test set, got {c}")
    return float(Fraction(c.A, c.A + c.B) / 2 + Fraction(c.C, c.C + c.D) / 2)


def f1_score(c):
    """``2A / (2A + B + D)``; 0 (with a warning) when the denominator vanishes."""
    denom = 2 * c.A + c.B + c.D
    if denom == 0:
        warnings.warn("F1 undefined for A = B = D = 0; returning 0", RuntimeWarning, stacklevel=2)
        return 0.0
    return float(Fraction(2 * c.A, denom))


def stratified_kfold(labels, k=5, seed=0):
    """Stratified folds as a list of ``(train_indices, test_indices)``.

    Each class's indices are shuffled with ``seed`` and dealt round-robin
    into ``k`` folds, so per-fold class counts differ by at most one.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ParameterError("k must be >= 2")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(labels), dtype=np.int64)
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if len(members) < k:
            raise ParameterError(f"class {c} has {len(members)} members, fewer than k={k}")
        assignment[rng.permutation(members)] = np.arange(len(members)) % k
    return [(np.flatnonzero(assignment != f), np.flatnonzero(assignment == f)) for f in range(k)]


def _derived_seed(seed, fold, role):
    return int(_sampling.entry_seed(seed, 0x10000 + fold, role))


@contextmanager
def stage(name):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


class MinMaxScaler:
    """Affine map of each feature's training range onto [0, pi]."""

    def fit(self, X):
        self.lo = X.min(axis=0)
        span = X.max(axis=0) - self.lo
        self.scale = np.where(span > 0, np.pi / np.where(span > 0, span, 1.0), 0.0)
        return self

    def transform(self, X):
        return (X - self.lo) * self.scale


class ErpPipeline:
    """Fold-local chain: xDAWN, super-trial covariances, reference mean,
    tangent vectors, classifier. ``fit`` only ever sees training epochs.
    """

    def __init__(self, config, fold=0):
        self.config = config
        self.fold = fold

    def _covariances(self, epochs):
        return erp_covariances(epochs, self.xdawn, self.config.shrinkage)

    def _features(self, covs):
        X = tangent_project(covs, self.reference)
        return self.scaler.transform(X) if self.scaler is not None else X

    def fit(self, epochs):
        cfg = self.config
        for c in CLASS_ORDER:
            if not np.any(epochs.labels == c):
                raise StageError("fit", FitError(f"class {c} missing from training data"))
        with stage("xdawn"):
            self.xdawn = fit_xdawn(epochs, cfg.nfilter)
        with stage("covariance"):
            covs = self._covariances(epochs)
        self.converged = True
        self.reference = None
        self.scaler = None
        if cfg.classifier == "mdm":
            with stage("mdm"):
                self.model = mdm_fit(covs, epochs.labels, cfg.mean_tol, cfg.mean_max_iter)
                self.converged = all(self.model.converged)
            return self
        with stage("reference_mean"):
            self.reference, ok = geometric_mean(covs, cfg.mean_tol, cfg.mean_max_iter,
                                                return_converged=True)
        with stage("tangent"):
            X = tangent_project(covs, self.reference)
            if cfg.scale_features:
                self.scaler = MinMaxScaler().fit(X)
                X = self.scaler.transform(X)
        y = np.where(epochs.labels == TARGET, 1.0, -1.0)
        C = regularization_to_c(cfg.regularization, cfg.as_lambda, len(y))
        if cfg.classifier == "svc":
            with stage("svm"):
                self.model = svc_fit(X, y, C, cfg.max_iter, cfg.tol, kernel="rbf", gamma=cfg.gamma)
        else:
            with stage("quantum_kernel"):
                K = quantum.gram(X, reps=cfg.reps, mode=cfg.backend, shots=cfg.shots,
                                 seed=_derived_seed(cfg.seed, self.fold, 0))
                K = quantum.enforce_spd(K)
            with stage("svm"):
                self.model = svc_fit(K.values, y, C, cfg.max_iter, cfg.tol, kernel="precomputed")
            self.train_gram = K.values
            self.train_features = X
        self.converged = ok and self.model.converged
        return self

    def predict(self, epochs, training=False):
        """Labels (1 = TARGET, 0 = NONTARGET) for ``epochs``.

        ``training=True`` marks the epochs as the fitted training set, which
        lets QSVC reuse its training Gram instead of re-estimating it.
        """
        cfg = self.config
        with stage("covariance"):
            covs = self._covariances(epochs)
        if cfg.classifier == "mdm":
            with stage("mdm"):
                return mdm_predict(self.model, covs)
        with stage("tangent"):
            X = self._features(covs)
        if cfg.classifier == "svc":
            with stage("svm"):
                signs, _ = svc_predict(self.model, X)
        else:
            with stage("quantum_kernel"):
                if training:
                    K = self.train_gram
                else:
                    K = quantum.gram(X, self.train_features, reps=cfg.reps, mode=cfg.backend,
                                     shots=cfg.shots, seed=_derived_seed(cfg.seed, self.fold, 1)).values
            with stage("svm"):
                signs, _ = svc_predict(self.model, K)
        return np.where(signs > 0, TARGET, NONTARGET)

    def params(self):
        """Fitted arrays keyed by name, for reproducibility and leakage checks."""
        out = {"xdawn_filters": self.xdawn.filters, "xdawn_prototypes": self.xdawn.prototypes}
        if self.config.classifier == "mdm":
            out["class_means"] = self.model.class_means
            return out
        out["reference"] = self.reference
        out["alphas"] = self.model.alphas
        out["bias"] = np.array([self.model.bias])
        return out


def run_fold(epochs, train_idx, test_idx, config, fold=0):
    """Fit on ``train_idx`` only, score train and test; errors are captured per stage."""
    record = {"fold": fold, "n_train": int(len(train_idx)), "n_test": int(len(test_idx)),
              "train_ba": None, "test_ba": None, "train_f1": None, "test_f1": None,
              "train_confusion": None, "confusion": None,
              "fit_seconds": None, "predict_seconds": None, "converged": None, "error": None}
    train, test = epochs.subset(train_idx), epochs.subset(test_idx)
    try:
        t0 = time.perf_counter()
        pipe = ErpPipeline(config, fold).fit(train)
        t1 = time.perf_counter()
        test_pred = pipe.predict(test)
        t2 = time.perf_counter()
        train_pred = pipe.predict(train, training=True)
        with stage("metrics"):
            tr = Confusion.from_labels(train.labels, train_pred)
            te = Confusion.from_labels(test.labels, test_pred)
            record.update(train_ba=balanced_accuracy(tr), test_ba=balanced_accuracy(te),
                          train_f1=f1_score(tr), test_f1=f1_score(te),
                          train_confusion=tr.to_dict(), confusion=te.to_dict(),
                          converged=bool(pipe.converged))
        if config.timings:
            record.update(fit_seconds=t1 - t0, predict_seconds=t2 - t1)
    except StageError as exc:
        log.warning("fold %d failed in stage %s: %s", fold, exc.stage, exc.cause)
        record["error"] = {"stage": exc.stage, "message": str(exc.cause)}
    return record


def _aggregate(per_fold):
    out = {}
    for name in METRICS:
        vals = [r[name] for r in per_fold if r.get(name) is not None]
        if not vals:
            out[name] = {"mean": None, "std": None, "n": 0}
            continue
        arr = np.array(vals, dtype=float)
        out[name] = {"mean": float(arr.mean()),
                     "std": float(arr.std(ddof=1)) if len(arr) > 1 else 0.0,
                     "n": len(arr)}
    return out


@dataclass
class CvReport:
    subject_id: str
    per_fold: list
    aggregate: dict
    config_echo: dict
    seed: int
    n_epochs: dict = field(default_factory=dict)

    @property
    def failed_folds(self):
        return [r for r in self.per_fold if r["error"] is not None]

    def to_dict(self):
        return asdict(self)


def resolve_threads(threads=None):
    if threads is None:
        threads = int(os.environ.get("ERPQK_THREADS", "1") or 1)
    return max(1, int(threads))


def _subsample(epochs, n, seed):
    if not n or n >= len(epochs):
        return epochs
    rng = np.random.default_rng(_derived_seed(seed, 0xFFFF, 2))
    keep = []
    for c in CLASS_ORDER:
        members = np.flatnonzero(epochs.labels == c)
        share = max(1, int(round(n * len(members) / len(epochs))))
        keep.append(rng.choice(members, size=min(share, len(members)), replace=False))
    return epochs.subset(np.sort(np.concatenate(keep)))


def prepare_epochs(rec, config):
    """Band-pass the continuous recording, then cut epochs."""
    with stage("filter"):
        kernel = design_bandpass(rec.fs, config.band_lo, config.band_hi, config.n_taps)
        filtered = filtfilt(rec, kernel)
    with stage("epochs"):
        epochs = extract_epochs(filtered, config.tmin_ms / 1000.0, config.tmax_ms / 1000.0)
    return _subsample(epochs, config.subsample, config.seed)


def cross_validate(epochs, config, threads=None, subject_id=""):
    config = config.validate()
    folds = stratified_kfold(epochs.labels, config.folds, config.seed)
    jobs = [(epochs, tr, te, config, i) for i, (tr, te) in enumerate(folds)]
    workers = min(resolve_threads(threads), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_fold = list(pool.map(lambda a: run_fold(*a), jobs))
    else:
        per_fold = [run_fold(*a) for a in jobs]
    per_fold.sort(key=lambda r: r["fold"])
    counts = epochs.class_counts()
    return CvReport(subject_id=subject_id, per_fold=per_fold, aggregate=_aggregate(per_fold),
                    config_echo=config.to_dict(), seed=config.seed,
                    n_epochs={"TARGET": counts[TARGET], "NONTARGET": counts[NONTARGET]})


def evaluate_recording(rec, config, threads=None):
    return cross_validate(prepare_epochs(rec, config), config, threads, rec.subject_id)


def run_pipeline(config, threads=None):
    """Cross-validate every subject found under ``config.data_dir``."""
    config = config.validate()
    if not config.data_dir:
        raise ParameterError("config.data_dir is not set")
    reports = []
    for path in find_subjects(config.data_dir):
        with stage("load"):
            rec = load_subject(path)
        reports.append(evaluate_recording(rec, config, threads))
    return reports


def report_document(reports):
    return {"format": REPORT_FORMAT, "version": REPORT_VERSION,
            "reports": [r.to_dict() for r in reports]}
