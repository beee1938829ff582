"""P300/ERP classification: xDAWN super-trial covariances, Riemannian tangent
features, and MDM / RBF-SVC / simulated quantum-kernel SVC classifiers."""
from .config import Config, load_config, parse_config
from .dataset import SynthParams, load_subject, save_subject, synth_generate
from .dsp import NONTARGET, TARGET, EpochSet, FirKernel, Recording, design_bandpass, extract_epochs, filtfilt
from .evaluation import (
    Confusion,
    CvReport,
    ErpPipeline,
    balanced_accuracy,
    cross_validate,
    evaluate_recording,
    f1_score,
    run_pipeline,
    stratified_kfold,
)
from .exceptions import ErpqkError

__version__ = "0.1.0"
