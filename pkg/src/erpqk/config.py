"""Pipeline configuration: a flat ``key = value`` text file.

Blank lines and ``#`` comments are ignored; ``:`` also works as separator.
Unknown keys are rejected.
"""
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .exceptions import ParameterError

CLASSIFIERS = ("mdm", "svc", "qsvc")
BACKENDS = ("exact", "shots")


@dataclass(frozen=True)
class Config:
    data_dir: Optional[str] = None
    classifier: str = "qsvc"
    backend: str = "exact"
    shots: int = 1024
    reps: int = 2
    gamma: float = 0.1
    regularization: float = 0.001
    as_lambda: bool = True
    max_iter: int = 500
    tol: float = 1e-3
    folds: int = 5
    seed: int = 0
    nfilter: int = 1
    shrinkage: float = 1e-6
    band_lo: float = 1.0
    band_hi: float = 24.0
    n_taps: int = 513
    tmin_ms: float = 100.0
    tmax_ms: float = 700.0
    scale_features: bool = False
    subsample: int = 0
    mean_tol: float = 1e-8
    mean_max_iter: int = 50
    timings: bool = True

    def validate(self):
        if self.classifier not in CLASSIFIERS:
            raise ParameterError(f"classifier must be one of {CLASSIFIERS}, got {self.classifier!r}")
        if self.backend not in BACKENDS:
            raise ParameterError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        positive = ("shots", "reps", "gamma", "regularization", "tol", "nfilter", "n_taps",
                    "mean_tol", "mean_max_iter")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if self.max_iter < 0:
            raise ParameterError("max_iter must be >= 0")
        if self.folds < 2:
            raise ParameterError("folds must be >= 2")
        if self.seed < 0:
            raise ParameterError("seed must be >= 0")
        if not 0 <= self.shrinkage < 1:
            raise ParameterError("shrinkage must lie in [0, 1)")
        if not 0 < self.band_lo < self.band_hi:
            raise ParameterError("band edges must satisfy 0 < band_lo < band_hi")
        if not self.tmin_ms < self.tmax_ms:
            raise ParameterError("tmin_ms must be below tmax_ms")
        if self.subsample < 0:
            raise ParameterError("subsample must be >= 0")
        return self

    def to_dict(self):
        return asdict(self)

    def updated(self, **overrides):
        return replace(self, **{k: v for k, v in overrides.items() if v is not None}).validate()


_TYPES = {f.name: f.type for f in fields(Config)}


def _coerce(key, text):
    kind = _TYPES[key]
    text = text.strip()
    try:
        if kind in (bool, "bool"):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind in (int, "int"):
            value = float(text)
            if value != int(value):
                raise ValueError(text)
            return int(value)
        if kind in (float, "float"):
            return float(text)
    except ValueError:
        raise ParameterError(f"config key {key!r}: cannot parse {text!r}") from None
    return None if text.lower() in ("", "none", "null") else text


def coerce_value(key, value):
    if key not in _TYPES:
        raise ParameterError(f"unknown config key {key!r}")
    return _coerce(key, str(value)) if isinstance(value, str) else value


def parse_config(text, base=None):
    """Parse config text into a validated :class:`Config`."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ParameterError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split(sep, 1))
        if key not in _TYPES:
            raise ParameterError(f"config line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value)
    return replace(base or Config(), **values).validate()


def load_config(path):
    return parse_config(Path(path).read_text(encoding="utf-8"))


def format_config(config):
    lines = []
    for key, value in config.to_dict().items():
        if value is None:
            continue
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
