"""Subject directory format and a synthetic P300 generator.

A subject directory holds three files:

``meta.json``
    UTF-8 JSON object with ``fs``, ``n_channels``, ``channel_names`` and ``subject_id``.
``signal.f32``
    Little-endian float32 samples, channel-major (all of channel 0, then channel 1, ...).
``events.csv``
    Header ``sample,label`` then one row per stimulus; label 1 = TARGET, 0 = NONTARGET.
"""
import csv
import json
import os
import shutil
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .dsp import NONTARGET, TARGET, Recording
from .exceptions import LoadError, ParameterError

META_FILE = "meta.json"
SIGNAL_FILE = "signal.f32"
EVENTS_FILE = "events.csv"

# silence before the first and after the last stimulus
_LEAD_S = 2.0
_TAIL_S = 2.0


def load_subject(path):
    """Read a subject directory into a :class:`Recording` (events sorted by sample)."""
    path = Path(path)
    for name in (META_FILE, SIGNAL_FILE, EVENTS_FILE):
        if not (path / name).is_file():
            raise LoadError(f"{path / name}: missing file")
    try:
        meta = json.loads((path / META_FILE).read_text(encoding="utf-8"))
        fs = float(meta["fs"])
        n_channels = int(meta["n_channels"])
        names = [str(n) for n in meta.get("channel_names") or [f"ch{i:02d}" for i in range(n_channels)]]
    except (ValueError, KeyError, TypeError) as exc:
        raise LoadError(f"{path / META_FILE}: invalid metadata ({exc})") from None
    if n_channels < 1 or len(names) != n_channels:
        raise LoadError(f"{path / META_FILE}: n_channels={n_channels} but {len(names)} channel names")

    raw = (path / SIGNAL_FILE).read_bytes()
    if len(raw) % (4 * n_channels):
        raise LoadError(
            f"{path / SIGNAL_FILE}: {len(raw)} bytes is not a multiple of 4 * n_channels = {4 * n_channels} "
            f"(trailing {len(raw) % (4 * n_channels)} bytes at offset {len(raw) - len(raw) % (4 * n_channels)})")
    data = np.frombuffer(raw, dtype="<f4").reshape(n_channels, -1).astype(np.float32)
    n_samples = data.shape[1]

    events = []
    with open(path / EVENTS_FILE, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["sample", "label"]:
            raise LoadError(f"{path / EVENTS_FILE}: header must be 'sample,label'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                sample, label = int(row[0]), int(row[1])
            except (ValueError, IndexError):
                raise LoadError(f"{path / EVENTS_FILE} line {lineno}: malformed row {row!r}") from None
            if not 0 <= sample < n_samples:
                raise LoadError(
                    f"{path / EVENTS_FILE} line {lineno}: sample {sample} outside [0, {n_samples})")
            if label not in (TARGET, NONTARGET):
                raise LoadError(f"{path / EVENTS_FILE} line {lineno}: label {label} not in {{0, 1}}")
            events.append((sample, label))
    events = np.array(sorted(events, key=lambda e: e[0]), dtype=np.int64).reshape(-1, 2)
    return Recording(fs, data, names, events, str(meta.get("subject_id", path.name)))


def save_subject(rec, path, subject_id=None):
    """Write ``rec`` as a subject directory.

    Files go to a temporary sibling directory that is renamed into place, so
    an interrupted save never leaves a partial subject directory behind.
    """
    path = Path(path)
    data = np.asarray(rec.data)
    if data.ndim != 2 or len(rec.channel_names) != data.shape[0]:
        raise ParameterError(
            f"{len(rec.channel_names)} channel names for {data.shape[0] if data.ndim == 2 else '?'} channels")
    events = np.asarray(rec.events, dtype=np.int64).reshape(-1, 2)
    if len(events) and (events[:, 0].min() < 0 or events[:, 0].max() >= data.shape[1]):
        raise ParameterError("event sample indices out of range")
    if subject_id is None:
        subject_id = rec.subject_id or path.name
    meta = {"fs": float(rec.fs), "n_channels": int(data.shape[0]),
            "channel_names": list(rec.channel_names), "subject_id": str(subject_id)}

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{path.name}.tmp-", dir=path.parent))
    try:
        (tmp / META_FILE).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        (tmp / SIGNAL_FILE).write_bytes(np.ascontiguousarray(data, dtype="<f4").tobytes())
        with open(tmp / EVENTS_FILE, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["sample", "label"])
            writer.writerows(events.tolist())
        if path.exists():
            old = Path(tempfile.mkdtemp(prefix=f".{path.name}.old-", dir=path.parent))
            os.rename(path, old / "d")
            os.rename(tmp, path)
            shutil.rmtree(old, ignore_errors=True)
        else:
            os.rename(tmp, path)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def is_subject_dir(path):
    return (Path(path) / META_FILE).is_file()


def find_subjects(path):
    """``path`` itself if it is a subject directory, else its subject subdirectories (sorted)."""
    path = Path(path)
    if is_subject_dir(path):
        return [path]
    if not path.is_dir():
        raise LoadError(f"{path}: not a directory")
    subjects = sorted(p for p in path.iterdir() if p.is_dir() and is_subject_dir(p))
    if not subjects:
        raise LoadError(f"{path}: no subject directories found")
    return subjects


@dataclass
class SynthParams:
    """Parameters of the synthetic oddball recording.

    ``snr`` is the peak amplitude of the evoked response on the
    strongest channel relative to the unit noise standard deviation.
    ``peak_width_s`` is the standard deviation of the Gaussian bump.
    """

    n_channels: int = 16
    fs: float = 128.0
    n_target: int = 128
    n_nontarget: int = 640
    peak_latency_s: float = 0.3
    peak_width_s: float = 0.1
    snr: float = 2.0
    mixing: Optional[list] = None
    noise: str = "pink"
    seed: int = 0
    isi_s: float = 1.0
    isi_jitter_s: float = 0.25
    amp_jitter: float = 0.0
    duration_s: Optional[float] = None
    channel_names: list = field(default_factory=list)

    def validate(self):
        if self.n_channels < 1:
            raise ParameterError("n_channels must be >= 1")
        if not self.fs > 0:
            raise ParameterError("fs must be positive")
        if self.n_target < 1 or self.n_nontarget < 1:
            raise ParameterError("n_target and n_nontarget must be positive")
        if not self.peak_latency_s > 0:
            raise ParameterError("peak_latency_s must be positive")
        if not self.peak_width_s > 0:
            raise ParameterError("peak_width_s must be positive")
        if not self.snr >= 0:
            raise ParameterError(f"snr must be >= 0, got {self.snr}")
        if self.noise not in ("white", "pink"):
            raise ParameterError(f"noise must be 'white' or 'pink', got {self.noise!r}")
        if not self.isi_s > 0 or self.isi_jitter_s < 0:
            raise ParameterError("isi_s must be positive and isi_jitter_s non-negative")
        if self.amp_jitter < 0:
            raise ParameterError("amp_jitter must be >= 0")
        if self.mixing is not None and len(self.mixing) != self.n_channels:
            raise ParameterError(f"mixing has {len(self.mixing)} entries for {self.n_channels} channels")
        if self.channel_names and len(self.channel_names) != self.n_channels:
            raise ParameterError("channel_names length must equal n_channels")
        if self.seed < 0:
            raise ParameterError("seed must be non-negative")
        return self

    def resolved_mixing(self):
        if self.mixing is not None:
            return np.asarray(self.mixing, dtype=float)
        c = np.arange(self.n_channels)
        center = 0.75 * (self.n_channels - 1)
        spread = max(self.n_channels / 4.0, 1.0)
        pattern = np.exp(-0.5 * ((c - center) / spread) ** 2)
        return pattern / pattern.max()

    def to_dict(self):
        out = asdict(self)
        out["mixing"] = self.resolved_mixing().tolist()
        out["channel_names"] = self.channel_names or [f"ch{i:02d}" for i in range(self.n_channels)]
        return out


def _noise(rng, kind, n_channels, n_samples):
    white = rng.standard_normal((n_channels, n_samples))
    if kind == "pink":
        spec = np.fft.rfft(white, axis=1)
        freqs = np.fft.rfftfreq(n_samples)
        scale = np.zeros_like(freqs)
        scale[1:] = 1.0 / np.sqrt(freqs[1:])
        white = np.fft.irfft(spec * scale, n_samples, axis=1)
    white -= white.mean(axis=1, keepdims=True)
    return white / white.std(axis=1, keepdims=True)


def evoked_waveform(params, n_samples=None):
    """Gaussian bump ``exp(-(t - latency)^2 / (2 width^2))`` sampled from stimulus onset."""
    if n_samples is None:
        n_samples = int(np.ceil((params.peak_latency_s + 5 * params.peak_width_s) * params.fs)) + 1
    t = np.arange(n_samples) / params.fs
    return np.exp(-0.5 * ((t - params.peak_latency_s) / params.peak_width_s) ** 2)


def synth_generate(params=None):
    """Synthetic oddball recording; a pure function of ``params`` (seed included).

    Unit-variance white or 1/f noise on every channel; every TARGET onset gets
    ``snr * bump(t) * mixing`` added. Stimuli are spaced ``isi_s`` plus a
    uniform jitter apart, in a seeded random TARGET/NONTARGET order.
    """
    params = (params or SynthParams()).validate()
    rng = np.random.default_rng(params.seed)
    fs = params.fs
    labels = np.r_[np.full(params.n_target, TARGET), np.full(params.n_nontarget, NONTARGET)]
    labels = rng.permutation(labels)
    gaps = params.isi_s + rng.uniform(0.0, params.isi_jitter_s, len(labels))
    gaps_samples = np.round(gaps * fs).astype(np.int64)
    lead = int(round(_LEAD_S * fs))
    onsets = lead + np.r_[0, np.cumsum(gaps_samples[:-1])]
    waveform = evoked_waveform(params)
    needed = int(onsets[-1] + max(len(waveform), round(_TAIL_S * fs)))
    if params.duration_s is None:
        n_samples = needed
    else:
        n_samples = int(round(params.duration_s * fs))
        if n_samples < needed:
            raise ParameterError(
                f"duration_s={params.duration_s} holds {n_samples} samples, {needed} are needed "
                "to place all events")

    data = _noise(rng, params.noise, params.n_channels, n_samples)
    mixing = params.resolved_mixing()
    amps = params.snr * (1.0 + params.amp_jitter * rng.standard_normal(len(labels)))
    for onset, label, amp in zip(onsets, labels, amps):
        if label == TARGET:
            data[:, onset:onset + len(waveform)] += amp * mixing[:, None] * waveform[None, :]
    names = params.channel_names or [f"ch{i:02d}" for i in range(params.n_channels)]
    events = np.column_stack([onsets, labels]).astype(np.int64)
    return Recording(fs, data, names, events, f"synth-{params.seed}")
