"""Temporal preprocessing: zero-phase FIR band-pass filtering and epoching."""
from dataclasses import dataclass, field

import numpy as np

from .exceptions import BoundsError, LengthError, ParameterError

TARGET = 1
NONTARGET = 0
CLASS_ORDER = (TARGET, NONTARGET)
LABEL_NAMES = {TARGET: "TARGET", NONTARGET: "NONTARGET"}

DEFAULT_TAPS = 513


@dataclass
class Recording:
    """Continuous multichannel EEG with stimulus events.

    Parameters
    ----------
    fs : float
        Sampling rate in Hz.
    data : ndarray, shape (n_channels, n_samples)
        Signal values.
    channel_names : list of str
        One name per channel.
    events : ndarray, shape (n_events, 2)
        Integer rows ``(sample_index, label)`` with label in {0, 1}, 1 = TARGET.
    subject_id : str
        Optional identifier carried through to reports.
    """

    fs: float
    data: np.ndarray
    channel_names: list
    events: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    subject_id: str = ""

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data))
        self.events = np.asarray(self.events, dtype=np.int64).reshape(-1, 2)
        self.channel_names = list(self.channel_names)
        if not self.fs > 0:
            raise ParameterError(f"fs must be positive, got {self.fs}")
        n_channels, n_samples = self.data.shape
        if n_channels < 1:
            raise ParameterError("recording needs at least one channel")
        if len(self.channel_names) != n_channels:
            raise ParameterError(
                f"{len(self.channel_names)} channel names for {n_channels} channels")
        if len(self.events):
            idx = self.events[:, 0]
            bad = np.flatnonzero((idx < 0) | (idx >= n_samples))
            if bad.size:
                raise ParameterError(f"event sample indices out of range at rows {bad.tolist()}")
            if not np.isin(self.events[:, 1], CLASS_ORDER).all():
                raise ParameterError("event labels must be 0 (NONTARGET) or 1 (TARGET)")

    @property
    def n_channels(self):
        return self.data.shape[0]

    @property
    def n_samples(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class FirKernel:
    taps: np.ndarray
    lo_hz: float
    hi_hz: float
    fs: float

    @property
    def n_taps(self):
        return len(self.taps)


@dataclass
class EpochSet:
    """Trials x channels x samples tensor with binary labels."""

    epochs: np.ndarray
    labels: np.ndarray
    fs: float
    tmin_s: float
    tmax_s: float

    def __post_init__(self):
        self.epochs = np.asarray(self.epochs, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.epochs.ndim != 3:
            raise ParameterError("epochs must be a 3-D array (trials, channels, samples)")
        if len(self.labels) != len(self.epochs):
            raise ParameterError("labels length must equal the number of trials")

    def __len__(self):
        return len(self.labels)

    def subset(self, index):
        index = np.asarray(index)
        return EpochSet(self.epochs[index], self.labels[index], self.fs, self.tmin_s, self.tmax_s)

    def class_counts(self):
        return {c: int(np.sum(self.labels == c)) for c in CLASS_ORDER}


def design_bandpass(fs, lo, hi, n_taps=DEFAULT_TAPS):
    """Windowed-sinc band-pass FIR with a Hamming window.

    The taps are the difference of two ideal low-pass responses, windowed and
    scaled to unit gain at the band center.
    """
    if n_taps < 3 or n_taps % 2 == 0:
        raise ParameterError(f"n_taps must be odd and >= 3, got {n_taps}")
    if not 0 < lo < hi < fs / 2:
        raise ParameterError(f"band edges must satisfy 0 < lo < hi < fs/2, got lo={lo}, hi={hi}, fs={fs}")
    n = np.arange(n_taps) - (n_taps - 1) / 2
    ideal = 2 * hi / fs * np.sinc(2 * hi / fs * n) - 2 * lo / fs * np.sinc(2 * lo / fs * n)
    taps = ideal * np.hamming(n_taps)
    taps = 0.5 * (taps + taps[::-1])
    center = 0.5 * (lo + hi)
    taps /= np.abs(frequency_response(taps, [center], fs)[0])
    return FirKernel(taps=taps, lo_hz=float(lo), hi_hz=float(hi), fs=float(fs))


def frequency_response(taps, freqs, fs):
    """Complex response ``H(f) = sum_k h[k] exp(-2j pi f k / fs)`` at ``freqs`` (Hz)."""
    taps = np.asarray(getattr(taps, "taps", taps), dtype=float)
    freqs = np.asarray(freqs, dtype=float)
    k = np.arange(len(taps))
    return np.exp(-2j * np.pi * np.outer(freqs, k) / fs) @ taps


def _fft_convolve(x, h):
    n = x.shape[-1] + len(h) - 1
    nfft = 1 << (n - 1).bit_length()
    out = np.fft.irfft(np.fft.rfft(x, nfft) * np.fft.rfft(h, nfft), nfft)
    return out[..., :n]


def filtfilt(rec, kernel):
    """Zero-phase filtering: forward then backward pass of ``kernel`` on every channel.

    Channels are reflect-padded by ``n_taps - 1`` samples on both sides before
    filtering. The effective response is ``|H(f)|**2`` with zero phase.
    """
    if not np.isclose(kernel.fs, rec.fs):
        raise ParameterError(f"kernel designed for {kernel.fs} Hz, recording is {rec.fs} Hz")
    n_taps = kernel.n_taps
    if rec.n_samples <= 3 * n_taps:
        raise LengthError(
            f"recording has {rec.n_samples} samples, needs more than {3 * n_taps} for {n_taps} taps")
    data = np.asarray(rec.data, dtype=float)
    pad = n_taps - 1
    padded = np.pad(data, ((0, 0), (pad, pad)), mode="reflect")
    # forward and time-reversed passes combined into one symmetric response
    h = np.asarray(kernel.taps, dtype=float)
    double = np.convolve(h, h[::-1])
    full = _fft_convolve(padded, double)
    start = pad + n_taps - 1
    out = full[:, start:start + rec.n_samples]
    return Recording(rec.fs, out, rec.channel_names, rec.events.copy(), rec.subject_id)


def _round_half_up(x):
    return int(np.floor(x + 0.5))


def epoch_bounds(fs, tmin_s, tmax_s):
    """Sample offsets ``(start, stop)`` of the half-open epoch window."""
    return _round_half_up(tmin_s * fs), _round_half_up(tmax_s * fs)


def extract_epochs(rec, tmin_s, tmax_s):
    """Cut ``data[:, e + start : e + stop]`` around every event, in event order."""
    if not tmin_s < tmax_s:
        raise ParameterError(f"tmin_s ({tmin_s}) must be below tmax_s ({tmax_s})")
    start, stop = epoch_bounds(rec.fs, tmin_s, tmax_s)
    if stop <= start:
        raise ParameterError("epoch window is shorter than one sample")
    samples = rec.events[:, 0]
    bad = np.flatnonzero((samples + start < 0) | (samples + stop > rec.n_samples))
    if bad.size:
        raise BoundsError(
            f"{bad.size} event window(s) exceed the recording bounds: events {bad.tolist()}",
            offending=bad.tolist())
    offsets = samples[:, None] + np.arange(start, stop)[None, :]
    epochs = np.asarray(rec.data, dtype=float)[:, offsets].transpose(1, 0, 2)
    return EpochSet(epochs, rec.events[:, 1].copy(), rec.fs, tmin_s, tmax_s)
