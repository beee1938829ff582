import json
import os

import numpy as np
import pytest

from erpqk.dataset import (
    SynthParams,
    evoked_waveform,
    find_subjects,
    load_subject,
    save_subject,
    synth_generate,
)
from erpqk.dsp import NONTARGET, TARGET, Recording, extract_epochs
from erpqk.exceptions import LoadError, ParameterError


def write_raw(path, signal_bytes, n_channels, events="sample,label\n0,1\n"):
    path.mkdir()
    (path / "meta.json").write_text(json.dumps({"fs": 128.0, "n_channels": n_channels}))
    (path / "signal.f32").write_bytes(signal_bytes)
    (path / "events.csv").write_text(events)


def test_channel_major_layout(tmp_path):
    values = np.arange(8, dtype="<f4")
    write_raw(tmp_path / "s", values.tobytes(), 2)
    rec = load_subject(tmp_path / "s")
    assert len(values.tobytes()) == 32
    np.testing.assert_array_equal(rec.data, [[0, 1, 2, 3], [4, 5, 6, 7]])
    assert rec.data.dtype == np.float32
    assert rec.channel_names == ["ch00", "ch01"]


def test_bad_signal_length(tmp_path):
    write_raw(tmp_path / "s", np.zeros(7, dtype="<f4").tobytes(), 2)
    with pytest.raises(LoadError, match="signal.f32.*offset 24"):
        load_subject(tmp_path / "s")


@pytest.mark.parametrize("events,match", [
    ("sample,label\n0,1\n9,0\n", "line 3"),
    ("sample,label\n0,2\n", "label 2"),
    ("sample,label\nx,1\n", "line 2"),
    ("time,label\n0,1\n", "header"),
])
def test_bad_events(tmp_path, events, match):
    write_raw(tmp_path / "s", np.zeros(8, dtype="<f4").tobytes(), 2, events)
    with pytest.raises(LoadError, match=match):
        load_subject(tmp_path / "s")


def test_missing_file(tmp_path):
    (tmp_path / "s").mkdir()
    with pytest.raises(LoadError, match="missing"):
        load_subject(tmp_path / "s")


def test_events_sorted_on_load(tmp_path):
    write_raw(tmp_path / "s", np.zeros(8, dtype="<f4").tobytes(), 2, "sample,label\n3,0\n1,1\n")
    np.testing.assert_array_equal(load_subject(tmp_path / "s").events, [[1, 1], [3, 0]])


def test_roundtrip_bit_exact(tmp_path, rng):
    data = rng.normal(size=(3, 500)).astype(np.float32)
    rec = Recording(250.0, data, ["Fz", "Cz", "Pz"], np.array([[10, 1], [200, 0]]), "subj")
    save_subject(rec, tmp_path / "subj")
    back = load_subject(tmp_path / "subj")
    assert back.data.tobytes() == data.tobytes()
    assert back.fs == 250.0 and back.channel_names == ["Fz", "Cz", "Pz"] and back.subject_id == "subj"
    np.testing.assert_array_equal(back.events, rec.events)


def test_save_overwrites_existing(tmp_path, rng):
    rec = Recording(128.0, np.zeros((1, 10), np.float32), ["a"], np.array([[1, 1]]))
    save_subject(rec, tmp_path / "s")
    rec2 = Recording(128.0, np.ones((1, 10), np.float32), ["a"], np.array([[2, 0]]))
    save_subject(rec2, tmp_path / "s")
    np.testing.assert_array_equal(load_subject(tmp_path / "s").data, 1.0)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["s"]


def test_interrupted_save_leaves_nothing(tmp_path, monkeypatch):
    rec = Recording(128.0, np.zeros((1, 10), np.float32), ["a"], np.array([[1, 1]]))

    def fail(*args):
        raise OSError("disk full")

    monkeypatch.setattr(os, "rename", fail)
    with pytest.raises(OSError):
        save_subject(rec, tmp_path / "s")
    assert list(tmp_path.iterdir()) == []


def test_channel_name_mismatch_refused_before_write(tmp_path):
    rec = Recording(128.0, np.zeros((2, 10), np.float32), ["a", "b"])
    rec.channel_names = ["a"]
    with pytest.raises(ParameterError):
        save_subject(rec, tmp_path / "s")
    assert list(tmp_path.iterdir()) == []


def test_find_subjects(tmp_path):
    rec = Recording(128.0, np.zeros((1, 10), np.float32), ["a"])
    save_subject(rec, tmp_path / "b")
    save_subject(rec, tmp_path / "a")
    (tmp_path / "junk").mkdir()
    assert [p.name for p in find_subjects(tmp_path)] == ["a", "b"]
    assert find_subjects(tmp_path / "a") == [tmp_path / "a"]
    with pytest.raises(LoadError):
        find_subjects(tmp_path / "junk")


def test_synth_deterministic_and_counts():
    a = synth_generate(SynthParams(seed=4))
    b = synth_generate(SynthParams(seed=4))
    assert a.data.tobytes() == b.data.tobytes()
    np.testing.assert_array_equal(a.events, b.events)
    assert np.sum(a.events[:, 1] == TARGET) == 128 and np.sum(a.events[:, 1] == NONTARGET) == 640
    assert not np.array_equal(a.data, synth_generate(SynthParams(seed=5)).data)
    extract_epochs(a, 0.1, 0.7)


def test_synth_evoked_peak_latency():
    p = SynthParams(snr=2.0, seed=1)
    rec = synth_generate(p)
    ep = extract_epochs(rec, 0.0, 0.8)
    diff = ep.epochs[ep.labels == TARGET].mean(axis=0) - ep.epochs[ep.labels == NONTARGET].mean(axis=0)
    ch = int(np.argmax(p.resolved_mixing()))
    peak_ms = 1000 * np.argmax(np.abs(diff[ch])) / p.fs
    assert 240 <= peak_ms <= 360


def test_synth_params_validation():
    for bad in (dict(snr=-1.0), dict(n_target=0), dict(noise="brown"), dict(peak_latency_s=0.0),
                dict(mixing=[1.0, 2.0]), dict(duration_s=1.0)):
        with pytest.raises(ParameterError):
            synth_generate(SynthParams(**bad))


def test_waveform_shape():
    p = SynthParams()
    w = evoked_waveform(p, 128)
    assert np.argmax(w) == round(p.peak_latency_s * p.fs) and w.max() <= 1.0
    assert p.to_dict()["mixing"] == p.resolved_mixing().tolist()
