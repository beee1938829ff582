import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from erpqk import quantum
from erpqk.cli import main


@pytest.fixture(scope="module")
def subject(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "s1"
    assert main(["synth", "--out", str(path), "--seed", "0"]) == 0
    return path


def load_report(path):
    return json.loads(path.read_text())


def schema():
    return json.loads(resources.files("erpqk").joinpath("schemas/cv_report.schema.json").read_text())


def test_synth_deterministic(tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path / "a"), "--seed", "7"]) == 0
    params = json.loads(capsys.readouterr().out)
    assert params["seed"] == 7 and params["n_target"] == 128
    assert main(["synth", "--out", str(tmp_path / "b"), "--seed", "7"]) == 0
    for name in ("signal.f32", "events.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = (tmp_path / "a" / "events.csv").read_text().splitlines()
    assert rows[0] == "sample,label" and len(rows) - 1 == 768


def test_synth_negative_snr(tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path / "x"), "--snr", "-1"]) == 1
    assert "--snr" in capsys.readouterr().err
    assert not (tmp_path / "x").exists()


def test_run_mdm(subject, tmp_path):
    report = tmp_path / "r.json"
    assert main(["run", "--data-dir", str(subject), "--classifier", "mdm", "--report", str(report)]) == 0
    doc = load_report(report)
    jsonschema.validate(doc, schema())
    (rep,) = doc["reports"]
    assert len(rep["per_fold"]) == 5
    assert rep["aggregate"]["test_ba"]["mean"] >= 0.85
    assert rep["config_echo"]["classifier"] == "mdm" and rep["seed"] == 0
    csv_lines = (tmp_path / "r.folds.csv").read_text().splitlines()
    assert csv_lines[0] == "fold,split,ba,f1,fit_s,predict_s" and len(csv_lines) == 11


def test_run_qsvc_small_sample_overfits(subject, tmp_path):
    report = tmp_path / "q.json"
    assert main(["run", "--data-dir", str(subject), "--classifier", "qsvc", "--backend", "exact",
                 "--subsample", "64", "--report", str(report)]) == 0
    doc = load_report(report)
    jsonschema.validate(doc, schema())
    agg = doc["reports"][0]["aggregate"]
    assert agg["train_ba"]["mean"] > agg["test_ba"]["mean"]
    assert sum(doc["reports"][0]["n_epochs"].values()) == 64


def test_run_config_file_and_overrides(subject, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"data_dir = {subject}\nclassifier = svc\nfolds = 3\n")
    report = tmp_path / "r.json"
    assert main(["run", "--config", str(cfg), "--folds", "4", "--no-timings", "--report", str(report)]) == 0
    rep = load_report(report)["reports"][0]
    assert rep["config_echo"]["classifier"] == "svc" and rep["config_echo"]["folds"] == 4
    assert all(f["fit_seconds"] is None for f in rep["per_fold"])


def test_report_command(subject, tmp_path, capsys):
    report = tmp_path / "r.json"
    main(["run", "--data-dir", str(subject), "--classifier", "mdm", "--report", str(report)])
    capsys.readouterr()
    assert main(["report", str(report), "--csv", str(tmp_path / "x.csv")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("subject") and out[1].split("\t")[1] == "mdm"
    assert (tmp_path / "x.csv").exists()


@pytest.mark.parametrize("argv", [
    ["run", "--classifier", "foo"],
    ["run", "--shots", "lots"],
    ["run", "--folds", "1", "--data-dir", "x"],
    ["run", "--bogus-flag"],
    [],
    ["kernel", "--input", "x.csv"],
])
def test_usage_errors_exit_1(argv):
    assert main(argv) == 1


def test_runtime_errors_exit_2(tmp_path, subject, monkeypatch):
    # missing data directory
    assert main(["run", "--data-dir", str(tmp_path / "nope")]) == 2
    # unreadable report
    assert main(["report", str(tmp_path / "nope.json")]) == 2
    # corrupt signal file
    bad = tmp_path / "bad"
    bad.mkdir()
    for name in ("meta.json", "events.csv"):
        (bad / name).write_bytes((subject / name).read_bytes())
    (bad / "signal.f32").write_bytes(b"\0" * 7)
    assert main(["run", "--data-dir", str(bad), "--classifier", "mdm"]) == 2
    # a failing fold
    from erpqk import evaluation

    def broken(*a, **k):
        raise FloatingPointError("boom")

    monkeypatch.setattr(evaluation, "geometric_mean", broken)
    assert main(["run", "--data-dir", str(subject), "--classifier", "svc",
                 "--report", str(tmp_path / "f.json")]) == 2
    folds = load_report(tmp_path / "f.json")["reports"][0]["per_fold"]
    assert all(f["error"]["stage"] == "reference_mean" for f in folds)


def write_vectors(path, X, header=True):
    lines = [",".join(f"x{i}" for i in range(X.shape[1]))] if header else []
    lines += [",".join(repr(float(v)) for v in row) for row in X]
    path.write_text("\n".join(lines) + "\n")


def test_kernel_command(tmp_path, rng):
    X = rng.uniform(0, np.pi, (8, 3))
    write_vectors(tmp_path / "x.csv", X)
    assert main(["kernel", "--input", str(tmp_path / "x.csv"), "--out", str(tmp_path / "k.csv")]) == 0
    K = quantum.read_gram_csv(tmp_path / "k.csv")
    np.testing.assert_array_equal(np.diag(K), 1.0)
    np.testing.assert_array_equal(K, quantum.gram(X).values)

    args = ["kernel", "--input", str(tmp_path / "x.csv"), "--backend", "shots", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "s1.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "s2.csv")]) == 0
    assert (tmp_path / "s1.csv").read_bytes() == (tmp_path / "s2.csv").read_bytes()
    np.testing.assert_array_equal(quantum.read_gram_csv(tmp_path / "s1.csv"),
                                  quantum.gram(X, mode="shots", shots=1024, seed=3).values)

    Y = rng.uniform(0, np.pi, (2, 3))
    write_vectors(tmp_path / "y.csv", Y, header=False)
    assert main(["kernel", "--input", str(tmp_path / "x.csv"), "--against", str(tmp_path / "y.csv"),
                 "--out", str(tmp_path / "r.csv")]) == 0
    assert quantum.read_gram_csv(tmp_path / "r.csv").shape == (8, 2)

    assert main(args + ["--enforce-spd", "--out", str(tmp_path / "e.csv")]) == 0
    assert np.linalg.eigvalsh(quantum.read_gram_csv(tmp_path / "e.csv")).min() > -1e-12


def test_kernel_bad_inputs(tmp_path):
    (tmp_path / "ragged.csv").write_text("1,2,3\n4,5\n")
    assert main(["kernel", "--input", str(tmp_path / "ragged.csv"), "--out", str(tmp_path / "k.csv")]) == 1
    assert not (tmp_path / "k.csv").exists()
    (tmp_path / "ok.csv").write_text("1,2\n3,4\n")
    for flag in (["--shots", "0"], ["--reps", "0"], ["--seed", "-2"]):
        assert main(["kernel", "--input", str(tmp_path / "ok.csv"), "--out", str(tmp_path / "k.csv")]
                    + flag) == 1
