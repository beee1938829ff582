"""Command-line interface: ``erpqk {synth,run,kernel,report}``.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""
import argparse
import csv
import json
import logging
import os
import sys
import tempfile
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import quantum
from .config import BACKENDS, CLASSIFIERS, Config, coerce_value, load_config
from .dataset import SynthParams, save_subject, synth_generate
from .evaluation import report_document, resolve_threads, run_pipeline
from .exceptions import ErpqkError, ParameterError, StageError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

FOLD_CSV_HEADER = ["fold", "split", "ba", "f1", "fit_s", "predict_s"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(doc):
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------- synth

def cmd_synth(args):
    if args.snr < 0:
        raise UsageError("--snr must be >= 0")
    params = SynthParams(n_channels=args.n_channels, fs=args.fs, n_target=args.n_target,
                         n_nontarget=args.n_nontarget, peak_latency_s=args.latency,
                         peak_width_s=args.width, snr=args.snr, noise=args.noise, seed=args.seed,
                         isi_s=args.isi, amp_jitter=args.amp_jitter)
    try:
        params.validate()
    except ParameterError as exc:
        raise UsageError(str(exc)) from None
    rec = synth_generate(params)
    save_subject(rec, args.out, subject_id=args.subject_id or Path(args.out).name)
    sys.stdout.write(_dump(params.to_dict()))
    return EXIT_OK


# ---------------------------------------------------------------- run

def _fold_rows(report):
    rows = []
    for r in report["per_fold"]:
        for split in ("train", "test"):
            rows.append([r["fold"], split, r[f"{split}_ba"], r[f"{split}_f1"],
                         r["fit_seconds"], r["predict_seconds"]])
    return rows


def _csv_text(rows):
    lines = [",".join(FOLD_CSV_HEADER)]
    for row in rows:
        lines.append(",".join("" if v is None else repr(v) if isinstance(v, float) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


def write_fold_csvs(doc, path):
    """One CSV per subject; with several subjects the subject id is added to the file name."""
    path = Path(path)
    reports = doc["reports"]
    written = []
    for report in reports:
        target = path if len(reports) == 1 else path.with_name(
            f"{path.stem}.{report['subject_id']}{path.suffix or '.csv'}")
        _atomic_write(target, _csv_text(_fold_rows(report)))
        written.append(target)
    return written


def _config_from_args(args):
    config = load_config(args.config) if args.config else Config()
    overrides = {}
    for f in fields(Config):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = coerce_value(f.name, value)
    if args.no_timings:
        overrides["timings"] = False
    return config.updated(**overrides)


def cmd_run(args):
    try:
        config = _config_from_args(args)
    except (ParameterError, OSError) as exc:
        raise UsageError(str(exc)) from None
    threads = resolve_threads(args.threads)
    try:
        reports = run_pipeline(config, threads=threads)
    except StageError as exc:
        print(f"error: stage {exc.stage} failed: {exc.cause}", file=sys.stderr)
        return EXIT_RUNTIME
    except ErpqkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    doc = report_document(reports)
    text = _dump(doc)
    if args.report:
        _atomic_write(args.report, text)
    else:
        sys.stdout.write(text)
    csv_path = args.csv or (Path(args.report).with_suffix(".folds.csv") if args.report else None)
    if csv_path:
        write_fold_csvs(doc, csv_path)
    failed = [(r.subject_id, f) for r in reports for f in r.failed_folds]
    for subject, fold in failed:
        print(f"error: subject {subject} fold {fold['fold']} failed in stage "
              f"{fold['error']['stage']}: {fold['error']['message']}", file=sys.stderr)
    return EXIT_RUNTIME if failed else EXIT_OK


# ---------------------------------------------------------------- kernel

def read_vectors_csv(path):
    """Numeric CSV, one vector per row; a non-numeric first row is taken as a header."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise UsageError(f"{path}: no rows")
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        rows = rows[1:]
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise UsageError(f"{path}: ragged CSV (row lengths {sorted(widths)})")
    try:
        data = np.array([[float(v) for v in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise UsageError(f"{path}: non-numeric value ({exc})") from None
    if data.shape[1] < 2:
        raise UsageError(f"{path}: vectors need at least 2 columns")
    return data


def cmd_kernel(args):
    if args.shots < 1 or args.reps < 1 or args.seed < 0:
        raise UsageError("--shots and --reps must be positive and --seed non-negative")
    X = read_vectors_csv(args.input)
    Y = read_vectors_csv(args.against) if args.against else None
    if Y is not None and Y.shape[1] != X.shape[1]:
        raise UsageError("--input and --against have different column counts")
    K = quantum.gram(X, Y, reps=args.reps, mode=args.backend, shots=args.shots, seed=args.seed)
    if args.enforce_spd:
        if Y is not None:
            raise UsageError("--enforce-spd applies to square training Grams only")
        K = quantum.enforce_spd(K)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{out.name}.", dir=out.parent)
    os.close(fd)
    try:
        quantum.write_gram_csv(tmp, K)
        os.replace(tmp, out)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    return EXIT_OK


# ---------------------------------------------------------------- report

def _fmt(summary, percent=True):
    if summary["mean"] is None:
        return "n/a"
    k = 100.0 if percent else 1.0
    return f"{summary['mean'] * k:.2f} ({summary['std'] * k:.2f})"


def cmd_report(args):
    try:
        doc = json.loads(Path(args.report).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        print(f"error: cannot read report: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if doc.get("format") != "erpqk-cv-report" or not isinstance(doc.get("reports"), list):
        print("error: not an erpqk cross-validation report", file=sys.stderr)
        return EXIT_RUNTIME
    out = sys.stdout
    out.write("subject\tclassifier\ttrain BA %\ttest BA %\ttest F1 %\tfit s\n")
    for report in doc["reports"]:
        agg = report["aggregate"]
        out.write("\t".join([report["subject_id"], report["config_echo"]["classifier"],
                             _fmt(agg["train_ba"]), _fmt(agg["test_ba"]), _fmt(agg["test_f1"]),
                             _fmt(agg["fit_seconds"], percent=False)]) + "\n")
    if args.csv:
        write_fold_csvs(doc, args.csv)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    parser = _Parser(prog="erpqk", description="P300 classification with Riemannian features "
                     "and a simulated quantum kernel SVM.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic subject directory")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snr", type=float, default=2.0)
    p.add_argument("--n-target", type=int, default=128)
    p.add_argument("--n-nontarget", type=int, default=640)
    p.add_argument("--n-channels", type=int, default=16)
    p.add_argument("--fs", type=float, default=128.0)
    p.add_argument("--noise", choices=("pink", "white"), default="pink")
    p.add_argument("--latency", type=float, default=0.3, help="evoked peak latency (s)")
    p.add_argument("--width", type=float, default=0.1, help="evoked peak width (s, Gaussian sd)")
    p.add_argument("--isi", type=float, default=1.0, help="minimum inter-stimulus interval (s)")
    p.add_argument("--amp-jitter", type=float, default=0.0)
    p.add_argument("--subject-id")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="cross-validate a classifier")
    p.add_argument("--config", help="flat key = value config file")
    for f in fields(Config):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "classifier":
            p.add_argument(flag, choices=CLASSIFIERS)
        elif f.name == "backend":
            p.add_argument(flag, choices=BACKENDS)
        else:
            p.add_argument(flag, dest=f.name)
    p.add_argument("--no-timings", action="store_true",
                   help="omit wall-clock timings (byte-reproducible reports)")
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.add_argument("--csv", help="per-fold CSV (default: <report>.folds.csv when --report is set)")
    p.add_argument("--threads", type=int, help="worker cap (default: $ERPQK_THREADS or 1)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("kernel", help="quantum kernel Gram matrix of CSV vectors")
    p.add_argument("--input", required=True)
    p.add_argument("--against", help="second vector set; output is input x against")
    p.add_argument("--out", required=True)
    p.add_argument("--backend", choices=BACKENDS, default="exact")
    p.add_argument("--shots", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=2)
    p.add_argument("--enforce-spd", action="store_true")
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("report", help="summarize a run report")
    p.add_argument("report")
    p.add_argument("--csv", help="also write the per-fold CSV")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except (ErpqkError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
