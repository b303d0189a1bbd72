"""Command-line front end: ``label``, ``split``, ``stats`` and ``eval`` verbs.

Every tuning flag can also come from a JSON config file (``--config``);
explicit flags win over the config, which wins over built-in defaults.
Exit status is 0 for runs that finish (skipped frames included) and 2 for
structural errors such as an unusable manifest or an empty evaluation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .evaluate import (
    EvaluationError,
    PupilPrediction,
    accuracy_report,
    parse_ground_truth_file,
    render_report,
    summary_to_dict,
)
from .labeler import (
    CannotSplitError,
    DEFAULT_STRIDE,
    DEFAULT_TRAIN_FRACTION,
    LabelConfig,
    ManifestError,
    STATUS_OK,
    read_labels_file,
    resolve_corpus,
    run_label,
    split_dataset,
    stats_report,
    write_labels_file,
)

DEFAULTS = {
    "stride": DEFAULT_STRIDE,
    "offset": 5,
    "tau": 2.0,
    "tau_head": 2.0,
    "seed": 0,
    "workers": 1,
    "annotate_dir": None,
    "train_fraction": DEFAULT_TRAIN_FRACTION,
    "positive_sign": "left",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gazekit",
                                     description="Pupil localization and gaze-region labeling.")
    sub = parser.add_subparsers(dest="verb", required=True)

    label = sub.add_parser("label", help="label a corpus of face frames")
    label.add_argument("corpus", help="manifest JSON, or a corpus directory")
    label.add_argument("--out", required=True, help="output directory")
    label.add_argument("--stride", type=int)
    label.add_argument("--offset", type=int)
    label.add_argument("--tau", type=float)
    label.add_argument("--tau-head", dest="tau_head", type=float)
    label.add_argument("--workers", type=int)
    label.add_argument("--annotate-dir", dest="annotate_dir")
    label.add_argument("--config")

    split = sub.add_parser("split", help="split labels into train/validation by subject")
    split.add_argument("labels", help="labels file from `label`")
    split.add_argument("--out-dir", required=True)
    split.add_argument("--train-fraction", dest="train_fraction", type=float)
    split.add_argument("--seed", type=int)
    split.add_argument("--config")

    stats = sub.add_parser("stats", help="per-class counts of one or more label files")
    stats.add_argument("labels", nargs="+")
    stats.add_argument("--out", help="also write the CSV table here")
    stats.add_argument("--config")

    ev = sub.add_parser("eval", help="evaluate labels against ground-truth pupil centers")
    ev.add_argument("labels")
    ev.add_argument("truth")
    ev.add_argument("--out-dir")
    ev.add_argument("--positive-sign", dest="positive_sign", choices=("left", "right"))
    ev.add_argument("--config")
    return parser


def _resolve(args: argparse.Namespace, key: str):
    """Flag value if given, else config file value, else default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    config_path = getattr(args, "config", None)
    if config_path:
        doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
        if key in doc:
            return doc[key]
    return DEFAULTS[key]


def _cmd_label(args) -> int:
    annotate = _resolve(args, "annotate_dir")
    config = LabelConfig(
        stride=int(_resolve(args, "stride")),
        offset=int(_resolve(args, "offset")),
        tau=float(_resolve(args, "tau")),
        tau_head=float(_resolve(args, "tau_head")),
        workers=int(_resolve(args, "workers")),
        annotate_dir=Path(annotate) if annotate else None,
    )
    manifest = resolve_corpus(args.corpus)
    records = run_label(manifest, config, args.out)
    skipped = sum(1 for r in records if r.status != STATUS_OK)
    print(f"labeled {len(records) - skipped} frames, skipped {skipped} "
          f"-> {Path(args.out) / 'labels.csv'}")
    return 0


def _cmd_split(args) -> int:
    records = read_labels_file(args.labels)
    train, val = split_dataset(records,
                               train_fraction=float(_resolve(args, "train_fraction")),
                               seed=int(_resolve(args, "seed")))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_labels_file(out / "train_labels.csv", train)
    write_labels_file(out / "val_labels.csv", val)
    train_subjects = len({r.subject_id for r in train})
    val_subjects = len({r.subject_id for r in val})
    print(f"train: {train_subjects} subjects / {len(train)} frames; "
          f"validation: {val_subjects} subjects / {len(val)} frames")
    return 0


def _cmd_stats(args) -> int:
    named = [(Path(p).stem, read_labels_file(p)) for p in args.labels]
    table = stats_report(named)
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return 0


def _predictions_from_labels(path: str, composite_ids: bool) -> list[PupilPrediction]:
    """Turn label records into predictions keyed the way the truth file is.

    Truth files may key frames either by ``subject/frame`` composites or by
    bare frame ids; bare ids are only usable when they are unique corpus-wide.
    """
    records = read_labels_file(path)
    if not composite_ids:
        bare = [r.frame_id for r in records]
        if len(set(bare)) != len(bare):
            raise EvaluationError("bare frame ids are ambiguous across subjects; "
                                  "use subject/frame composite ids in the truth file")
    preds = []
    for rec in records:
        key = f"{rec.subject_id}/{rec.frame_id}" if composite_ids else rec.frame_id
        region = rec.gaze if rec.status == STATUS_OK else None
        preds.append(PupilPrediction(frame_id=key, left=rec.left_pupil,
                                     right=rec.right_pupil, region=region,
                                     skip_reason=rec.reason))
    return preds


def _cmd_eval(args) -> int:
    truths = parse_ground_truth_file(Path(args.truth).read_bytes())
    composite = any("/" in t.frame_id for t in truths)
    preds = _predictions_from_labels(args.labels, composite)
    summary = accuracy_report(preds, truths,
                              positive_is_left=_resolve(args, "positive_sign") == "left")
    report = render_report(summary)
    sys.stdout.write(report)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "eval_summary.txt").write_text(report, encoding="utf-8")
        (out / "eval_summary.json").write_text(
            json.dumps(summary_to_dict(summary), indent=2) + "\n", encoding="utf-8")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    commands = {"label": _cmd_label, "split": _cmd_split,
                "stats": _cmd_stats, "eval": _cmd_eval}
    try:
        return commands[args.verb](args)
    except (ManifestError, CannotSplitError, EvaluationError, ValueError, OSError) as exc:
        print(f"gazekit {args.verb}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
