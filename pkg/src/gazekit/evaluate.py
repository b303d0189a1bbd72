"""Localization and region-classification evaluation.

The localization metric is the classic normalized error: the larger of the
two per-eye Euclidean distances between prediction and ground truth, divided
by the ground-truth interocular distance.  Accuracy is reported at the
standard thresholds (0.05, 0.10, 0.25) with closed inequalities, and frames
the pipeline skipped are counted and surfaced instead of silently dropped
from the denominator without trace.

Ground-truth files use one record per line: ``frame_id,lx,ly,rx,ry`` with an
optional sixth token that is either a region word (``Left``/``Right``/
``Center``) or an angular-label sign (``+``, ``-`` or ``0``) to be mapped to
a region.  The sign mapping direction is configurable; by default a positive
sign means the subject looks to their own left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gaze import RegionLabel

THRESHOLDS = (0.05, 0.10, 0.25)
CONFUSION_ORDER = (RegionLabel.CENTER, RegionLabel.LEFT, RegionLabel.RIGHT)


class EvaluationError(ValueError):
    """Raised for structural evaluation problems (no pairing, bad input)."""


@dataclass(frozen=True)
class GroundTruthRecord:
    """Reference pupil centers for one frame, plus an optional region."""

    frame_id: str
    left: tuple[float, float]
    right: tuple[float, float]
    region: RegionLabel | None = None
    sign: int | None = None

    def __post_init__(self):
        if self.left == self.right:
            raise EvaluationError(
                f"ground truth for {self.frame_id!r} has coincident eye centers")


@dataclass(frozen=True)
class PupilPrediction:
    """One frame's predicted centers; ``None`` centers mean a skipped frame."""

    frame_id: str
    left: tuple[float, float] | None
    right: tuple[float, float] | None
    region: RegionLabel | None = None
    skip_reason: str | None = None


@dataclass(frozen=True)
class EvalSummary:
    """Aggregated evaluation over one prediction/ground-truth pairing."""

    n: int
    accuracy_at: dict[float, float]
    mean_e: float | None
    region_accuracy: float | None
    confusion: np.ndarray | None
    skipped: dict[str, int] = field(default_factory=dict)


def normalized_error(pred_l: tuple[float, float], pred_r: tuple[float, float],
                     gt_l: tuple[float, float], gt_r: tuple[float, float]) -> float:
    """max per-eye distance to ground truth over the interocular distance."""
    interocular = math.dist(gt_l, gt_r)
    if interocular == 0.0:
        raise EvaluationError("ground-truth eye centers coincide")
    d_l = math.dist(pred_l, gt_l)
    d_r = math.dist(pred_r, gt_r)
    return max(d_l, d_r) / interocular


def map_angular_to_region(sign: int, positive_is_left: bool = True) -> RegionLabel:
    """Map the sign of an angular gaze label to a region.

    Zero always maps to Center; by the recorded default a positive sign maps
    to the subject's left and a negative one to their right.
    """
    if sign == 0:
        return RegionLabel.CENTER
    positive = RegionLabel.LEFT if positive_is_left else RegionLabel.RIGHT
    negative = RegionLabel.RIGHT if positive_is_left else RegionLabel.LEFT
    return positive if sign > 0 else negative


def region_accuracy(predicted: list[RegionLabel],
                    truth: list[RegionLabel]) -> tuple[float, np.ndarray]:
    """Exact-match fraction plus a 3x3 confusion matrix (rows = truth).

    Classes are ordered as ``CONFUSION_ORDER`` (Center, Left, Right).
    """
    if len(predicted) != len(truth):
        raise EvaluationError(
            f"length mismatch: {len(predicted)} predictions vs {len(truth)} truths")
    if not truth:
        raise EvaluationError("empty region sequences")
    index = {label: i for i, label in enumerate(CONFUSION_ORDER)}
    confusion = np.zeros((3, 3), dtype=np.int64)
    hits = 0
    for p, t in zip(predicted, truth):
        confusion[index[t], index[p]] += 1
        hits += p == t
    return hits / len(truth), confusion


def accuracy_report(predictions: list[PupilPrediction],
                    truths: list[GroundTruthRecord],
                    thresholds: tuple[float, ...] = THRESHOLDS,
                    positive_is_left: bool = True) -> EvalSummary:
    """Pair predictions with ground truth by frame_id and aggregate.

    Predicted frames without both centers are counted under ``skipped`` (by
    reason) and excluded from every accuracy denominator; the counts always
    travel with the summary.  Raises ``EvaluationError`` when no frame ids
    match at all.
    """
    truth_by_id: dict[str, GroundTruthRecord] = {}
    for rec in truths:
        if rec.frame_id in truth_by_id:
            raise EvaluationError(f"duplicate ground-truth frame_id {rec.frame_id!r}")
        truth_by_id[rec.frame_id] = rec

    errors: list[float] = []
    skipped: dict[str, int] = {}
    region_pred: list[RegionLabel] = []
    region_truth: list[RegionLabel] = []
    matched = 0
    for pred in predictions:
        gt = truth_by_id.get(pred.frame_id)
        if gt is None:
            continue
        matched += 1
        if pred.left is None or pred.right is None:
            reason = pred.skip_reason or "PIPELINE_FAILURE"
            skipped[reason] = skipped.get(reason, 0) + 1
            continue
        errors.append(normalized_error(pred.left, pred.right, gt.left, gt.right))
        gt_region = gt.region
        if gt_region is None and gt.sign is not None:
            gt_region = map_angular_to_region(gt.sign, positive_is_left)
        if pred.region is not None and gt_region is not None:
            region_pred.append(pred.region)
            region_truth.append(gt_region)
    if matched == 0:
        raise EvaluationError("no prediction frame_id matches any ground-truth record")

    n = len(errors)
    if n:
        accuracy_at = {t: sum(e <= t for e in errors) / n for t in thresholds}
        mean_e = math.fsum(errors) / n  # exact sum: permutation-independent
    else:
        accuracy_at = {t: 0.0 for t in thresholds}
        mean_e = None
    if region_truth:
        frac, confusion = region_accuracy(region_pred, region_truth)
    else:
        frac, confusion = None, None
    return EvalSummary(n=n, accuracy_at=dict(sorted(accuracy_at.items())),
                       mean_e=mean_e, region_accuracy=frac, confusion=confusion,
                       skipped=dict(sorted(skipped.items())))


def parse_ground_truth_file(data: bytes) -> list[GroundTruthRecord]:
    """Parse the ground-truth sidecar format; malformed records raise."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EvaluationError(f"ground truth is not valid UTF-8: {exc}") from exc
    records: list[GroundTruthRecord] = []
    regions = {label.value.lower(): label for label in RegionLabel}
    signs = {"+": 1, "-": -1, "0": 0}
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line:
            continue
        parts = line.split(",")
        if len(parts) not in (5, 6):
            raise EvaluationError(f"line {line_no}: expected 5 or 6 fields, got {len(parts)}")
        frame_id = parts[0]
        if not frame_id:
            raise EvaluationError(f"line {line_no}: empty frame_id")
        try:
            lx, ly, rx, ry = (float(v) for v in parts[1:5])
        except ValueError as exc:
            raise EvaluationError(f"line {line_no}: non-numeric coordinate") from exc
        if not all(math.isfinite(v) for v in (lx, ly, rx, ry)):
            raise EvaluationError(f"line {line_no}: non-finite coordinate")
        region = None
        sign = None
        if len(parts) == 6 and parts[5]:
            token = parts[5].strip()
            if token in signs:
                sign = signs[token]
            elif token.lower() in regions:
                region = regions[token.lower()]
            else:
                raise EvaluationError(f"line {line_no}: unknown region/sign token {token!r}")
        records.append(GroundTruthRecord(frame_id, (lx, ly), (rx, ry), region, sign))
    return records


def serialize_ground_truth_file(records: list[GroundTruthRecord]) -> bytes:
    lines = []
    for rec in records:
        extra = ""
        if rec.region is not None:
            extra = f",{rec.region.value}"
        elif rec.sign is not None:
            extra = "," + {1: "+", -1: "-", 0: "0"}[int(np.sign(rec.sign))]
        lines.append(f"{rec.frame_id},{rec.left[0]},{rec.left[1]},"
                     f"{rec.right[0]},{rec.right[1]}{extra}\n")
    return "".join(lines).encode("utf-8")


def render_report(summary: EvalSummary) -> str:
    """Human-readable evaluation report."""
    lines = ["localization evaluation", "-" * 34]
    lines.append(f"frames evaluated : {summary.n}")
    total_skipped = sum(summary.skipped.values())
    lines.append(f"frames skipped   : {total_skipped}")
    for reason, count in summary.skipped.items():
        lines.append(f"  {reason}: {count}")
    if summary.mean_e is not None:
        lines.append(f"mean error       : {summary.mean_e:.6f}")
    for t, frac in summary.accuracy_at.items():
        lines.append(f"accuracy e<={t:<5g}: {100.0 * frac:6.2f} %")
    if summary.region_accuracy is not None:
        lines.append(f"region accuracy  : {100.0 * summary.region_accuracy:6.2f} %")
        header = " ".join(f"{label.value:>7}" for label in CONFUSION_ORDER)
        lines.append(f"confusion (rows = truth)  {header}")
        for label, row in zip(CONFUSION_ORDER, summary.confusion):
            cells = " ".join(f"{int(v):>7}" for v in row)
            lines.append(f"  {label.value:<7} {cells}")
    return "\n".join(lines) + "\n"


def summary_to_dict(summary: EvalSummary) -> dict:
    """JSON-ready view of a summary (the machine-readable key-value form)."""
    return {
        "n": summary.n,
        "skipped": dict(summary.skipped),
        "mean_e": summary.mean_e,
        "accuracy_at": {f"{t:g}": frac for t, frac in summary.accuracy_at.items()},
        "region_accuracy": summary.region_accuracy,
        "confusion_order": [label.value for label in CONFUSION_ORDER],
        "confusion": summary.confusion.tolist() if summary.confusion is not None else None,
    }
