"""Batch labeling over a frame corpus, plus dataset splitting and statistics.

A corpus is described by a manifest: one entry per subject with its frame
files in temporal order and a landmark sidecar.  Labeling samples every
``stride``-th frame, runs the localization and classification pipeline, and
emits one record per sampled frame -- either a full label or a skip record
with a machine-readable reason.  Output ordering is fixed by
``(subject_id, frame index)`` no matter how many workers run, so reruns are
byte-identical.

The labels file is line oriented and comma separated with a header row; a
frame's identity is its zero-padded index within the subject's frame list,
which is also how sidecar records and frame files are matched.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from random import Random

import numpy as np

from .gaze import GazeAngles, LabelingError, RegionLabel, label_frame
from .io import read_raster, write_raster
from .image import to_grayscale
from .landmarks import (
    DegenerateEyeError,
    LandmarkParseError,
    LandmarkSet,
    parse_landmark_file,
)
from .pupil import NoPupilError

DEFAULT_STRIDE = 3
DEFAULT_TRAIN_FRACTION = 0.70

# Skip reason codes (stable, machine readable).
SKIP_NO_FACE_LANDMARKS = "NO_FACE_LANDMARKS"
SKIP_NO_PUPIL = "NO_PUPIL"
SKIP_DEGENERATE_EYE = "DEGENERATE_EYE"
SKIP_UNREADABLE_FRAME = "UNREADABLE_FRAME"
SKIP_SIDECAR_ERROR = "SIDECAR_ERROR"

LABELS_HEADER = ("subject_id,frame_id,status,gaze,head_pose,"
                 "left_pupil_x,left_pupil_y,right_pupil_x,right_pupil_y,"
                 "theta1,theta2,theta3,theta4,flags,reason")

STATUS_OK = "OK"
STATUS_SKIP = "SKIP"

# Overlay colors for primary / secondary / final markers.
_PRIMARY_COLOR = (40, 90, 255)
_SECONDARY_COLOR = (40, 200, 60)
_FINAL_COLOR = (255, 105, 180)


class ManifestError(ValueError):
    """Raised when a corpus manifest is structurally unusable."""


class CannotSplitError(ValueError):
    """Raised when a dataset has too few subjects to split."""


@dataclass(frozen=True)
class SubjectEntry:
    subject_id: str
    frames: tuple[Path, ...]
    landmarks: Path


@dataclass(frozen=True)
class CorpusManifest:
    subjects: tuple[SubjectEntry, ...]


@dataclass(frozen=True)
class LabelRecord:
    """One labels-file row: a labeled frame or a skip with its reason."""

    subject_id: str
    frame_id: str
    status: str
    gaze: RegionLabel | None = None
    head_pose: RegionLabel | None = None
    left_pupil: tuple[float, float] | None = None
    right_pupil: tuple[float, float] | None = None
    angles: GazeAngles | None = None
    flags: tuple[str, ...] = ()
    reason: str | None = None


@dataclass(frozen=True)
class LabelConfig:
    stride: int = DEFAULT_STRIDE
    offset: int = 5
    tau: float = 2.0
    tau_head: float = 2.0
    workers: int = 1
    annotate_dir: Path | None = None


def load_manifest(path: str | Path) -> CorpusManifest:
    """Load a JSON manifest; relative paths resolve against its directory."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    base = path.parent
    subjects = []
    seen = set()
    for entry in doc.get("subjects", []):
        sid = entry.get("id")
        if not sid or sid in seen:
            raise ManifestError(f"manifest {path}: missing or duplicate subject id {sid!r}")
        seen.add(sid)
        frames = tuple(base / f for f in entry.get("frames", []))
        landmarks = entry.get("landmarks")
        if landmarks is None:
            raise ManifestError(f"manifest {path}: subject {sid!r} has no landmark sidecar")
        subjects.append(SubjectEntry(sid, frames, base / landmarks))
    if not subjects:
        raise ManifestError(f"manifest {path}: no subjects")
    return CorpusManifest(tuple(subjects))


_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def manifest_from_directory(root: str | Path) -> CorpusManifest:
    """Build a manifest by scanning ``root``: one subdirectory per subject,
    frames sorted by name, sidecar at ``<subject>/landmarks.csv``."""
    root = Path(root)
    subjects = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        frames = tuple(sorted(p for p in sub.iterdir()
                              if p.suffix.lower() in _IMAGE_SUFFIXES))
        sidecar = sub / "landmarks.csv"
        if frames and sidecar.exists():
            subjects.append(SubjectEntry(sub.name, frames, sidecar))
    if not subjects:
        raise ManifestError(f"no subject directories with frames and landmarks under {root}")
    return CorpusManifest(tuple(subjects))


def resolve_corpus(arg: str | Path) -> CorpusManifest:
    arg = Path(arg)
    if arg.is_dir():
        manifest = arg / "manifest.json"
        if manifest.exists():
            return load_manifest(manifest)
        return manifest_from_directory(arg)
    return load_manifest(arg)


def sample_frames(frames: list, stride: int = DEFAULT_STRIDE) -> list:
    """Every ``stride``-th element starting at index 0."""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    return list(frames[::stride])


@dataclass(frozen=True)
class _FrameTask:
    subject_id: str
    frame_index: int
    frame_id: str
    frame_path: str
    landmarks: LandmarkSet | None
    sidecar_failed: bool
    config: LabelConfig


def _skip(task: _FrameTask, reason: str) -> LabelRecord:
    return LabelRecord(subject_id=task.subject_id, frame_id=task.frame_id,
                       status=STATUS_SKIP, reason=reason)


def _draw_marker(rgb: np.ndarray, point: tuple[float, float], color, shape: str) -> None:
    h, w = rgb.shape[:2]
    x, y = int(round(point[0])), int(round(point[1]))
    arms = {
        "cross": [(dx, 0) for dx in range(-3, 4)] + [(0, dy) for dy in range(-3, 4)],
        "x": [(d, d) for d in range(-3, 4)] + [(d, -d) for d in range(-3, 4)],
        "dot": [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)],
    }[shape]
    for dx, dy in arms:
        px, py = x + dx, y + dy
        if 0 <= px < w and 0 <= py < h:
            rgb[py, px] = color


def _annotate(raster: np.ndarray, left, right, out_path: Path) -> None:
    rgb = raster if raster.ndim == 3 else np.stack([raster] * 3, axis=-1)
    rgb = rgb.copy()
    for est in (left, right):
        _draw_marker(rgb, est.primary, _PRIMARY_COLOR, "cross")
        if est.secondary is not None:
            _draw_marker(rgb, est.secondary, _SECONDARY_COLOR, "x")
        _draw_marker(rgb, est.final, _FINAL_COLOR, "dot")
    write_raster(out_path, rgb)


def _label_one(task: _FrameTask) -> LabelRecord:
    """Label a single frame; every failure becomes a skip record."""
    if task.sidecar_failed:
        return _skip(task, SKIP_SIDECAR_ERROR)
    if task.landmarks is None:
        return _skip(task, SKIP_NO_FACE_LANDMARKS)
    try:
        raster = read_raster(task.frame_path)
    except Exception:
        return _skip(task, SKIP_UNREADABLE_FRAME)
    gray = to_grayscale(raster) if raster.ndim == 3 else raster
    cfg = task.config
    try:
        labeled = label_frame(gray, task.landmarks, cfg.tau, cfg.tau_head, cfg.offset)
    except LabelingError as exc:
        cause = exc.__cause__
        if isinstance(cause, DegenerateEyeError):
            return _skip(task, SKIP_DEGENERATE_EYE)
        if isinstance(cause, NoPupilError):
            return _skip(task, SKIP_NO_PUPIL)
        return _skip(task, SKIP_NO_PUPIL)
    if cfg.annotate_dir is not None:
        from .pupil import localize_pupils  # estimates carry all three centers
        left, right = localize_pupils(gray, task.landmarks, cfg.offset)
        out = Path(cfg.annotate_dir) / f"{task.subject_id}_{task.frame_id}.png"
        _annotate(raster, left, right, out)
    return LabelRecord(
        subject_id=task.subject_id,
        frame_id=task.frame_id,
        status=STATUS_OK,
        gaze=labeled.gaze,
        head_pose=labeled.head_pose,
        left_pupil=labeled.left_pupil,
        right_pupil=labeled.right_pupil,
        angles=labeled.angles,
        flags=tuple(sorted(labeled.flags)),
    )


def _build_tasks(manifest: CorpusManifest, config: LabelConfig) -> list[_FrameTask]:
    tasks: list[_FrameTask] = []
    for subject in sorted(manifest.subjects, key=lambda s: s.subject_id):
        lm_by_id: dict[str, LandmarkSet] = {}
        sidecar_failed = False
        try:
            records, _issues = parse_landmark_file(Path(subject.landmarks).read_bytes())
            lm_by_id = {rec.frame_id: rec for rec in records}
        except (OSError, LandmarkParseError):
            sidecar_failed = True
        indices = sample_frames(list(range(len(subject.frames))), config.stride)
        for idx in indices:
            frame_id = f"{idx:06d}"
            tasks.append(_FrameTask(
                subject_id=subject.subject_id,
                frame_index=idx,
                frame_id=frame_id,
                frame_path=str(subject.frames[idx]),
                landmarks=lm_by_id.get(frame_id),
                sidecar_failed=sidecar_failed,
                config=config,
            ))
    return tasks


def run_label(manifest: CorpusManifest, config: LabelConfig,
              out_dir: str | Path) -> list[LabelRecord]:
    """Label every sampled frame; write labels and run statistics files.

    Results are gathered into ``(subject_id, frame index)`` order before
    writing, so the output is byte-identical for any worker count.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if config.annotate_dir is not None:
        Path(config.annotate_dir).mkdir(parents=True, exist_ok=True)

    tasks = _build_tasks(manifest, config)
    if config.workers <= 1:
        results = [_label_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_label_one, tasks, chunksize=4))
    order = sorted(range(len(tasks)),
                   key=lambda i: (tasks[i].subject_id, tasks[i].frame_index))
    records = [results[i] for i in order]

    write_labels_file(out_dir / "labels.csv", records)
    (out_dir / "label_stats.csv").write_text(run_stats_csv(records), encoding="utf-8")
    return records


def run_stats_csv(records: list[LabelRecord]) -> str:
    """Key-value statistics of one labeling run."""
    lines = ["key,value"]
    subjects = sorted({r.subject_id for r in records})
    ok = [r for r in records if r.status == STATUS_OK]
    skipped = [r for r in records if r.status == STATUS_SKIP]
    lines.append(f"subjects,{len(subjects)}")
    lines.append(f"frames,{len(records)}")
    lines.append(f"labeled,{len(ok)}")
    lines.append(f"skipped,{len(skipped)}")
    reasons: dict[str, int] = {}
    for r in skipped:
        reasons[r.reason or "UNKNOWN"] = reasons.get(r.reason or "UNKNOWN", 0) + 1
    for reason in sorted(reasons):
        lines.append(f"skipped_{reason},{reasons[reason]}")
    for label in (RegionLabel.CENTER, RegionLabel.LEFT, RegionLabel.RIGHT):
        lines.append(f"gaze_{label.value},{sum(1 for r in ok if r.gaze == label)}")
    for label in (RegionLabel.CENTER, RegionLabel.LEFT, RegionLabel.RIGHT):
        lines.append(f"head_{label.value},{sum(1 for r in ok if r.head_pose == label)}")
    return "\n".join(lines) + "\n"


def _fmt_point(p: tuple[float, float] | None) -> tuple[str, str]:
    if p is None:
        return "", ""
    return str(float(p[0])), str(float(p[1]))


def record_to_row(rec: LabelRecord) -> str:
    lx, ly = _fmt_point(rec.left_pupil)
    rx, ry = _fmt_point(rec.right_pupil)
    if rec.angles is not None:
        thetas = [str(float(getattr(rec.angles, f"theta{i}"))) for i in (1, 2, 3, 4)]
    else:
        thetas = ["", "", "", ""]
    return ",".join([
        rec.subject_id,
        rec.frame_id,
        rec.status,
        rec.gaze.value if rec.gaze else "",
        rec.head_pose.value if rec.head_pose else "",
        lx, ly, rx, ry,
        *thetas,
        ";".join(rec.flags),
        rec.reason or "",
    ])


def row_to_record(row: str, line_no: int) -> LabelRecord:
    parts = row.split(",")
    if len(parts) != 15:
        raise ValueError(f"line {line_no}: expected 15 fields, got {len(parts)}")
    (sid, fid, status, gaze, head, lx, ly, rx, ry,
     t1, t2, t3, t4, flags, reason) = parts
    if status == STATUS_OK:
        return LabelRecord(
            subject_id=sid, frame_id=fid, status=status,
            gaze=RegionLabel(gaze), head_pose=RegionLabel(head),
            left_pupil=(float(lx), float(ly)), right_pupil=(float(rx), float(ry)),
            angles=GazeAngles(float(t1), float(t2), float(t3), float(t4)),
            flags=tuple(f for f in flags.split(";") if f),
            reason=None,
        )
    if status == STATUS_SKIP:
        return LabelRecord(subject_id=sid, frame_id=fid, status=status,
                           flags=tuple(f for f in flags.split(";") if f),
                           reason=reason or None)
    raise ValueError(f"line {line_no}: unknown status {status!r}")


def write_labels_file(path: str | Path, records: list[LabelRecord]) -> None:
    lines = [LABELS_HEADER] + [record_to_row(r) for r in records]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_labels_file(data: bytes | str) -> list[LabelRecord]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != LABELS_HEADER:
        raise ValueError("labels file is missing its header row")
    return [row_to_record(row, i + 2) for i, row in enumerate(lines[1:])]


def read_labels_file(path: str | Path) -> list[LabelRecord]:
    return parse_labels_file(Path(path).read_bytes())


def split_dataset(records: list[LabelRecord],
                  train_fraction: float = DEFAULT_TRAIN_FRACTION,
                  seed: int = 0) -> tuple[list[LabelRecord], list[LabelRecord]]:
    """Split at subject granularity with a seeded shuffle.

    The train set receives ``floor(train_fraction * n_subjects)`` subjects,
    the remainder goes to validation; no subject ever spans both sets.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    subjects = sorted({r.subject_id for r in records})
    if len(subjects) < 2:
        raise CannotSplitError(f"need at least 2 subjects to split, got {len(subjects)}")
    rng = Random(seed)
    rng.shuffle(subjects)
    n_train = int(math.floor(train_fraction * len(subjects)))
    n_train = max(1, min(n_train, len(subjects) - 1))
    train_ids = set(subjects[:n_train])
    train = [r for r in records if r.subject_id in train_ids]
    val = [r for r in records if r.subject_id not in train_ids]
    return train, val


def stats_report(named_sets: list[tuple[str, list[LabelRecord]]]) -> str:
    """Per-set gaze-class counts as CSV, one row per set plus a total row."""
    if not named_sets:
        raise ValueError("no label sets given")
    lines = ["set,center,left,right,total"]
    totals = [0, 0, 0]
    for name, records in named_sets:
        ok = [r for r in records if r.status == STATUS_OK]
        counts = [sum(1 for r in ok if r.gaze == label)
                  for label in (RegionLabel.CENTER, RegionLabel.LEFT, RegionLabel.RIGHT)]
        totals = [a + b for a, b in zip(totals, counts)]
        lines.append(f"{name},{counts[0]},{counts[1]},{counts[2]},{sum(counts)}")
    lines.append(f"total,{totals[0]},{totals[1]},{totals[2]},{sum(totals)}")
    return "\n".join(lines) + "\n"
