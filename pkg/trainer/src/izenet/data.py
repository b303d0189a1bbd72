"""Dataset loading: labels files plus frame directories, and toy sets.

The labels-file format is the labeling CLI's documented interface (header
row, comma-separated, ``status`` OK/SKIP, ``gaze`` in Center/Left/Right);
rows are consumed with no transformation beyond the class-name-to-index
mapping.  Frames resolve as ``<frames_root>/<subject_id>/<frame_id>.png``
(or ``.jpg``), the labeler's canonical corpus layout.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .model import CLASS_TO_INDEX

EXPECTED_HEADER_PREFIX = "subject_id,frame_id,status,gaze"


class DatasetError(ValueError):
    """Raised for unusable labels files or missing frames."""


@dataclass(frozen=True)
class LabeledFrame:
    subject_id: str
    frame_id: str
    class_name: str
    path: Path


def read_label_rows(labels_csv: str | Path) -> list[dict[str, str]]:
    """Parse the labels file into dicts keyed by header column."""
    text = Path(labels_csv).read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or not lines[0].startswith(EXPECTED_HEADER_PREFIX):
        raise DatasetError(f"{labels_csv} does not look like a labels file")
    header = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise DatasetError(f"row with {len(parts)} fields != header {len(header)}")
        rows.append(dict(zip(header, parts)))
    return rows


def labeled_frames(labels_csv: str | Path, frames_root: str | Path) -> list[LabeledFrame]:
    """OK rows resolved to image paths; skip rows are ignored."""
    frames_root = Path(frames_root)
    out = []
    for row in read_label_rows(labels_csv):
        if row["status"] != "OK":
            continue
        if row["gaze"] not in CLASS_TO_INDEX:
            raise DatasetError(f"unknown gaze class {row['gaze']!r}")
        base = frames_root / row["subject_id"] / row["frame_id"]
        for suffix in (".png", ".jpg", ".jpeg"):
            path = base.with_suffix(suffix)
            if path.exists():
                break
        else:
            raise DatasetError(f"no frame image for {base}")
        out.append(LabeledFrame(row["subject_id"], row["frame_id"], row["gaze"], path))
    return out


def _load_image(path: Path, size: int) -> np.ndarray:
    with Image.open(path) as im:
        im = im.convert("RGB").resize((size, size), Image.BILINEAR)
        return np.asarray(im, dtype=np.float32) / 255.0


def load_dataset(labels_csv: str | Path, frames_root: str | Path,
                 image_size: int = 128) -> tuple[torch.Tensor, torch.Tensor, list[LabeledFrame]]:
    """Images as (N, 3, S, S) float32 in [0, 1] plus class indices."""
    frames = labeled_frames(labels_csv, frames_root)
    if not frames:
        raise DatasetError("labels file holds no usable OK rows")
    images = np.stack([_load_image(f.path, image_size) for f in frames])
    labels = np.array([CLASS_TO_INDEX[f.class_name] for f in frames], dtype=np.int64)
    x = torch.from_numpy(images).permute(0, 3, 1, 2).contiguous()
    y = torch.from_numpy(labels)
    return x, y, frames


def make_toy_dataset(per_class: int = 10, size: int = 128,
                     seed: int = 0) -> tuple[torch.Tensor, torch.Tensor]:
    """Visually separable three-class set: a bright band per class region.

    Center lights the middle horizontal third, Left the right third, Right
    the left third (mirroring the subject-perspective convention), over a
    dark noisy background.
    """
    rng = np.random.default_rng(seed)
    images = np.zeros((3 * per_class, size, size, 3), dtype=np.float32)
    labels = np.zeros(3 * per_class, dtype=np.int64)
    thirds = {0: (size // 3, 2 * size // 3), 1: (2 * size // 3, size), 2: (0, size // 3)}
    i = 0
    for class_idx in range(3):
        lo, hi = thirds[class_idx]
        for _ in range(per_class):
            img = rng.uniform(0.0, 0.15, size=(size, size, 3)).astype(np.float32)
            img[:, lo:hi, :] = rng.uniform(0.85, 1.0)
            images[i] = img
            labels[i] = class_idx
            i += 1
    x = torch.from_numpy(images).permute(0, 3, 1, 2).contiguous()
    return x, torch.from_numpy(labels)
