"""Schematic face rendering with exact ground truth.

The renderer draws a parametric face (head, brows, eye openings, irises,
nose, mouth) under an affine placement (scale, in-plane roll, translation)
and returns the raster together with the exactly transformed 68-point
landmark set and iris centers.  Because landmarks and pupil centers come
from the same analytic geometry as the pixels, renders double as oracles
for the localization pipeline and as demo corpora for the CLI.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .landmarks import LandmarkSet, serialize_landmark_file

# Base-face geometry in face-local units (origin at face center, y down).
_EYE_CENTER_X = 22.0
_EYE_CENTER_Y = -12.0
_EYE_RX = 11.0
_EYE_RY = 7.0
MAX_GAZE_SHIFT_X = 4.0  # keeps the iris disk inside the opening
MAX_GAZE_SHIFT_Y = 1.0


@dataclass(frozen=True)
class FaceScene:
    """Parameters of one schematic face render."""

    width: int = 160
    height: int = 120
    center: tuple[float, float] = (80.0, 62.0)
    scale: float = 1.0
    roll_deg: float = 0.0
    gaze_shift: tuple[float, float] = (0.0, 0.0)  # +x = toward subject's left
    iris_radius: float = 5.0
    background: int = 105
    skin: int = 190
    sclera: int = 240
    iris: int = 35
    brow: int = 130
    nose: int = 165
    mouth: int = 140
    supersample: int = 3
    frame_id: str = "000000"


@dataclass(frozen=True)
class RenderedFace:
    """A rendered frame plus its exact geometry."""

    image: np.ndarray
    landmarks: LandmarkSet
    left_pupil: tuple[float, float]  # subject-left iris center, image coords
    right_pupil: tuple[float, float]


def _base_landmarks() -> np.ndarray:
    pts = np.zeros((68, 2), dtype=np.float64)
    # jaw 0-16: arc from right temple through the chin to the left temple
    for t in range(17):
        a = t * math.pi / 16.0
        pts[t] = (-45.0 * math.cos(a), 5.0 + 45.0 * math.sin(a))
    # brows 17-26
    arch = (0.0, 1.5, 2.0, 1.5, 0.0)
    for i, x in enumerate(np.linspace(-34.0, -10.0, 5)):
        pts[17 + i] = (x, -27.0 - arch[i])
    for i, x in enumerate(np.linspace(10.0, 34.0, 5)):
        pts[22 + i] = (x, -27.0 - arch[i])
    # nose bridge 27-30 (30 is the tip) and nostril line 31-35
    pts[27] = (0.0, -12.0)
    pts[28] = (0.0, -3.0)
    pts[29] = (0.0, 6.0)
    pts[30] = (0.0, 14.0)
    for i, x in enumerate((-6.0, -3.0, 0.0, 3.0, 6.0)):
        pts[31 + i] = (x, 18.0 + (0.0 if abs(x) > 4 else 1.0))
    # eye contours 36-41 (subject right) and 42-47 (subject left)
    ex, ey = _EYE_CENTER_X, _EYE_CENTER_Y
    pts[36] = (-ex - 11.0, ey)
    pts[37] = (-ex - 5.0, ey - 5.0)
    pts[38] = (-ex + 5.0, ey - 5.0)
    pts[39] = (-ex + 11.0, ey)
    pts[40] = (-ex + 5.0, ey + 5.0)
    pts[41] = (-ex - 5.0, ey + 5.0)
    pts[42] = (ex - 11.0, ey)
    pts[43] = (ex - 5.0, ey - 5.0)
    pts[44] = (ex + 5.0, ey - 5.0)
    pts[45] = (ex + 11.0, ey)
    pts[46] = (ex + 5.0, ey + 5.0)
    pts[47] = (ex - 5.0, ey + 5.0)
    # mouth 48-67: outer ring of 12, inner ring of 8
    for i in range(12):
        a = 2.0 * math.pi * i / 12.0
        pts[48 + i] = (12.0 * math.cos(a), 30.0 + 4.0 * math.sin(a))
    for i in range(8):
        a = 2.0 * math.pi * i / 8.0
        pts[60 + i] = (8.0 * math.cos(a), 30.0 + 2.0 * math.sin(a))
    return pts


_BASE_LANDMARKS = _base_landmarks()


def _place(points: np.ndarray, scene: FaceScene) -> np.ndarray:
    """Map base-face coordinates into image coordinates."""
    r = math.radians(scene.roll_deg)
    c, s = math.cos(r), math.sin(r)
    x = points[..., 0] * scene.scale
    y = points[..., 1] * scene.scale
    out = np.empty(points.shape, dtype=np.float64)
    out[..., 0] = scene.center[0] + c * x - s * y
    out[..., 1] = scene.center[1] + s * x + c * y
    return out


def _scene_intensity(bx: np.ndarray, by: np.ndarray, scene: FaceScene) -> np.ndarray:
    """Evaluate the base-face drawing at base coordinates (vectorized)."""
    img = np.full(bx.shape, float(scene.background))
    head = (bx / 45.0) ** 2 + ((by - 5.0) / 52.0) ** 2 <= 1.0
    img[head] = scene.skin
    for sx in (-1.0, 1.0):
        brow = ((bx - sx * _EYE_CENTER_X) / 12.0) ** 2 + ((by + 27.0) / 2.0) ** 2 <= 1.0
        img[brow] = scene.brow
    gx, gy = scene.gaze_shift
    for sx in (-1.0, 1.0):
        cx = sx * _EYE_CENTER_X
        opening = ((bx - cx) / _EYE_RX) ** 2 + ((by - _EYE_CENTER_Y) / _EYE_RY) ** 2 <= 1.0
        img[opening] = scene.sclera
        ix, iy = cx + gx, _EYE_CENTER_Y + gy
        disk = (bx - ix) ** 2 + (by - iy) ** 2 <= scene.iris_radius ** 2
        img[opening & disk] = scene.iris
    nose = bx ** 2 + (by - 14.0) ** 2 <= 9.0
    img[nose] = scene.nose
    mouth = (bx / 12.0) ** 2 + ((by - 30.0) / 3.0) ** 2 <= 1.0
    img[mouth] = scene.mouth
    return img


def render_face(scene: FaceScene) -> RenderedFace:
    """Render the scene and return exact landmarks plus iris centers."""
    if abs(scene.gaze_shift[0]) > MAX_GAZE_SHIFT_X or abs(scene.gaze_shift[1]) > MAX_GAZE_SHIFT_Y:
        raise ValueError(f"gaze shift {scene.gaze_shift} would clip the iris; "
                         f"stay within +-{MAX_GAZE_SHIFT_X}, +-{MAX_GAZE_SHIFT_Y}")
    ss = int(scene.supersample)
    if ss < 1:
        raise ValueError("supersample must be >= 1")
    h, w = scene.height, scene.width
    # sample positions: pixel centers plus a uniform ss x ss sub-grid
    base = (np.arange(ss, dtype=np.float64) + 0.5) / ss - 0.5
    px = (np.arange(w, dtype=np.float64)[:, None] + base[None, :]).ravel()
    py = (np.arange(h, dtype=np.float64)[:, None] + base[None, :]).ravel()
    gx, gy = np.meshgrid(px, py)
    # inverse placement into base coordinates
    r = math.radians(scene.roll_deg)
    c, s = math.cos(r), math.sin(r)
    dx = gx - scene.center[0]
    dy = gy - scene.center[1]
    bx = (c * dx + s * dy) / scene.scale
    by = (-s * dx + c * dy) / scene.scale
    sampled = _scene_intensity(bx, by, scene)
    img = sampled.reshape(h, ss, w, ss).mean(axis=(1, 3))
    img = np.clip(np.rint(img), 0, 255).astype(np.uint8)

    landmarks = LandmarkSet(scene.frame_id, _place(_BASE_LANDMARKS, scene))
    shift = np.array(scene.gaze_shift, dtype=np.float64)
    left = _place(np.array([_EYE_CENTER_X, _EYE_CENTER_Y]) + shift, scene)
    right = _place(np.array([-_EYE_CENTER_X, _EYE_CENTER_Y]) + shift, scene)
    return RenderedFace(image=img, landmarks=landmarks,
                        left_pupil=(float(left[0]), float(left[1])),
                        right_pupil=(float(right[0]), float(right[1])))


def render_disk(width: int, height: int, center: tuple[float, float], radius: float,
                fg: int, bg: int, supersample: int = 3) -> np.ndarray:
    """Render a filled disk on a constant field (supersampled edges)."""
    ss = int(supersample)
    base = (np.arange(ss, dtype=np.float64) + 0.5) / ss - 0.5
    px = (np.arange(width, dtype=np.float64)[:, None] + base[None, :]).ravel()
    py = (np.arange(height, dtype=np.float64)[:, None] + base[None, :]).ravel()
    gx, gy = np.meshgrid(px, py)
    inside = (gx - center[0]) ** 2 + (gy - center[1]) ** 2 <= radius ** 2
    sampled = np.where(inside, float(fg), float(bg))
    img = sampled.reshape(height, ss, width, ss).mean(axis=(1, 3))
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def render_circle_edges(size: int, center: tuple[float, float], radius: float,
                        half_width: float = 0.5) -> np.ndarray:
    """Boolean ring of pixels within ``half_width`` of the circle boundary."""
    ys, xs = np.indices((size, size))
    dist = np.hypot(xs - center[0], ys - center[1])
    return np.abs(dist - radius) <= half_width


GAZE_CLASS_SHIFTS = {"Center": 0.0, "Left": 3.5, "Right": -3.5}


def make_demo_corpus(root: str | Path, subjects: int = 2, frames_per_subject: int = 24,
                     seed: int = 0, with_truth: bool = True) -> Path:
    """Write a small rendered corpus: frames, sidecars, manifest, truth.

    Frames cycle deterministically through Center / Left / Right gaze with
    mild per-frame roll and per-subject scale variation.  Returns the path
    of the written manifest; ground-truth records use composite
    ``subject/frame`` ids.
    """
    from .io import write_raster  # local import keeps synth usable without Pillow

    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    manifest = {"subjects": []}
    truth_lines: list[str] = []
    classes = list(GAZE_CLASS_SHIFTS)
    for si in range(subjects):
        sid = f"s{si:02d}"
        subject_dir = root / sid
        subject_dir.mkdir(exist_ok=True)
        scale = 0.9 + 0.2 * rng.random()
        cx = 80.0 + rng.uniform(-4.0, 4.0)
        cy = 62.0 + rng.uniform(-4.0, 4.0)
        # balanced class schedule, shuffled so stride sampling stays mixed
        schedule = (classes * (frames_per_subject // 3 + 1))[:frames_per_subject]
        rng.shuffle(schedule)
        records = []
        frame_names = []
        for fi in range(frames_per_subject):
            frame_id = f"{fi:06d}"
            gaze_class = schedule[fi]
            shift_x = GAZE_CLASS_SHIFTS[gaze_class] + rng.uniform(-0.3, 0.3)
            scene = FaceScene(center=(cx, cy), scale=scale,
                              roll_deg=rng.uniform(-5.0, 5.0),
                              gaze_shift=(shift_x, 0.0), frame_id=frame_id)
            rendered = render_face(scene)
            name = f"{frame_id}.png"
            write_raster(subject_dir / name, rendered.image)
            frame_names.append(f"{sid}/{name}")
            records.append(rendered.landmarks)
            lp, rp = rendered.left_pupil, rendered.right_pupil
            truth_lines.append(f"{sid}/{frame_id},{lp[0]},{lp[1]},"
                               f"{rp[0]},{rp[1]},{gaze_class}\n")
        (subject_dir / "landmarks.csv").write_bytes(serialize_landmark_file(records))
        manifest["subjects"].append({
            "id": sid,
            "frames": frame_names,
            "landmarks": f"{sid}/landmarks.csv",
        })
    if with_truth:
        (root / "truth.csv").write_text("".join(truth_lines), encoding="utf-8")
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest_path
