"""68-point facial landmark ingestion and eye-region geometry.

Landmarks arrive from any external detector through a sidecar text file:
one record per line, comma separated, ``frame_id`` followed by 136 numbers
``x0,y0,...,x67,y67`` (decimal notation, dot separator, UTF-8, LF endings).
Index conventions follow the standard 68-point layout: the subject's right
eye occupies indices 36-41, the subject's left eye 42-47, the nose tip is
index 30.  "Left" and "right" are always the subject's own sides, so the
subject-left eye sits on the image's right half.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

POINT_COUNT = 68
NOSE_TIP = 30
RIGHT_EYE = slice(36, 42)  # subject-right eye (image left)
LEFT_EYE = slice(42, 48)  # subject-left eye (image right)
RIGHT_OUTER_CORNER = 36
RIGHT_INNER_CORNER = 39
LEFT_INNER_CORNER = 42
LEFT_OUTER_CORNER = 45

DEFAULT_CROP_PAD = 2


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class LandmarkParseError(ValueError):
    """Raised when sidecar input cannot be decoded at all."""


class DegenerateEyeError(ValueError):
    """Raised for eye contours with no usable extent (e.g. a closed eye)."""

    def __init__(self, message: str, side: Side | None = None):
        super().__init__(message)
        self.side = side


class CropOutOfBoundsError(ValueError):
    """Raised when a requested eye crop lies entirely outside the image."""


@dataclass(frozen=True)
class ParseIssue:
    """One malformed sidecar record, reported instead of raised."""

    line_no: int
    message: str


@dataclass(frozen=True)
class LandmarkSet:
    """All 68 landmark points of one frame, in face-image coordinates."""

    frame_id: str
    points: np.ndarray  # (68, 2) float64, columns x, y

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (POINT_COUNT, 2):
            raise ValueError(f"expected {POINT_COUNT} (x, y) points, got shape {pts.shape}")
        if not np.isfinite(pts).all():
            raise ValueError("landmark coordinates must be finite")
        if not self.frame_id:
            raise ValueError("frame_id must be nonempty")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class EyeContour:
    """The six contour points of one eye opening."""

    points: np.ndarray  # (6, 2) float64
    side: Side

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (6, 2):
            raise ValueError(f"expected 6 contour points, got shape {pts.shape}")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class EyeCrop:
    """A grayscale eye region plus its offset within the face image."""

    image: np.ndarray
    origin: tuple[int, int]
    side: Side

    def to_face_frame(self, point: tuple[float, float]) -> tuple[float, float]:
        return (point[0] + self.origin[0], point[1] + self.origin[1])


@dataclass(frozen=True)
class FaceAnchors:
    """Fixed-index anchor points used by the gaze heuristics."""

    nose: tuple[float, float]
    left_inner_corner: tuple[float, float]
    left_outer_corner: tuple[float, float]
    right_inner_corner: tuple[float, float]
    right_outer_corner: tuple[float, float]


def parse_landmark_file(data: bytes) -> tuple[list[LandmarkSet], list[ParseIssue]]:
    """Parse a sidecar file into landmark sets plus per-record issues.

    Well-formed records are returned in file order; malformed ones (wrong
    field count, non-numeric or non-finite coordinates, duplicate frame ids)
    become ``ParseIssue`` entries citing their 1-based line number.  A file
    that is not valid UTF-8 raises ``LandmarkParseError``.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise LandmarkParseError(f"sidecar is not valid UTF-8: {exc}") from exc

    records: list[LandmarkSet] = []
    issues: list[ParseIssue] = []
    seen: set[str] = set()
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 1 + 2 * POINT_COUNT:
            issues.append(ParseIssue(line_no, f"expected {1 + 2 * POINT_COUNT} fields, "
                                              f"got {len(parts)}"))
            continue
        frame_id = parts[0]
        if not frame_id:
            issues.append(ParseIssue(line_no, "empty frame_id"))
            continue
        if frame_id in seen:
            issues.append(ParseIssue(line_no, f"duplicate frame_id {frame_id!r}"))
            continue
        try:
            values = [float(v) for v in parts[1:]]
        except ValueError:
            issues.append(ParseIssue(line_no, f"non-numeric coordinate in record {frame_id!r}"))
            continue
        if not all(math.isfinite(v) for v in values):
            issues.append(ParseIssue(line_no, f"non-finite coordinate in record {frame_id!r}"))
            continue
        seen.add(frame_id)
        records.append(LandmarkSet(frame_id, np.array(values, dtype=np.float64).reshape(-1, 2)))
    return records, issues


def serialize_landmark_file(records: list[LandmarkSet]) -> bytes:
    """Serialize landmark sets to the sidecar format (inverse of parsing)."""
    lines = []
    for rec in records:
        if "," in rec.frame_id or "\n" in rec.frame_id or "\r" in rec.frame_id:
            raise ValueError(f"frame_id {rec.frame_id!r} contains a separator character")
        coords = ",".join(str(float(v)) for v in rec.points.ravel())
        lines.append(f"{rec.frame_id},{coords}\n")
    return "".join(lines).encode("utf-8")


def _check_contour(points: np.ndarray, side: Side) -> None:
    spread_x = float(points[:, 0].max() - points[:, 0].min())
    spread_y = float(points[:, 1].max() - points[:, 1].min())
    if spread_x <= 0.0 or spread_y <= 0.0:
        raise DegenerateEyeError(f"{side.value} eye contour has a zero-area bounding box", side)
    # collinear points span a box but still carry no opening
    p0 = points[0]
    d = points[1:] - p0
    ref = None
    for row in d:
        if row[0] != 0.0 or row[1] != 0.0:
            ref = row
            break
    if ref is None:
        raise DegenerateEyeError(f"{side.value} eye contour collapsed to a point", side)
    scale = max(spread_x, spread_y)
    cross = d[:, 0] * ref[1] - d[:, 1] * ref[0]
    if np.all(np.abs(cross) <= 1e-9 * scale * scale):
        raise DegenerateEyeError(f"{side.value} eye contour points are collinear", side)


def eye_contours(lm: LandmarkSet) -> tuple[EyeContour, EyeContour]:
    """Extract (subject-left, subject-right) eye contours from fixed indices."""
    left = EyeContour(lm.points[LEFT_EYE].copy(), Side.LEFT)
    right = EyeContour(lm.points[RIGHT_EYE].copy(), Side.RIGHT)
    _check_contour(left.points, Side.LEFT)
    _check_contour(right.points, Side.RIGHT)
    return left, right


def face_anchors(lm: LandmarkSet) -> FaceAnchors:
    """Pick the nose tip and the four eye corners from fixed indices."""
    p = lm.points
    return FaceAnchors(
        nose=(float(p[NOSE_TIP, 0]), float(p[NOSE_TIP, 1])),
        left_inner_corner=(float(p[LEFT_INNER_CORNER, 0]), float(p[LEFT_INNER_CORNER, 1])),
        left_outer_corner=(float(p[LEFT_OUTER_CORNER, 0]), float(p[LEFT_OUTER_CORNER, 1])),
        right_inner_corner=(float(p[RIGHT_INNER_CORNER, 0]), float(p[RIGHT_INNER_CORNER, 1])),
        right_outer_corner=(float(p[RIGHT_OUTER_CORNER, 0]), float(p[RIGHT_OUTER_CORNER, 1])),
    )


def crop_eye(img: np.ndarray, contour: EyeContour, pad: int = DEFAULT_CROP_PAD) -> EyeCrop:
    """Crop the contour's bounding box, dilated by ``pad``, from the face image.

    The crop spans ``floor(min) - pad`` up to and including
    ``floor(max) + pad + 1`` on each axis (a one-pixel guard beyond the box),
    clamped to the image; the recorded origin makes the coordinate round trip
    ``face = crop + origin`` exact.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("crop_eye expects a grayscale face image")
    if pad < 0:
        raise ValueError(f"pad must be >= 0, got {pad}")
    h, w = img.shape
    pts = contour.points
    x0 = math.floor(pts[:, 0].min()) - pad
    y0 = math.floor(pts[:, 1].min()) - pad
    x1 = math.floor(pts[:, 0].max()) + pad + 2  # exclusive
    y1 = math.floor(pts[:, 1].max()) + pad + 2
    x0c, y0c = max(0, x0), max(0, y0)
    x1c, y1c = min(w, x1), min(h, y1)
    if x0c >= x1c or y0c >= y1c:
        raise CropOutOfBoundsError(
            f"{contour.side.value} eye contour lies outside the {w}x{h} image")
    return EyeCrop(image=img[y0c:y1c, x0c:x1c].copy(), origin=(x0c, y0c), side=contour.side)


def contour_height(contour: EyeContour) -> float:
    """Vertical extent of the eye contour (max y minus min y)."""
    ys = contour.points[:, 1]
    return float(ys.max() - ys.min())
