"""Per-eye pupil-center localization.

The pipeline runs two independent estimators on each eye crop and averages
them: a primary center from global thresholding plus blob centroiding, and a
secondary center from a focused sub-crop that is adaptively thresholded,
edge-detected and fed to the circular Hough transform.  When the secondary
route produces no confident circle, the primary center stands alone rather
than being dragged toward a bogus detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import (
    CANNY_SIGMA,
    DegenerateHistogramError,
    NoBlobError,
    adaptive_threshold,
    canny,
    hough_circles,
    largest_blob_centroid,
    otsu_level,
    threshold_dark,
)
from .landmarks import (
    DEFAULT_CROP_PAD,
    EyeCrop,
    LandmarkSet,
    Side,
    contour_height,
    crop_eye,
    eye_contours,
)

DEFAULT_CROP_OFFSET = 5  # pixels added to half the eye height, sub-crop rule
ADAPTIVE_BIAS = 3.0  # intensity offset for the sub-crop adaptive threshold


class NoPupilError(ValueError):
    """Raised when an eye crop yields no usable dark blob."""

    def __init__(self, message: str, side: Side | None = None):
        super().__init__(message)
        self.side = side


@dataclass(frozen=True)
class CropSpec:
    """A square sub-crop request: center point plus half extent in pixels."""

    center: tuple[float, float]
    half_extent: int

    def __post_init__(self):
        object.__setattr__(self, "half_extent", max(1, int(self.half_extent)))


@dataclass(frozen=True)
class PupilEstimate:
    """Primary, optional secondary and final pupil centers for one eye.

    All coordinates are in face-image space.  The final center is the exact
    midpoint of primary and secondary when the secondary exists, otherwise
    the primary itself.
    """

    side: Side
    primary: tuple[float, float]
    secondary: tuple[float, float] | None
    final: tuple[float, float]
    used_secondary: bool

    def __post_init__(self):
        if self.secondary is None:
            if self.used_secondary or self.final != self.primary:
                raise ValueError("without a secondary center, final must equal primary")
        else:
            mid = ((self.primary[0] + self.secondary[0]) / 2.0,
                   (self.primary[1] + self.secondary[1]) / 2.0)
            if not self.used_secondary or self.final != mid:
                raise ValueError("final must be the midpoint of primary and secondary")


def crop_length(eye_height: float, offset: int = DEFAULT_CROP_OFFSET) -> tuple[int, bool]:
    """Half extent of the rectification sub-crop: ``ceil(height / 2) + offset``.

    Returns ``(length, degenerate)``; a zero eye height flags the result as
    degenerate and contributes only the offset.
    """
    if eye_height < 0:
        raise ValueError(f"eye_height must be >= 0, got {eye_height}")
    if offset < 0:
        raise ValueError(f"offset must be >= 0, got {offset}")
    if eye_height == 0:
        return int(offset), True
    return int(math.ceil(eye_height / 2.0)) + int(offset), False


def primary_center(crop: np.ndarray) -> tuple[float, float]:
    """Centroid of the largest dark blob after global thresholding.

    The iris is the darkest structure in a well-formed eye crop, so the
    threshold's dark class isolates it and the blob centroid lands on the
    pupil.  Raises ``NoPupilError`` when the crop is uniform.
    """
    try:
        level = otsu_level(crop)
        mask = threshold_dark(crop, level)
        return largest_blob_centroid(mask)
    except (DegenerateHistogramError, NoBlobError) as exc:
        raise NoPupilError(f"no dark blob in eye crop: {exc}") from exc


def secondary_center(crop: np.ndarray, primary: tuple[float, float],
                     eye_height: float, offset: int = DEFAULT_CROP_OFFSET,
                     ) -> tuple[float, float] | None:
    """Circle-based center from a focused sub-crop, or ``None``.

    A square of half extent ``crop_length(eye_height, offset)`` around the
    primary center is adaptively thresholded, edge detected, and searched
    for circles with radii in ``[max(2, eye_height / 4), eye_height]``
    (clamped to what the sub-crop admits).  Absence of a confident circle is
    a value, not an error.
    """
    crop = np.asarray(crop)
    h, w = crop.shape
    px, py = primary
    if not (0 <= px < w and 0 <= py < h):
        raise ValueError(f"primary center {primary} lies outside the {w}x{h} crop")
    spec = CropSpec(center=primary, half_extent=crop_length(eye_height, offset)[0])
    half = spec.half_extent
    x0 = max(0, int(math.floor(px)) - half)
    y0 = max(0, int(math.floor(py)) - half)
    x1 = min(w, int(math.ceil(px)) + half + 1)
    y1 = min(h, int(math.ceil(py)) + half + 1)
    sub = crop[y0:y1, x0:x1]
    min_dim = min(sub.shape)
    if min_dim < 5:
        return None

    window = min_dim if min_dim % 2 == 1 else min_dim - 1
    mask = adaptive_threshold(sub, window, ADAPTIVE_BIAS)
    if not mask.any():
        return None
    edges = canny((mask.astype(np.uint8)) * 255, sigma=CANNY_SIGMA)
    if not edges.any():
        return None

    r_lo = max(2, int(round(eye_height / 4.0)))
    r_hi = min(int(round(eye_height)), (min_dim - 1) // 2)
    if r_hi >= min_dim / 2:
        r_hi = (min_dim - 1) // 2
    if r_hi < r_lo:
        return None
    candidates = hough_circles(edges, r_lo, r_hi)
    if not candidates:
        return None
    best = candidates[0]
    return (x0 + best.center[0], y0 + best.center[1])


def _localize_eye(face: np.ndarray, contour, offset: int, pad: int) -> PupilEstimate:
    crop = crop_eye(face, contour, pad)
    try:
        prim = primary_center(crop.image)
    except NoPupilError as exc:
        raise NoPupilError(str(exc), side=crop.side) from exc
    height = contour_height(contour)
    sec = secondary_center(crop.image, prim, height, offset)
    prim_face = crop.to_face_frame(prim)
    if sec is None:
        return PupilEstimate(side=crop.side, primary=prim_face, secondary=None,
                             final=prim_face, used_secondary=False)
    sec_face = crop.to_face_frame(sec)
    final_face = ((prim_face[0] + sec_face[0]) / 2.0,
                  (prim_face[1] + sec_face[1]) / 2.0)
    return PupilEstimate(side=crop.side, primary=prim_face, secondary=sec_face,
                         final=final_face, used_secondary=True)


def localize_pupils(face: np.ndarray, lm: LandmarkSet,
                    offset: int = DEFAULT_CROP_OFFSET,
                    pad: int = DEFAULT_CROP_PAD) -> tuple[PupilEstimate, PupilEstimate]:
    """Run the full per-eye pipeline; returns (subject-left, subject-right).

    Raises ``NoPupilError`` (carrying the failing side) or
    ``DegenerateEyeError`` when either eye cannot be localized.
    """
    left_contour, right_contour = eye_contours(lm)
    left = _localize_eye(face, left_contour, offset, pad)
    right = _localize_eye(face, right_contour, offset, pad)
    return left, right
