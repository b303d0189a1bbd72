"""Three-way gaze-region and head-pose classification from face geometry.

Each pupil (or outer eye corner) forms a segment with the nose tip; the
unsigned angle between that segment and the face's vertical axis gives the
four angles ``theta1..theta4``.  Comparing the left-side angle against the
right-side one with a small dead band yields the Left / Right / Center label:
a pupil swinging toward the subject's left widens the left-eye angle and
narrows the right-eye one.

The vertical axis is taken perpendicular to the baseline through the two
outer eye corners.  For an upright face this is exactly the image vertical;
when the head rolls in-plane the axis rolls with it, which keeps centered
gaze labeled Center instead of leaking roll into the angle comparison.  The
two-point ``pupil_angle`` helper keeps the plain image-vertical convention.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .landmarks import DegenerateEyeError, FaceAnchors, LandmarkSet, face_anchors
from .pupil import DEFAULT_CROP_OFFSET, NoPupilError, PupilEstimate, localize_pupils

DEFAULT_TAU = 2.0  # degrees of dead band around Center, gaze
DEFAULT_TAU_HEAD = 2.0  # degrees of dead band around Center, head pose

# Degenerate-geometry flags carried on FrameLabel rather than raised.
FLAG_NO_SECONDARY_LEFT = "NO_SECONDARY_LEFT"
FLAG_NO_SECONDARY_RIGHT = "NO_SECONDARY_RIGHT"
FLAG_PUPIL_ON_NOSE_AXIS = "PUPIL_ON_NOSE_AXIS"
FLAG_CORNER_ON_NOSE = "CORNER_ON_NOSE"
FLAG_ROLL_AXIS_DEGENERATE = "ROLL_AXIS_DEGENERATE"


class RegionLabel(enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"
    CENTER = "Center"


class UndefinedAngleError(ValueError):
    """Raised when an angle is requested for a zero-length segment."""


class LabelingError(ValueError):
    """Raised when a frame cannot be labeled; carries the failing stage."""


@dataclass(frozen=True)
class GazeAngles:
    """The four heuristic angles, in degrees within [0, 90]."""

    theta1: float  # subject-left pupil vs vertical
    theta2: float  # subject-right pupil vs vertical
    theta3: float  # subject-left outer corner vs vertical
    theta4: float  # subject-right outer corner vs vertical

    def __post_init__(self):
        for name in ("theta1", "theta2", "theta3", "theta4"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 90.0):
                raise ValueError(f"{name} must be a finite angle in [0, 90], got {v}")


@dataclass(frozen=True)
class FrameLabel:
    """Labeling result of one frame: regions, pupils, angles, and flags."""

    frame_id: str
    gaze: RegionLabel
    head_pose: RegionLabel
    left_pupil: tuple[float, float]
    right_pupil: tuple[float, float]
    angles: GazeAngles
    flags: frozenset[str]


def _axis_angle(point: tuple[float, float], origin: tuple[float, float],
                axis: tuple[float, float]) -> float:
    sx = point[0] - origin[0]
    sy = point[1] - origin[1]
    if sx == 0.0 and sy == 0.0:
        raise UndefinedAngleError(f"point {point} coincides with origin {origin}")
    cross = sx * axis[1] - sy * axis[0]
    dot = sx * axis[0] + sy * axis[1]
    return math.degrees(math.atan2(abs(cross), abs(dot)))


def pupil_angle(pupil: tuple[float, float], nose: tuple[float, float]) -> float:
    """Unsigned angle between the nose-to-pupil segment and the image vertical.

    Vertically aligned points give 0 degrees, horizontally aligned ones 90.
    Raises ``UndefinedAngleError`` when pupil and nose coincide.
    """
    return _axis_angle(pupil, nose, (0.0, 1.0))


def face_vertical_axis(anchors: FaceAnchors) -> tuple[tuple[float, float], bool]:
    """Unit vertical axis perpendicular to the outer-corner baseline.

    Returns ``(axis, degenerate)``; a collapsed baseline falls back to the
    image vertical and reports ``degenerate=True``.
    """
    bx = anchors.left_outer_corner[0] - anchors.right_outer_corner[0]
    by = anchors.left_outer_corner[1] - anchors.right_outer_corner[1]
    norm = math.hypot(bx, by)
    if norm == 0.0:
        return (0.0, 1.0), True
    ax, ay = -by / norm, bx / norm
    if ay < 0.0 or (ay == 0.0 and ax < 0.0):  # fixed orientation for determinism
        ax, ay = -ax, -ay
    return (ax, ay), False


def compute_gaze_angles(left_pupil: tuple[float, float],
                        right_pupil: tuple[float, float],
                        anchors: FaceAnchors,
                        flags: set[str] | None = None) -> GazeAngles:
    """Compute theta1..theta4 against the face vertical axis.

    Degenerate geometry (a point on the nose, a collapsed corner baseline)
    yields a zero angle and a flag in ``flags`` instead of an error.
    """
    axis, axis_degenerate = face_vertical_axis(anchors)
    if flags is not None and axis_degenerate:
        flags.add(FLAG_ROLL_AXIS_DEGENERATE)

    def angle(point: tuple[float, float], on_nose_flag: str) -> float:
        try:
            value = _axis_angle(point, anchors.nose, axis)
        except UndefinedAngleError:
            if flags is not None:
                flags.add(on_nose_flag)
            return 0.0
        if value == 0.0 and flags is not None:
            flags.add(on_nose_flag)
        return value

    return GazeAngles(
        theta1=angle(left_pupil, FLAG_PUPIL_ON_NOSE_AXIS),
        theta2=angle(right_pupil, FLAG_PUPIL_ON_NOSE_AXIS),
        theta3=angle(anchors.left_outer_corner, FLAG_CORNER_ON_NOSE),
        theta4=angle(anchors.right_outer_corner, FLAG_CORNER_ON_NOSE),
    )


def _compare(left_angle: float, right_angle: float, tau: float) -> RegionLabel:
    if tau < 0:
        raise ValueError(f"dead band must be >= 0, got {tau}")
    diff = left_angle - right_angle
    if diff > tau:
        return RegionLabel.LEFT
    if -diff > tau:
        return RegionLabel.RIGHT
    return RegionLabel.CENTER


def classify_gaze(angles: GazeAngles, tau: float = DEFAULT_TAU) -> RegionLabel:
    """Left when theta1 exceeds theta2 by more than ``tau``, and vice versa."""
    return _compare(angles.theta1, angles.theta2, tau)


def classify_head_pose(angles: GazeAngles, tau_h: float = DEFAULT_TAU_HEAD) -> RegionLabel:
    """Same comparator as gaze, applied to the corner angles theta3/theta4."""
    return _compare(angles.theta3, angles.theta4, tau_h)


def label_frame(face: np.ndarray, lm: LandmarkSet,
                tau: float = DEFAULT_TAU, tau_h: float = DEFAULT_TAU_HEAD,
                offset: int = DEFAULT_CROP_OFFSET) -> FrameLabel:
    """Localize pupils and classify gaze plus head pose for one frame.

    Geometric degeneracies are recorded as flags on the label; failures to
    localize either pupil raise ``LabelingError`` with the cause chained.
    """
    try:
        left, right = localize_pupils(face, lm, offset)
    except (NoPupilError, DegenerateEyeError) as exc:
        raise LabelingError(f"frame {lm.frame_id!r}: {exc}") from exc

    flags: set[str] = set()
    if not left.used_secondary:
        flags.add(FLAG_NO_SECONDARY_LEFT)
    if not right.used_secondary:
        flags.add(FLAG_NO_SECONDARY_RIGHT)
    anchors = face_anchors(lm)
    angles = compute_gaze_angles(left.final, right.final, anchors, flags)
    return FrameLabel(
        frame_id=lm.frame_id,
        gaze=classify_gaze(angles, tau),
        head_pose=classify_head_pose(angles, tau_h),
        left_pupil=left.final,
        right_pupil=right.final,
        angles=angles,
        flags=frozenset(flags),
    )
