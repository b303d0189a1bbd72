"""gazekit: pupil-center localization and geometric gaze-region labeling.

The pipeline crops each eye from facial landmarks, finds a primary pupil
center by global thresholding plus blob centroiding and a secondary one by
circle detection on a rectified sub-crop, averages the two, and classifies
gaze and head-pose regions from pupil-to-nose angle geometry.  A batch CLI
labels whole corpora deterministically; an evaluator scores localization by
the normalized interocular error.
"""

from .image import (
    CircleCandidate,
    DegenerateHistogramError,
    NoBlobError,
    adaptive_threshold,
    canny,
    gaussian_blur,
    hough_circles,
    largest_blob_centroid,
    otsu_level,
    threshold_dark,
    to_grayscale,
)
from .io import read_grayscale, read_raster, write_raster
from .landmarks import (
    CropOutOfBoundsError,
    DegenerateEyeError,
    EyeContour,
    EyeCrop,
    FaceAnchors,
    LandmarkParseError,
    LandmarkSet,
    ParseIssue,
    Side,
    contour_height,
    crop_eye,
    eye_contours,
    face_anchors,
    parse_landmark_file,
    serialize_landmark_file,
)
from .pupil import (
    CropSpec,
    NoPupilError,
    PupilEstimate,
    crop_length,
    localize_pupils,
    primary_center,
    secondary_center,
)
from .gaze import (
    FrameLabel,
    GazeAngles,
    LabelingError,
    RegionLabel,
    UndefinedAngleError,
    classify_gaze,
    classify_head_pose,
    compute_gaze_angles,
    face_vertical_axis,
    label_frame,
    pupil_angle,
)
from .evaluate import (
    EvalSummary,
    EvaluationError,
    GroundTruthRecord,
    PupilPrediction,
    accuracy_report,
    map_angular_to_region,
    normalized_error,
    parse_ground_truth_file,
    region_accuracy,
)
from .labeler import (
    CannotSplitError,
    CorpusManifest,
    LabelConfig,
    LabelRecord,
    ManifestError,
    SubjectEntry,
    read_labels_file,
    run_label,
    sample_frames,
    split_dataset,
    stats_report,
    write_labels_file,
)

__version__ = "0.1.0"
