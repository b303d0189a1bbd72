"""izenet: toy-scale conv+capsule gaze-region classifier and fine-tuner.

Consumes the labels files and frame directories the labeling CLI emits,
trains a five-block convolutional network with a squashed primary-capsule
stage, supports regression fine-tuning with freeze levels, and exports
intermediate features.
"""

from .model import (
    CLASS_ORDER,
    CLASS_TO_INDEX,
    ConfigurationError,
    IzeNet,
    NetworkConfig,
    build_izenet,
    categorical_cross_entropy,
    squash,
)
from .data import DatasetError, LabeledFrame, load_dataset, make_toy_dataset
from .train import TrainConfig, TrainingError, load_checkpoint, train
from .finetune import (
    FREEZE_LEVELS,
    FinetuneConfig,
    GazeRegressor,
    apply_freeze,
    finetune_regression,
    parameter_modules,
)
from .features import extract_features, feature_layers

__version__ = "0.1.0"
