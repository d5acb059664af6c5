"""Eye-closedness CNN: training, evaluation, augmentation, frozen deployment."""

from .augment import (
    AugmentParams,
    SampledTransform,
    apply_affine,
    augment_sample,
    rescale,
    sample_transform,
)
from .dataio import (
    Dataset,
    LabeledImage,
    batches,
    decode_image,
    load_directory,
    read_image,
    resize_bilinear,
    stratified_split,
    write_pgm,
)
from .errors import (
    ChecksumError,
    ConfigError,
    DecodeError,
    DegenerateDataError,
    FatigueNetError,
    InvalidLabelError,
    MagicError,
    ModelFormatError,
    PayloadShapeError,
    ShapeError,
    StateError,
    TruncatedError,
    VersionError,
)
from .layers import (
    RELU,
    SIGMOID,
    Activation,
    AvgPool2D,
    Conv2D,
    Dense,
    Flatten,
    glorot_uniform_init,
    relu,
    sigmoid,
)
from .metrics import (
    ClassMetrics,
    ConfusionMatrix2,
    classification_report,
    confusion,
    curve_export,
    macro_metrics,
    per_class_metrics,
)
from .model_io import load_frozen, predict, save_frozen
from .network import INPUT_SHAPE, Network, build_fatigue_net
from .optim import Adam, bce_loss
from .rng import Rng
from .training import EpochRecord, EvalResult, TrainConfig, evaluate, train

__version__ = "0.1.0"

__all__ = [
    "Activation", "Adam", "AugmentParams", "AvgPool2D", "ChecksumError",
    "ClassMetrics", "ConfigError", "ConfusionMatrix2", "Conv2D", "Dataset",
    "DecodeError", "DegenerateDataError", "Dense", "EpochRecord", "EvalResult",
    "FatigueNetError", "Flatten", "INPUT_SHAPE", "InvalidLabelError",
    "LabeledImage", "MagicError", "ModelFormatError", "Network",
    "PayloadShapeError", "RELU", "Rng", "SIGMOID", "SampledTransform",
    "ShapeError", "StateError",
    "TrainConfig", "TruncatedError", "VersionError", "apply_affine",
    "augment_sample", "batches", "bce_loss", "build_fatigue_net",
    "classification_report", "confusion", "curve_export", "decode_image",
    "evaluate", "glorot_uniform_init", "load_directory", "load_frozen",
    "macro_metrics", "per_class_metrics", "predict", "read_image", "relu",
    "rescale", "resize_bilinear", "sample_transform", "save_frozen", "sigmoid",
    "stratified_split", "train", "write_pgm",
]
