"""Signal-to-spectrogram stress classification with logit fusion.

The pipeline: 1-D physiological segments -> magnitude spectrograms
(radix-2 STFT) -> normalized 224x224x3 image tensors -> a two-backbone
classifier that concatenates per-branch logits and learns a small fusion
network over them, evaluated with stratified k-fold cross-validation.
"""

from .dsp import (
    RealSignal,
    SignalTooShortError,
    Spectrogram,
    StftConfig,
    WindowKind,
    compute_spectrogram,
    fft,
    frequency_axis,
    num_windows,
    time_axis,
    window_coefficients,
)
from .estimators import (
    BackboneClassifier,
    SonicClassifier,
    SpectrogramImageTransformer,
)
from .evaluation import (
    Metrics,
    confusion_matrix,
    cross_validate,
    group_kfold,
    metrics_from_confusion,
    stratified_kfold,
)
from .image import NormalizeMode, normalize, prepare_image, replicate_channels, resize_bilinear
from .ingest import (
    AffectLabel,
    CsvParseError,
    EcgRecord,
    Segment,
    SegmentationConfig,
    TaskScheme,
    load_record,
    map_task_labels,
    segment_record,
)
from .models import BackboneKind, SingleNetwork, SonicNetwork, TrainConfig, train_network
from .tensorfile import TensorFormatError, read_tensor, write_tensor

__version__ = "0.1.0"

__all__ = [
    "RealSignal",
    "SignalTooShortError",
    "Spectrogram",
    "StftConfig",
    "WindowKind",
    "compute_spectrogram",
    "fft",
    "frequency_axis",
    "num_windows",
    "time_axis",
    "window_coefficients",
    "BackboneClassifier",
    "SonicClassifier",
    "SpectrogramImageTransformer",
    "Metrics",
    "confusion_matrix",
    "cross_validate",
    "group_kfold",
    "metrics_from_confusion",
    "stratified_kfold",
    "NormalizeMode",
    "normalize",
    "prepare_image",
    "replicate_channels",
    "resize_bilinear",
    "AffectLabel",
    "CsvParseError",
    "EcgRecord",
    "Segment",
    "SegmentationConfig",
    "TaskScheme",
    "load_record",
    "map_task_labels",
    "segment_record",
    "BackboneKind",
    "SingleNetwork",
    "SonicNetwork",
    "TrainConfig",
    "train_network",
    "TensorFormatError",
    "read_tensor",
    "write_tensor",
]
